#include "dalab/toml_lite.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace dalab {

namespace {

std::string strip(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

/// Remove a trailing # comment (outside quotes).
std::string strip_comment(const std::string& s) {
    bool in_str = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '"') in_str = !in_str;
        if (s[i] == '#' && !in_str) return s.substr(0, i);
    }
    return s;
}

TomlValue parse_scalar(const std::string& raw) {
    const std::string t = strip(raw);
    TomlValue v;
    if (t.size() >= 2 && t.front() == '"' && t.back() == '"') {
        v.kind = TomlValue::Kind::string;
        std::string out;
        for (std::size_t i = 1; i + 1 < t.size(); ++i) {
            if (t[i] == '\\' && i + 2 < t.size()) {
                ++i;
                switch (t[i]) {
                    case 'n': out += '\n'; break;
                    case 't': out += '\t'; break;
                    default: out += t[i];
                }
            } else {
                out += t[i];
            }
        }
        v.str = out;
        return v;
    }
    if (t == "true" || t == "false") {
        v.kind = TomlValue::Kind::boolean;
        v.boolean = (t == "true");
        return v;
    }
    try {
        std::size_t used = 0;
        v.num = std::stod(t, &used);
        require(used == t.size(), "toml: trailing characters in number: " + t);
        v.kind = TomlValue::Kind::number;
        return v;
    } catch (const std::invalid_argument&) {
        throw ConfigError("toml: cannot parse value: " + t);
    }
}

TomlValue parse_value(const std::string& raw) {
    const std::string t = strip(raw);
    if (!t.empty() && t.front() == '[') {
        require(t.back() == ']', "toml: unterminated array");
        TomlValue v;
        v.kind = TomlValue::Kind::array;
        std::string inner = t.substr(1, t.size() - 2);
        std::string cur;
        bool in_str = false;
        for (char ch : inner) {
            if (ch == '"') in_str = !in_str;
            if (ch == ',' && !in_str) {
                if (!strip(cur).empty()) v.array.push_back(parse_scalar(cur));
                cur.clear();
            } else {
                cur += ch;
            }
        }
        if (!strip(cur).empty()) v.array.push_back(parse_scalar(cur));
        return v;
    }
    return parse_scalar(t);
}

}  // namespace

TomlTable TomlTable::parse_file(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), "toml: cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

TomlTable TomlTable::parse(const std::string& text) {
    TomlTable table;
    std::istringstream in(text);
    std::string line;
    std::string prefix;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = strip(strip_comment(line));
        if (line.empty()) continue;
        if (line.front() == '[') {
            require(line.back() == ']', "toml: bad table header on line " +
                                            std::to_string(line_no));
            prefix = strip(line.substr(1, line.size() - 2));
            require(!prefix.empty(), "toml: empty table name");
            continue;
        }
        const auto eq = line.find('=');
        require(eq != std::string::npos, "toml: expected key = value on line " +
                                             std::to_string(line_no));
        const std::string key = strip(line.substr(0, eq));
        require(!key.empty(), "toml: empty key on line " + std::to_string(line_no));
        const std::string full = prefix.empty() ? key : prefix + "." + key;
        table.entries_[full] = parse_value(line.substr(eq + 1));
    }
    return table;
}

bool TomlTable::contains(const std::string& key) const { return entries_.count(key) > 0; }

const TomlValue& TomlTable::at(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) throw ConfigError("toml: missing key: " + key);
    return it->second;
}

std::string TomlTable::get_string(const std::string& key) const {
    const TomlValue& v = at(key);
    require(v.kind == TomlValue::Kind::string, "toml: " + key + " is not a string");
    return v.str;
}

std::string TomlTable::get_string(const std::string& key, const std::string& fallback) const {
    return contains(key) ? get_string(key) : fallback;
}

double TomlTable::get_number(const std::string& key) const {
    const TomlValue& v = at(key);
    require(v.kind == TomlValue::Kind::number, "toml: " + key + " is not a number");
    return v.num;
}

double TomlTable::get_number(const std::string& key, double fallback) const {
    return contains(key) ? get_number(key) : fallback;
}

long long TomlTable::get_integer(const std::string& key) const {
    const double v = get_number(key);
    require(std::abs(v - std::llround(v)) < 1e-9, "toml: " + key + " is not an integer");
    return std::llround(v);
}

long long TomlTable::get_integer(const std::string& key, long long fallback) const {
    return contains(key) ? get_integer(key) : fallback;
}

bool TomlTable::get_bool(const std::string& key, bool fallback) const {
    if (!contains(key)) return fallback;
    const TomlValue& v = at(key);
    require(v.kind == TomlValue::Kind::boolean, "toml: " + key + " is not a boolean");
    return v.boolean;
}

std::vector<double> TomlTable::get_number_array(const std::string& key) const {
    const TomlValue& v = at(key);
    require(v.kind == TomlValue::Kind::array, "toml: " + key + " is not an array");
    std::vector<double> out;
    for (const auto& e : v.array) {
        require(e.kind == TomlValue::Kind::number, "toml: " + key + " has non-numeric entries");
        out.push_back(e.num);
    }
    return out;
}

std::vector<double> TomlTable::get_number_array(const std::string& key,
                                                const std::vector<double>& fallback) const {
    return contains(key) ? get_number_array(key) : fallback;
}

std::vector<std::string> TomlTable::get_string_array(const std::string& key) const {
    const TomlValue& v = at(key);
    require(v.kind == TomlValue::Kind::array, "toml: " + key + " is not an array");
    std::vector<std::string> out;
    for (const auto& e : v.array) {
        require(e.kind == TomlValue::Kind::string, "toml: " + key + " has non-string entries");
        out.push_back(e.str);
    }
    return out;
}

}  // namespace dalab
