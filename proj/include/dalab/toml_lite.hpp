#pragma once

#include <map>
#include <string>
#include <vector>

#include "dalab/common.hpp"

namespace dalab {

/// Minimal TOML subset: [table] and [a.b] headers, key = value lines with
/// strings, integers, floats, booleans and flat arrays, plus # comments.
/// Covers the experiment config surface; nested inline tables are out of
/// scope.
struct TomlValue {
    enum class Kind { string, number, boolean, array };
    Kind kind = Kind::number;
    std::string str;
    double num = 0.0;
    bool boolean = false;
    std::vector<TomlValue> array;
};

class TomlTable {
  public:
    static TomlTable parse_file(const std::string& path);
    static TomlTable parse(const std::string& text);

    bool contains(const std::string& dotted_key) const;

    std::string get_string(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_number(const std::string& key) const;
    double get_number(const std::string& key, double fallback) const;
    long long get_integer(const std::string& key) const;
    long long get_integer(const std::string& key, long long fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<double> get_number_array(const std::string& key) const;
    std::vector<double> get_number_array(const std::string& key,
                                         const std::vector<double>& fallback) const;
    std::vector<std::string> get_string_array(const std::string& key) const;

    const std::map<std::string, TomlValue>& entries() const { return entries_; }

  private:
    const TomlValue& at(const std::string& key) const;
    std::map<std::string, TomlValue> entries_;
};

}  // namespace dalab
