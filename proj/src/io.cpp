#include "dalab/io.hpp"

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

#include <json.hpp>

namespace dalab {

namespace {

constexpr char kFieldMagic[4] = {'D', 'A', 'L', 'F'};
constexpr char kCellMagic[4] = {'D', 'A', 'L', 'C'};

void write_u32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t read_u32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void write_f32(std::ostream& out, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    write_u32(out, bits);
}

float read_f32(std::istream& in) {
    const std::uint32_t bits = read_u32(in);
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
}

void write_f64(std::ostream& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    write_u32(out, static_cast<std::uint32_t>(bits & 0xffffffffULL));
    write_u32(out, static_cast<std::uint32_t>(bits >> 32));
}

double read_f64(std::istream& in) {
    const std::uint64_t lo = read_u32(in);
    const std::uint64_t hi = read_u32(in);
    const std::uint64_t bits = lo | (hi << 32);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

}  // namespace

void ensure_directory(const std::string& dir) {
    std::filesystem::create_directories(dir);
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void save_field(const SpectralField& field, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    require(out.good(), "save_field: cannot open " + path);
    out.write(kFieldMagic, 4);
    write_u32(out, 1);  // version
    write_u32(out, static_cast<std::uint32_t>(field.grid().n_modes));
    write_u32(out, 2);  // spatial dims
    write_u32(out, SpectralField::n_components);
    write_u32(out, field.divergence_free_flag() ? 1 : 0);
    for (const complexd& z : field.raw()) {
        write_f32(out, static_cast<float>(z.real()));
        write_f32(out, static_cast<float>(z.imag()));
    }
}

SpectralField load_field(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    require(in.good(), "load_field: cannot open " + path);
    char magic[4];
    in.read(magic, 4);
    require(std::memcmp(magic, kFieldMagic, 4) == 0, "load_field: bad magic");
    const std::uint32_t version = read_u32(in);
    require(version == 1, "load_field: unsupported version");
    const std::uint32_t n = read_u32(in);
    const std::uint32_t dims = read_u32(in);
    const std::uint32_t comps = read_u32(in);
    const std::uint32_t div_free = read_u32(in);
    require(dims == 2 && comps == SpectralField::n_components, "load_field: unexpected layout");
    SpectralField field{Grid2(static_cast<int>(n))};
    for (complexd& z : field.raw()) {
        const float re = read_f32(in);
        const float im = read_f32(in);
        z = complexd(re, im);
    }
    require(in.good(), "load_field: truncated file");
    field.set_divergence_free_flag(div_free != 0);
    return field;
}

void save_field_json(const SpectralField& field, const std::string& path) {
    nlohmann::ordered_json j;
    j["n_modes"] = field.grid().n_modes;
    j["divergence_free"] = field.divergence_free_flag();
    const int n = field.grid().n_modes;
    for (int c = 0; c < SpectralField::n_components; ++c) {
        nlohmann::ordered_json comp = nlohmann::ordered_json::array();
        for (int kx = -n; kx <= n; ++kx)
            for (int ky = -n; ky <= n; ++ky) {
                const complexd z = field.at(c, kx, ky);
                comp.push_back({{"k", {kx, ky}}, {"re", z.real()}, {"im", z.imag()}});
            }
        j["components"].push_back(std::move(comp));
    }
    std::ofstream out(path);
    require(out.good(), "save_field_json: cannot open " + path);
    out << j.dump(2) << "\n";
}

SpectralField load_field_json(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), "load_field_json: cannot open " + path);
    nlohmann::json j;
    in >> j;
    SpectralField field{Grid2(j.at("n_modes").get<int>())};
    field.set_divergence_free_flag(j.value("divergence_free", false));
    const auto& comps = j.at("components");
    for (std::size_t c = 0; c < comps.size(); ++c)
        for (const auto& entry : comps[c]) {
            const int kx = entry.at("k")[0].get<int>();
            const int ky = entry.at("k")[1].get<int>();
            field.at(static_cast<int>(c), kx, ky) =
                complexd(entry.at("re").get<double>(), entry.at("im").get<double>());
        }
    return field;
}

void save_trajectory(const Trajectory& traj, const std::string& dir, double viscosity,
                     double dt, double t_end, const std::string& provenance) {
    ensure_directory(dir);
    nlohmann::ordered_json manifest;
    manifest["nu"] = viscosity;
    manifest["N"] = traj.states.front().grid().n_modes;
    manifest["dt"] = dt;
    manifest["T"] = t_end;
    manifest["snapshot_times"] = traj.times;
    manifest["provenance"] = provenance;
    std::vector<std::string> files;
    for (std::size_t i = 0; i < traj.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "snapshot_%04zu.bin", i);
        save_field(traj.states[i], dir + "/" + name);
        files.push_back(name);
    }
    manifest["files"] = files;
    std::ofstream out(dir + "/manifest.json");
    require(out.good(), "save_trajectory: cannot open manifest");
    out << manifest.dump(2) << "\n";
}

Trajectory load_trajectory(const std::string& dir) {
    std::ifstream in(dir + "/manifest.json");
    require(in.good(), "load_trajectory: missing manifest in " + dir);
    nlohmann::json manifest;
    in >> manifest;
    Trajectory traj;
    traj.times = manifest.at("snapshot_times").get<std::vector<double>>();
    for (const auto& name : manifest.at("files"))
        traj.states.push_back(load_field(dir + "/" + name.get<std::string>()));
    traj.validate();
    return traj;
}

void save_cells_csv(const CellField& u, const std::string& path) {
    std::ofstream out(path);
    require(out.good(), "save_cells_csv: cannot open " + path);
    out << "index,u\n";
    for (std::size_t i = 0; i < u.n_cells(); ++i)
        out << i << "," << format_double(u[i]) << "\n";
}

CellField load_cells_csv(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), "load_cells_csv: cannot open " + path);
    std::string line;
    std::getline(in, line);  // header
    CellField u;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        require(comma != std::string::npos, "load_cells_csv: malformed row");
        u.values.push_back(std::stod(line.substr(comma + 1)));
    }
    require(!u.values.empty(), "load_cells_csv: empty file");
    return u;
}

void save_cells(const CellField& u, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    require(out.good(), "save_cells: cannot open " + path);
    out.write(kCellMagic, 4);
    write_u32(out, 1);
    write_u32(out, static_cast<std::uint32_t>(u.n_cells()));
    for (double v : u.values) write_f64(out, v);
}

CellField load_cells(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    require(in.good(), "load_cells: cannot open " + path);
    char magic[4];
    in.read(magic, 4);
    require(std::memcmp(magic, kCellMagic, 4) == 0, "load_cells: bad magic");
    require(read_u32(in) == 1, "load_cells: unsupported version");
    const std::uint32_t n = read_u32(in);
    CellField u;
    u.values.resize(n);
    for (double& v : u.values) v = read_f64(in);
    require(in.good(), "load_cells: truncated file");
    return u;
}

void save_ensemble(const WeightedEnsemble<SpectralField>& ens, const PriorSpec& spec,
                   std::uint64_t seed, const std::string& dir) {
    ensure_directory(dir);
    nlohmann::ordered_json manifest;
    manifest["n"] = ens.size();
    manifest["spec"] = {{"alpha", spec.alpha},
                        {"k_max", spec.k_max},
                        {"support_radius", spec.support_radius},
                        {"sigma", spec.sigma},
                        {"divergence_free", spec.divergence_free}};
    manifest["seed"] = seed;
    manifest["log_weights"] = ens.log_weights;
    std::vector<std::string> files;
    for (std::size_t i = 0; i < ens.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "member_%04zu.bin", i);
        save_field(ens.members[i], dir + "/" + name);
        files.push_back(name);
    }
    manifest["files"] = files;
    std::ofstream out(dir + "/manifest.json");
    require(out.good(), "save_ensemble: cannot open manifest");
    out << manifest.dump(2) << "\n";
}

WeightedEnsemble<SpectralField> load_ensemble(const std::string& dir) {
    std::ifstream in(dir + "/manifest.json");
    require(in.good(), "load_ensemble: missing manifest in " + dir);
    nlohmann::json manifest;
    in >> manifest;
    WeightedEnsemble<SpectralField> ens;
    ens.log_weights = manifest.at("log_weights").get<std::vector<double>>();
    for (const auto& name : manifest.at("files"))
        ens.members.push_back(load_field(dir + "/" + name.get<std::string>()));
    ens.validate();
    return ens;
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header) {
    auto* out = new std::ofstream(path);
    require(out->good(), "CsvWriter: cannot open " + path);
    out_ = out;
    for (std::size_t i = 0; i < header.size(); ++i)
        (*out) << header[i] << (i + 1 == header.size() ? "\n" : ",");
}

CsvWriter::~CsvWriter() { delete static_cast<std::ofstream*>(out_); }

void CsvWriter::row(const std::vector<double>& values) {
    auto& out = *static_cast<std::ofstream*>(out_);
    for (std::size_t i = 0; i < values.size(); ++i)
        out << format_double(values[i]) << (i + 1 == values.size() ? "\n" : ",");
}

void CsvWriter::row_mixed(const std::vector<std::string>& fields) {
    auto& out = *static_cast<std::ofstream*>(out_);
    for (std::size_t i = 0; i < fields.size(); ++i)
        out << fields[i] << (i + 1 == fields.size() ? "\n" : ",");
}

}  // namespace dalab
