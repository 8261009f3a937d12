#include "dalab/measurement.hpp"

#include <fstream>

#include <json.hpp>

namespace dalab {

double MeasurementSet::stacked_distance(const MeasurementSet& a, const MeasurementSet& b,
                                        const NoiseModel& nm) {
    require(a.values.size() == b.values.size(), "stacked_distance: stage count mismatch");
    double s = 0.0;
    for (std::size_t j = 0; j < a.values.size(); ++j) {
        require(a.values[j].size() == b.values[j].size(), "stacked_distance: dim mismatch");
        std::vector<double> d(a.values[j].size());
        for (std::size_t c = 0; c < d.size(); ++c) d[c] = a.values[j][c] - b.values[j][c];
        const double q = nm.gamma_norm(d);
        s += q * q;
    }
    return std::sqrt(s);
}

void save_measurements(const MeasurementSet& ms, const std::string& path) {
    nlohmann::ordered_json j;
    j["times"] = ms.times;
    j["y"] = ms.values;
    j["gamma"] = ms.gamma;
    j["noise"] = {{"kind", ms.noise_kind},
                  {"mixture_weight", ms.mixture_weight},
                  {"kappa", ms.kappa}};
    j["seed"] = ms.seed;
    j["truth_id"] = ms.truth_id;
    std::ofstream out(path);
    require(out.good(), "save_measurements: cannot open " + path);
    out << j.dump(2) << "\n";
}

MeasurementSet load_measurements(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), "load_measurements: cannot open " + path);
    nlohmann::json j;
    in >> j;
    MeasurementSet ms;
    ms.times = j.at("times").get<std::vector<double>>();
    ms.values = j.at("y").get<std::vector<std::vector<double>>>();
    ms.gamma = j.at("gamma").get<std::vector<double>>();
    ms.noise_kind = j.at("noise").at("kind").get<std::string>();
    ms.mixture_weight = j.at("noise").value("mixture_weight", 0.0);
    ms.kappa = j.at("noise").value("kappa", 0.0);
    ms.seed = j.at("seed").get<std::uint64_t>();
    ms.truth_id = j.value("truth_id", std::string());
    ms.validate();
    return ms;
}

}  // namespace dalab
