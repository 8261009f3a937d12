#pragma once

#include <string>
#include <vector>

#include "dalab/config.hpp"

namespace dalab {

struct CriterionResult {
    std::string name;
    bool pass = false;
    std::string details;
};

/// Machine-readable record of one experiment run. Timings go to a separate
/// sidecar file so the result outputs stay byte-identical across worker
/// counts.
struct RunRecord {
    std::string experiment;
    std::string config_hash;
    std::vector<std::string> artifacts;
    std::vector<CriterionResult> criteria;
    std::vector<std::pair<std::string, double>> timings_sec;

    bool all_pass() const {
        for (const auto& c : criteria)
            if (!c.pass) return false;
        return true;
    }
};

RunRecord exp_stability(const ExperimentConfig& cfg);
RunRecord exp_consistency(const ExperimentConfig& cfg);
RunRecord exp_compactness(const ExperimentConfig& cfg);
RunRecord exp_equivalence(const ExperimentConfig& cfg);
RunRecord exp_noise_audit(const ExperimentConfig& cfg);
RunRecord exp_claw_suite(const ExperimentConfig& cfg);

/// Forward solve + trajectory archive.
RunRecord run_simulate(const ExperimentConfig& cfg);
/// One filtering run + archive (+ optional demo resampling).
RunRecord run_filter(const ExperimentConfig& cfg);

/// Dispatch on cfg.experiment.
RunRecord run_experiment(const ExperimentConfig& cfg);

/// run_record.json (deterministic) + timings.json (wall times).
void write_run_record(const RunRecord& rec, const std::string& out_dir);

}  // namespace dalab
