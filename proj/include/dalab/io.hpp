#pragma once

#include <string>
#include <vector>

#include "dalab/ensemble.hpp"
#include "dalab/fv_solver.hpp"
#include "dalab/prior.hpp"
#include "dalab/spectral_field.hpp"
#include "dalab/trajectory.hpp"

namespace dalab {

/// Binary field snapshot: header {magic "DALF", version, N, spatial dims,
/// component count} followed by a little-endian complex64 block, row-major
/// over (component, kx+N, ky+N). The compact interchange format; complex64
/// quantizes, so equality tests hold at float precision.
void save_field(const SpectralField& field, const std::string& path);
SpectralField load_field(const std::string& path);

/// Lossless JSON debug export: every coefficient as {k:[kx,ky], re, im} per
/// component, doubles round-tripped exactly.
void save_field_json(const SpectralField& field, const std::string& path);
SpectralField load_field_json(const std::string& path);

/// Trajectory archive: directory with manifest.json {nu, N, dt, T,
/// snapshot_times, seed provenance} plus one snapshot file per time.
void save_trajectory(const Trajectory& traj, const std::string& dir, double viscosity,
                     double dt, double t_end, const std::string& provenance);
Trajectory load_trajectory(const std::string& dir);

/// Cell field snapshots: CSV rows "index,u" and a binary block with the
/// same header scheme as the spectral format (float64 payload).
void save_cells_csv(const CellField& u, const std::string& path);
CellField load_cells_csv(const std::string& path);
void save_cells(const CellField& u, const std::string& path);
CellField load_cells(const std::string& path);

/// Ensemble archive: manifest {n, spec, seed, log_weights} + member files.
void save_ensemble(const WeightedEnsemble<SpectralField>& ens, const PriorSpec& spec,
                   std::uint64_t seed, const std::string& dir);
WeightedEnsemble<SpectralField> load_ensemble(const std::string& dir);

/// Deterministic CSV writer: fixed %.17g formatting, one row per record.
class CsvWriter {
  public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header);
    ~CsvWriter();
    void row(const std::vector<double>& values);
    void row_mixed(const std::vector<std::string>& fields);

  private:
    void* out_;
};

std::string format_double(double v);

void ensure_directory(const std::string& dir);

}  // namespace dalab
