#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hypercs/cube.hpp"
#include "hypercs/metrics.hpp"
#include "hypercs/solvers.hpp"
#include "hypercs/transform.hpp"

namespace hypercs {

/// One (algorithm, parameter) pair of a benchmark.
struct AlgorithmRun {
  Algorithm algorithm = Algorithm::kGomp;
  SolverConfig cfg;

  /// File-name tag such as "gomp_k24" or "fista_l0.1".
  std::string tag() const;
};

struct SyntheticSpec {
  std::size_t width = 16;
  std::size_t height = 16;
  std::size_t bands = 64;
  std::size_t kappa = 4;
  std::uint64_t seed = 1;
};

struct RunConfig {
  std::filesystem::path input;
  CubeFormat format = CubeFormat::native();
  std::optional<SyntheticSpec> synthetic;  ///< generate the input instead of loading it
  std::string dataset;                     ///< report label, defaults to the input stem
  double T = 0.1;
  double ratio = 0.4;
  std::uint64_t seed = 1;
  std::filesystem::path out = "hypercs_out";
  unsigned jobs = 0;  ///< 0 = HYPERCS_JOBS or hardware concurrency
  PeakConvention peak = PeakConvention::kGlobalMax;
  std::optional<std::array<std::size_t, 3>> export_bands;
  std::vector<AlgorithmRun> runs;

  void validate() const;
  std::string dataset_name() const;
  unsigned worker_count() const;
};

/// Parses the flat key = value manifest. Top-level keys set run options and
/// solver defaults; each [algorithm] section adds runs, one per value of its
/// sweep key (lambda for fista/admm, kappa for the greedy solvers).
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::filesystem::path& path);

/// Comma-separated list of numbers, e.g. "0.1,100".
std::vector<double> parse_number_list(const std::string& text);

struct CubeSparsifyStats {
  double T = 0.0;
  double zero_fraction = 0.0;  ///< over all pixels and coefficients
  double mean_mu_x = 0.0;
  double mean_sigma_x = 0.0;
  double psnr_vs_original_db = 0.0;
  std::size_t pixels = 0;
};

/// Per pixel: to the sparse domain, threshold, back to the pixel domain.
std::pair<HsiCube, CubeSparsifyStats> sparsify_cube(const HsiCube& cube, double T,
                                                    PeakConvention peak = PeakConvention::kGlobalMax);

/// Per-pixel measurements sharing one selection mask.
struct MeasurementSet {
  std::size_t width = 0;
  std::size_t height = 0;
  SelectionMask mask;
  std::vector<CVector> y;

  friend bool operator==(const MeasurementSet&, const MeasurementSet&) = default;
};

MeasurementSet compress_cube(const HsiCube& cube, const SelectionMask& mask);

/// "HSM1", then X, Y, N, M as u32 little-endian, then X*Y*M complex f64
/// pairs (re, im) in pixel order. The mask itself lives in a text sidecar.
void save_measurements(const MeasurementSet& set, const std::filesystem::path& payload,
                       const std::filesystem::path& mask_record);
MeasurementSet load_measurements(const std::filesystem::path& payload, const std::filesystem::path& mask_record);

struct RecoveryOutput {
  HsiCube recovered;  ///< Re(Psi x) per pixel
  CubeRecovery recovery;
};

RecoveryOutput recover_measurements(const MeasurementSet& set, const AlgorithmRun& run, unsigned jobs);

/// Output-directory layout shared by the stage commands.
struct StagePaths {
  std::filesystem::path root;

  std::filesystem::path sparsified() const { return root / "sparsified.hsc"; }
  std::filesystem::path sparsify_stats() const { return root / "sparsify_stats.json"; }
  std::filesystem::path measurements() const { return root / "measurements.hsm"; }
  std::filesystem::path mask() const { return root / "mask.txt"; }
  std::filesystem::path recovered(const AlgorithmRun& run) const { return root / ("recovered_" + run.tag() + ".hsc"); }
  std::filesystem::path pixel_log(const AlgorithmRun& run) const { return root / ("pixels_" + run.tag() + ".csv"); }
  std::filesystem::path report() const { return root / "report.csv"; }
  std::filesystem::path image(const std::string& name) const { return root / (name + ".ppm"); }
};

/// Loads cfg.input or generates the synthetic cube.
HsiCube load_input(const RunConfig& cfg);

CubeSparsifyStats cmd_sparsify(const RunConfig& cfg);
MeasurementSet cmd_compress(const RunConfig& cfg);
/// Requires the measurement file and mask record from cmd_compress.
CubeRecovery cmd_recover(const RunConfig& cfg, const AlgorithmRun& run);
/// Full pipeline; adds the number of numerically failed pixels to
/// `failed_pixels` when given.
std::vector<SummaryRow> cmd_bench(const RunConfig& cfg, std::size_t* failed_pixels = nullptr);
/// Aligned text table of a report CSV.
std::string cmd_report(const std::filesystem::path& report_csv);

void write_pixel_log(const CubeRecovery& recovery, const std::filesystem::path& path);

}  // namespace hypercs
