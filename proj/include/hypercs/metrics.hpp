#pragma once

#include <array>
#include <cmath>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "hypercs/cube.hpp"
#include "hypercs/solvers.hpp"

namespace hypercs {

/// How the PSNR peak is chosen.
enum class PeakConvention {
  kGlobalMax,     ///< max |v| over the whole reference cube
  kDynamicRange,  ///< max v - min v over the reference cube
  kPerBand,       ///< mean of per-band PSNRs, each with its band's max |v|
};

PeakConvention parse_peak_convention(const std::string& name);
std::string_view peak_convention_name(PeakConvention convention);

/// 10 log10(peak^2 / MSE) over all voxels. Identical cubes give +infinity.
/// Throws MetricError when the reference peak is zero.
double psnr(const HsiCube& reference, const HsiCube& reconstruction,
            PeakConvention convention = PeakConvention::kGlobalMax);

inline bool is_identical_psnr(double db) { return std::isinf(db) && db > 0; }

/// 100 * converged / total. Throws MetricError for an empty collection.
double convergence_ratio(std::span<const SolverResult> results);
double convergence_ratio(std::span<const PixelOutcome> outcomes);

struct SummaryRow {
  std::string dataset;
  Algorithm algorithm = Algorithm::kFista;
  std::string param_label;  ///< "λ=0.1" for convex, "κ=24" for greedy algorithms
  double psnr_db = 0.0;     ///< +infinity stands for identical cubes
  long total_iterations = 0;
  double convergence_pct = 0.0;
  double recovery_time_s = 0.0;

  /// Numeric value behind param_label, used for ordering.
  double param_value() const;

  friend bool operator==(const SummaryRow&, const SummaryRow&) = default;
};

/// Shortest round-trip decimal form: 100 -> "100", 0.001 -> "0.001".
std::string format_number(double value);

std::string param_label(Algorithm algorithm, const SolverConfig& cfg);

/// Throws MetricError when the stats violate a row invariant (e.g. pixels that
/// converged without a single iteration).
SummaryRow summarize(const std::string& dataset, Algorithm algorithm, const SolverConfig& cfg,
                     const CubeRecoveryStats& stats, double psnr_db);

/// Writes an 8-bit binary PPM (P6) of three bands, each min-max normalized
/// to [0, 255]. A flat band maps to 0.
void export_false_color(const HsiCube& cube, const std::array<std::size_t, 3>& bands,
                        const std::filesystem::path& path);

inline constexpr const char* kReportHeader =
    "dataset,algorithm,param,psnr_db,iterations,convergence_pct,recovery_time_s";

/// CSV sorted by (dataset, algorithm, param value). With `timing_note` a
/// leading '#' comment flags recovery_time_s as non-deterministic.
void write_report(std::vector<SummaryRow> rows, const std::filesystem::path& path, bool timing_note = false);
std::string format_report(std::vector<SummaryRow> rows, bool timing_note = false);

/// Inverse of format_report; '#' lines are skipped.
std::vector<SummaryRow> parse_report(const std::string& text);
std::vector<SummaryRow> read_report(const std::filesystem::path& path);

}  // namespace hypercs
