#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hypercs/kernels.hpp"
#include "hypercs/transform.hpp"
#include "hypercs/types.hpp"

namespace hypercs {

enum class Algorithm { kFista, kAdmm, kGomp, kBiht, kCosamp };

inline constexpr Algorithm kAllAlgorithms[] = {Algorithm::kFista, Algorithm::kAdmm, Algorithm::kGomp,
                                               Algorithm::kBiht, Algorithm::kCosamp};

std::string_view algorithm_name(Algorithm algorithm);   // "fista", "admm", ...
std::string_view algorithm_label(Algorithm algorithm);  // "FISTA", "gOMP", ...
Algorithm parse_algorithm(std::string_view name);
bool is_greedy(Algorithm algorithm);

struct SolverConfig {
  double lambda = 0.1;            ///< Lasso weight
  Index kappa = 1;                ///< target sparsity
  std::optional<Index> G;         ///< gOMP atoms per iteration, default max(1, kappa / 5)
  double mu = 0.1;                ///< BIHT descent factor
  double alpha = 1.8;             ///< ADMM penalty
  double epsilon = 1e-8;          ///< stop once ||r_i - r_{i-1}|| < epsilon
  double t_conv = 2.0;            ///< per-pixel wall-clock bound in seconds, <= 0 disables
  long max_iter = 0;              ///< 0 means unlimited
  std::uint64_t seed = 0;

  Index group_size() const;

  /// Throws ConfigError on any violated positivity or ordering constraint.
  void validate() const;
};

/// kSupportLimit: a greedy support union grew past M columns; the previous
/// iterate is returned unconverged.
enum class StopDecision { kContinue, kConverged, kTimeout, kIterCap, kSupportLimit };

std::string_view stop_name(StopDecision decision);

/// Convergence wins over the iteration cap, which wins over the timeout.
StopDecision stop_check(double delta, long iterations, double elapsed_s, const SolverConfig& cfg);

struct SolverResult {
  CVector x;
  long iterations = 0;
  bool converged = false;
  double elapsed_s = 0.0;
  double final_delta = 1.0;
  StopDecision reason = StopDecision::kContinue;
};

/// Per-iteration snapshot handed to an optional observer. Fields that do not
/// apply to the running algorithm stay at their defaults.
struct IterationTrace {
  long iteration = 0;
  const CVector* x = nullptr;   ///< iterate emitted this step
  double delta = 0.0;
  double momentum = 0.0;        ///< FISTA t
  double primal_gap = 0.0;      ///< ADMM ||x - z||
  Index candidates = 0;         ///< |Theta|
  Index support = 0;            ///< |c| after the union
};

using IterationObserver = std::function<void(const IterationTrace&)>;

SolverResult fista(const CVector& y, const Dictionary& a, const SolverConfig& cfg,
                   const IterationObserver& observer = {});
SolverResult admm(const CVector& y, const Dictionary& a, const SolverConfig& cfg,
                  const IterationObserver& observer = {});
SolverResult gomp(const CVector& y, const Dictionary& a, const SolverConfig& cfg,
                  const IterationObserver& observer = {});
SolverResult biht(const CVector& y, const Dictionary& a, const SolverConfig& cfg,
                  const IterationObserver& observer = {});
SolverResult cosamp(const CVector& y, const Dictionary& a, const SolverConfig& cfg,
                    const IterationObserver& observer = {});

SolverResult solve(Algorithm algorithm, const CVector& y, const Dictionary& a, const SolverConfig& cfg,
                   const IterationObserver& observer = {});

/// H(x) = 0.5 ||A x - y||^2 + lambda ||x||_1
double lasso_objective(const CVector& x, const CVector& y, const CMatrix& a, double lambda);

/// Mixes the run seed with the pixel index (splitmix64 finalizer).
std::uint64_t pixel_seed(std::uint64_t run_seed, std::size_t pixel);

struct PixelOutcome {
  SolverResult result;
  bool failed = false;
  std::string error;
};

struct CubeRecoveryStats {
  std::size_t pixels = 0;
  std::size_t converged = 0;
  std::size_t failed = 0;
  long total_iterations = 0;
  double recovery_time_s = 0.0;  ///< sum of per-pixel solver wall-clock

  double convergence_pct() const;
  double mean_iterations() const;
};

struct CubeRecovery {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<PixelOutcome> pixels;  ///< indexed like HsiCube::pixel_index
  CubeRecoveryStats stats;
};

/// Solves every pixel independently against one shared dictionary. `jobs` = 0
/// picks the hardware concurrency. Numerical failures mark the pixel as
/// failed instead of aborting the cube.
CubeRecovery recover_cube(std::span<const CVector> measurements, std::size_t width, std::size_t height,
                          const Dictionary& a, const SolverConfig& cfg, Algorithm algorithm, unsigned jobs = 0);

}  // namespace hypercs
