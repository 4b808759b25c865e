#include "hypercs/solvers.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "hypercs/error.hpp"

namespace hypercs {

namespace {

using Clock = std::chrono::steady_clock;

/// Tracks iterations and wall-clock for one solver run.
class StopController {
 public:
  explicit StopController(const SolverConfig& cfg) : cfg_(cfg), start_(Clock::now()) {}

  StopDecision check(double delta, long iterations) const { return stop_check(delta, iterations, elapsed(), cfg_); }

  double elapsed() const { return std::chrono::duration<double>(Clock::now() - start_).count(); }

 private:
  const SolverConfig& cfg_;
  Clock::time_point start_;
};

void require_finite(const CVector& v, const char* what, long iteration) {
  if (!v.allFinite()) throw NumericalError(std::string("non-finite ") + what, iteration);
}

void require_measurements(const CVector& y, const Dictionary& a) {
  if (y.size() != a.rows()) {
    throw DimensionError("measurement length " + std::to_string(y.size()) + " does not match dictionary rows " +
                         std::to_string(a.rows()));
  }
}

SolverResult finish(CVector x, long iterations, double delta, StopDecision reason, const StopController& clock) {
  SolverResult result;
  result.x = std::move(x);
  result.iterations = iterations;
  result.final_delta = delta;
  result.reason = reason;
  result.converged = reason == StopDecision::kConverged;
  result.elapsed_s = clock.elapsed();
  return result;
}

}  // namespace

std::string_view algorithm_name(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::kFista: return "fista";
    case Algorithm::kAdmm: return "admm";
    case Algorithm::kGomp: return "gomp";
    case Algorithm::kBiht: return "biht";
    case Algorithm::kCosamp: return "cosamp";
  }
  return "?";
}

std::string_view algorithm_label(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::kFista: return "FISTA";
    case Algorithm::kAdmm: return "ADMM";
    case Algorithm::kGomp: return "gOMP";
    case Algorithm::kBiht: return "BIHT";
    case Algorithm::kCosamp: return "CoSaMP";
  }
  return "?";
}

Algorithm parse_algorithm(std::string_view name) {
  std::string key(name);
  std::transform(key.begin(), key.end(), key.begin(), [](unsigned char c) { return std::tolower(c); });
  for (Algorithm algorithm : kAllAlgorithms) {
    if (algorithm_name(algorithm) == key) return algorithm;
  }
  throw ConfigError("unknown algorithm '" + std::string(name) + "'");
}

bool is_greedy(Algorithm algorithm) { return algorithm != Algorithm::kFista && algorithm != Algorithm::kAdmm; }

Index SolverConfig::group_size() const { return G ? *G : std::max<Index>(1, kappa / 5); }

void SolverConfig::validate() const {
  if (!(lambda >= 0.0)) throw ConfigError("lambda must be >= 0");
  if (kappa < 1) throw ConfigError("kappa must be >= 1");
  if (group_size() < 1) throw ConfigError("G must be >= 1");
  if (group_size() > kappa) throw ConfigError("G must not exceed kappa");
  if (!(mu > 0.0)) throw ConfigError("mu must be > 0");
  if (!(alpha > 0.0)) throw ConfigError("alpha must be > 0");
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be > 0");
  if (max_iter < 0) throw ConfigError("max_iter must be >= 0");
}

std::string_view stop_name(StopDecision decision) {
  switch (decision) {
    case StopDecision::kContinue: return "continue";
    case StopDecision::kConverged: return "converged";
    case StopDecision::kTimeout: return "timeout";
    case StopDecision::kIterCap: return "iter_cap";
    case StopDecision::kSupportLimit: return "support_limit";
  }
  return "?";
}

StopDecision stop_check(double delta, long iterations, double elapsed_s, const SolverConfig& cfg) {
  if (delta < cfg.epsilon) return StopDecision::kConverged;
  if (cfg.max_iter > 0 && iterations >= cfg.max_iter) return StopDecision::kIterCap;
  if (cfg.t_conv > 0.0 && elapsed_s >= cfg.t_conv) return StopDecision::kTimeout;
  return StopDecision::kContinue;
}

double lasso_objective(const CVector& x, const CVector& y, const CMatrix& a, double lambda) {
  return 0.5 * (a * x - y).squaredNorm() + lambda * x.cwiseAbs().sum();
}

SolverResult fista(const CVector& y, const Dictionary& a, const SolverConfig& cfg, const IterationObserver& observer) {
  cfg.validate();
  require_measurements(y, a);
  const StopController clock(cfg);
  const CMatrix& A = a.matrix();
  const double step = 1.0 / a.lipschitz();
  const double threshold = cfg.lambda * step;

  CVector x_prev = CVector::Zero(A.cols());
  CVector z = x_prev;
  CVector x;
  CVector r_prev = y;
  double t = 1.0;
  double delta = 1.0;

  for (long it = 1;; ++it) {
    const CVector aux = z - step * (A.adjoint() * (A * z - y));
    x = soft_threshold(aux, threshold);
    const double t_next = (1.0 + std::sqrt(1.0 + 4.0 * t * t)) / 2.0;
    z = x + ((t - 1.0) / t_next) * (x - x_prev);
    const CVector r = y - A * x;
    delta = residual_delta(r, r_prev);
    require_finite(z, "FISTA extrapolation", it);
    require_finite(r, "FISTA residual", it);

    if (observer) observer({.iteration = it, .x = &x, .delta = delta, .momentum = t_next});
    r_prev = r;
    x_prev = x;
    t = t_next;
    if (const auto decision = clock.check(delta, it); decision != StopDecision::kContinue) {
      return finish(std::move(x), it, delta, decision, clock);
    }
  }
}

SolverResult admm(const CVector& y, const Dictionary& a, const SolverConfig& cfg, const IterationObserver& observer) {
  cfg.validate();
  require_measurements(y, a);
  const StopController clock(cfg);
  const CMatrix& A = a.matrix();
  const auto factor = a.admm_factor(cfg.alpha);
  const CVector a_adj_y = A.adjoint() * y;
  // Scaled-dual form: the shrinkage threshold is lambda / alpha, which makes
  // the fixed point the minimizer of the Lasso objective with weight lambda.
  const double threshold = cfg.lambda / cfg.alpha;

  CVector z = CVector::Zero(A.cols());
  CVector w = z;
  CVector r_prev = y;
  double delta = 1.0;

  for (long it = 1;; ++it) {
    const CVector x = factor->solve(a_adj_y + cfg.alpha * (z - w));
    z = soft_threshold(x + w, threshold);
    w += x - z;
    const CVector r = y - A * x;
    delta = residual_delta(r, r_prev);
    require_finite(x, "ADMM x-update", it);
    require_finite(w, "ADMM dual update", it);

    if (observer) observer({.iteration = it, .x = &z, .delta = delta, .primal_gap = (x - z).norm()});
    r_prev = r;
    if (const auto decision = clock.check(delta, it); decision != StopDecision::kContinue) {
      return finish(std::move(z), it, delta, decision, clock);
    }
  }
}

SolverResult gomp(const CVector& y, const Dictionary& a, const SolverConfig& cfg, const IterationObserver& observer) {
  cfg.validate();
  require_measurements(y, a);
  const Index n = a.cols();
  const Index kappa = cfg.kappa;
  const Index group = cfg.group_size();
  if (kappa > a.rows() || kappa > n) throw ConfigError("gOMP needs kappa <= M");
  const StopController clock(cfg);
  const CMatrix& A = a.matrix();

  SupportSet c;
  CVector x = CVector::Zero(n);
  CVector r_prev = y;
  double delta = 1.0;

  for (long it = 1;; ++it) {
    const CVector p = A.adjoint() * r_prev;
    require_finite(p, "gOMP correlation", it);
    const SupportSet theta = argmax_k(p, group);
    SupportSet grown = SupportSet::unite(theta, c);
    if (grown.size() > a.rows()) {
      return finish(std::move(x), it - 1, delta, StopDecision::kSupportLimit, clock);
    }
    c = std::move(grown);

    const CVector s_full = least_squares(gather_columns(A, c), y);
    const CVector x_full = scatter(n, c, s_full);
    const SupportSet q = argmax_k(x_full, kappa);
    const CVector s = least_squares(gather_columns(A, q), y);
    x = scatter(n, q, s);

    const CVector r = y - A * x;
    delta = residual_delta(r, r_prev);
    require_finite(r, "gOMP residual", it);

    if (observer) {
      observer({.iteration = it, .x = &x, .delta = delta, .candidates = theta.size(), .support = c.size()});
    }
    r_prev = r;
    if (const auto decision = clock.check(delta, it); decision != StopDecision::kContinue) {
      return finish(std::move(x), it, delta, decision, clock);
    }
  }
}

SolverResult biht(const CVector& y, const Dictionary& a, const SolverConfig& cfg, const IterationObserver& observer) {
  cfg.validate();
  require_measurements(y, a);
  const Index n = a.cols();
  const Index kappa = cfg.kappa;
  if (kappa > a.rows() || kappa > n) throw ConfigError("BIHT needs kappa <= M");
  const StopController clock(cfg);
  const CMatrix& A = a.matrix();

  CVector x_approx = CVector::Zero(n);
  CVector x = x_approx;
  CVector r_prev = y;
  double delta = 1.0;

  for (long it = 1;; ++it) {
    const CVector u = x_approx + cfg.mu * (A.adjoint() * (y - A * x_approx));
    require_finite(u, "BIHT gradient step", it);
    const SupportSet theta = argmax_k(u, kappa);
    const SupportSet c = SupportSet::unite(theta, nonzero_support(x_approx));
    if (c.size() > a.rows()) {
      return finish(std::move(x), it - 1, delta, StopDecision::kSupportLimit, clock);
    }

    CVector s = least_squares(gather_columns(A, c), y);
    // Keep only the kappa largest entries of s; x_a takes the pruned values.
    const SupportSet h = argmax_k(s, kappa);
    CVector pruned = CVector::Zero(s.size());
    for (Index j : h.indices()) pruned(j) = s(j);
    s = std::move(pruned);
    x_approx = scatter(n, c, s);
    x = x_approx;

    const CVector r = y - A * x;
    delta = residual_delta(r, r_prev);
    require_finite(r, "BIHT residual", it);

    if (observer) {
      observer({.iteration = it, .x = &x, .delta = delta, .candidates = theta.size(), .support = c.size()});
    }
    r_prev = r;
    if (const auto decision = clock.check(delta, it); decision != StopDecision::kContinue) {
      return finish(std::move(x), it, delta, decision, clock);
    }
  }
}

SolverResult cosamp(const CVector& y, const Dictionary& a, const SolverConfig& cfg,
                    const IterationObserver& observer) {
  cfg.validate();
  require_measurements(y, a);
  const Index n = a.cols();
  const Index kappa = cfg.kappa;
  if (2 * kappa > n) throw ConfigError("CoSaMP needs 2 kappa <= N");
  if (kappa > a.rows()) throw ConfigError("CoSaMP needs kappa <= M");
  const StopController clock(cfg);
  const CMatrix& A = a.matrix();

  SupportSet c;
  CVector x = CVector::Zero(n);
  CVector r_prev = y;
  double delta = 1.0;

  for (long it = 1;; ++it) {
    const CVector p = A.adjoint() * r_prev;
    require_finite(p, "CoSaMP correlation", it);
    const SupportSet theta = argmax_k(p, 2 * kappa);
    const SupportSet merged = SupportSet::unite(theta, c);
    if (merged.size() > a.rows()) {
      return finish(std::move(x), it - 1, delta, StopDecision::kSupportLimit, clock);
    }

    const CVector s = least_squares(gather_columns(A, merged), y);
    const SupportSet q = argmax_k(s, kappa);
    std::vector<Index> kept;
    CVector s_kept(q.size());
    for (Index j = 0; j < q.size(); ++j) {
      kept.push_back(merged[q[j]]);
      s_kept(j) = s(q[j]);
    }
    // merged is sorted and q ascending, so kept stays sorted.
    c = SupportSet(std::move(kept));
    x = scatter(n, c, s_kept);

    const CVector r = y - A * x;
    delta = residual_delta(r, r_prev);
    require_finite(r, "CoSaMP residual", it);

    if (observer) {
      observer({.iteration = it, .x = &x, .delta = delta, .candidates = theta.size(), .support = merged.size()});
    }
    r_prev = r;
    if (const auto decision = clock.check(delta, it); decision != StopDecision::kContinue) {
      return finish(std::move(x), it, delta, decision, clock);
    }
  }
}

SolverResult solve(Algorithm algorithm, const CVector& y, const Dictionary& a, const SolverConfig& cfg,
                   const IterationObserver& observer) {
  switch (algorithm) {
    case Algorithm::kFista: return fista(y, a, cfg, observer);
    case Algorithm::kAdmm: return admm(y, a, cfg, observer);
    case Algorithm::kGomp: return gomp(y, a, cfg, observer);
    case Algorithm::kBiht: return biht(y, a, cfg, observer);
    case Algorithm::kCosamp: return cosamp(y, a, cfg, observer);
  }
  throw ConfigError("unknown algorithm");
}

std::uint64_t pixel_seed(std::uint64_t run_seed, std::size_t pixel) {
  std::uint64_t z = run_seed + 0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(pixel) + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double CubeRecoveryStats::convergence_pct() const {
  return pixels == 0 ? 0.0 : 100.0 * static_cast<double>(converged) / static_cast<double>(pixels);
}

double CubeRecoveryStats::mean_iterations() const {
  return pixels == 0 ? 0.0 : static_cast<double>(total_iterations) / static_cast<double>(pixels);
}

CubeRecovery recover_cube(std::span<const CVector> measurements, std::size_t width, std::size_t height,
                          const Dictionary& a, const SolverConfig& cfg, Algorithm algorithm, unsigned jobs) {
  if (measurements.size() != width * height) {
    throw DimensionError("measurement count does not match the " + std::to_string(width) + "x" +
                         std::to_string(height) + " grid");
  }
  cfg.validate();
  if (algorithm == Algorithm::kAdmm) a.admm_factor(cfg.alpha);  // build before the parallel phase

  CubeRecovery out;
  out.width = width;
  out.height = height;
  out.pixels.resize(measurements.size());

  std::atomic<std::size_t> next{0};
  std::mutex abort_mutex;
  std::exception_ptr abort;
  const auto worker = [&] {
    for (std::size_t p = next.fetch_add(1); p < measurements.size(); p = next.fetch_add(1)) {
      SolverConfig pixel_cfg = cfg;
      pixel_cfg.seed = pixel_seed(cfg.seed, p);
      PixelOutcome& slot = out.pixels[p];
      try {
        slot.result = solve(algorithm, measurements[p], a, pixel_cfg);
      } catch (const NumericalError& e) {
        slot.failed = true;
        slot.error = e.what();
        slot.result.x = CVector::Zero(a.cols());
        slot.result.iterations = e.iteration();
      } catch (...) {
        // Configuration and dimension errors apply to every pixel: stop the cube.
        std::lock_guard lock(abort_mutex);
        if (!abort) abort = std::current_exception();
        next.store(measurements.size());
      }
    }
  };

  unsigned workers = jobs == 0 ? std::max(1u, std::thread::hardware_concurrency()) : jobs;
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(1, measurements.size())));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned i = 0; i < workers; ++i) pool.emplace_back(worker);
  }
  if (abort) std::rethrow_exception(abort);

  auto& stats = out.stats;
  stats.pixels = out.pixels.size();
  for (const auto& pixel : out.pixels) {
    stats.total_iterations += pixel.result.iterations;
    stats.recovery_time_s += pixel.result.elapsed_s;
    if (pixel.failed) ++stats.failed;
    else if (pixel.result.converged) ++stats.converged;
  }
  return out;
}

}  // namespace hypercs
