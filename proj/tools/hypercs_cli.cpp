// hypercs: sparsify -> compress -> recover -> evaluate pipeline for
// hyperspectral cubes.
//
// Exit codes: 0 success, 1 numerical/metric failure, 2 configuration error,
// 3 I/O or format error, 4 some pixels failed numerically.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hypercs/error.hpp"
#include "hypercs/pipeline.hpp"

namespace {

using namespace hypercs;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitPartial = 4;

struct Flags {
  std::string config;
  std::string input;
  std::string format;
  std::string synthetic;
  std::optional<std::size_t> synthetic_kappa;
  std::optional<std::uint64_t> synthetic_seed;
  std::string dataset;
  std::optional<double> T;
  std::optional<double> ratio;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> algos;
  std::string lambda;
  std::string kappa;
  std::optional<long> G;
  std::optional<double> mu;
  std::optional<double> alpha;
  std::optional<double> epsilon;
  std::optional<double> t_conv;
  std::optional<long> max_iter;
  std::optional<unsigned> jobs;
  std::string out;
  std::string export_bands;
  std::string peak;
  std::string reference;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "key = value manifest; flags override it");
  cmd->add_option("--input", f.input, "input cube (or report CSV for 'report')");
  cmd->add_option("--format", f.format, "native | native-f32 | envi");
  cmd->add_option("--synthetic", f.synthetic, "generate a WxHxN synthetic cube instead of --input");
  cmd->add_option("--synthetic-kappa", f.synthetic_kappa, "nonzeros per synthetic pixel");
  cmd->add_option("--synthetic-seed", f.synthetic_seed, "seed of the synthetic cube");
  cmd->add_option("--dataset", f.dataset, "dataset label in the report");
  cmd->add_option("--T", f.T, "sparsification factor");
  cmd->add_option("--ratio", f.ratio, "subsampling ratio in (0, 1]");
  cmd->add_option("--seed", f.seed, "run seed (mask and per-pixel seeds)");
  cmd->add_option("--algo", f.algos, "fista, admm, gomp, biht, cosamp (repeatable or comma list)")->delimiter(',');
  cmd->add_option("--lambda", f.lambda, "Lasso weight(s), comma list");
  cmd->add_option("--kappa", f.kappa, "sparsity level(s), comma list");
  cmd->add_option("--G", f.G, "gOMP atoms per iteration");
  cmd->add_option("--mu", f.mu, "BIHT descent factor");
  cmd->add_option("--alpha", f.alpha, "ADMM penalty");
  cmd->add_option("--epsilon", f.epsilon, "residual-difference tolerance");
  cmd->add_option("--t-conv", f.t_conv, "per-pixel time bound in seconds (0 disables)");
  cmd->add_option("--max-iter", f.max_iter, "per-pixel iteration cap (0 = none)");
  cmd->add_option("--jobs", f.jobs, "worker threads (0 = HYPERCS_JOBS or all cores)");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--export-bands", f.export_bands, "three band indices for false-color images, e.g. 46,108,164");
  cmd->add_option("--peak", f.peak, "PSNR peak: global-max | dynamic-range | per-band");
}

void apply_overrides(SolverConfig& cfg, const Flags& f) {
  if (f.G) cfg.G = *f.G;
  if (f.mu) cfg.mu = *f.mu;
  if (f.alpha) cfg.alpha = *f.alpha;
  if (f.epsilon) cfg.epsilon = *f.epsilon;
  if (f.t_conv) cfg.t_conv = *f.t_conv;
  if (f.max_iter) cfg.max_iter = *f.max_iter;
}

std::vector<AlgorithmRun> expand(Algorithm algorithm, SolverConfig base, const Flags& f) {
  apply_overrides(base, f);
  const std::string& sweep = is_greedy(algorithm) ? f.kappa : f.lambda;
  if (sweep.empty()) return {{algorithm, base}};
  std::vector<AlgorithmRun> runs;
  for (double v : parse_number_list(sweep)) {
    AlgorithmRun run{algorithm, base};
    if (is_greedy(algorithm)) run.cfg.kappa = static_cast<Index>(v);
    else run.cfg.lambda = v;
    runs.push_back(run);
  }
  return runs;
}

RunConfig build_config(const Flags& f) {
  RunConfig cfg = f.config.empty() ? RunConfig{} : load_run_config(f.config);
  if (!f.input.empty()) {
    cfg.input = f.input;
    cfg.synthetic.reset();
  }
  if (!f.format.empty()) cfg.format = parse_cube_format(f.format);
  if (!f.synthetic.empty() || f.synthetic_kappa || f.synthetic_seed) {
    std::string text;
    if (!f.synthetic.empty()) text += "synthetic = " + f.synthetic + "\n";
    if (f.synthetic_kappa) text += "synthetic_kappa = " + std::to_string(*f.synthetic_kappa) + "\n";
    if (f.synthetic_seed) text += "synthetic_seed = " + std::to_string(*f.synthetic_seed) + "\n";
    const RunConfig parsed = parse_run_config(text);
    SyntheticSpec spec = cfg.synthetic.value_or(SyntheticSpec{});
    if (!f.synthetic.empty()) {
      spec.width = parsed.synthetic->width;
      spec.height = parsed.synthetic->height;
      spec.bands = parsed.synthetic->bands;
    }
    if (f.synthetic_kappa) spec.kappa = *f.synthetic_kappa;
    if (f.synthetic_seed) spec.seed = *f.synthetic_seed;
    cfg.synthetic = spec;
  }
  if (!f.dataset.empty()) cfg.dataset = f.dataset;
  if (f.T) cfg.T = *f.T;
  if (f.ratio) cfg.ratio = *f.ratio;
  if (f.seed) cfg.seed = *f.seed;
  if (f.jobs) cfg.jobs = *f.jobs;
  if (!f.out.empty()) cfg.out = f.out;
  if (!f.peak.empty()) cfg.peak = parse_peak_convention(f.peak);
  if (!f.export_bands.empty()) {
    const auto bands = parse_number_list(f.export_bands);
    if (bands.size() != 3) throw ConfigError("--export-bands needs exactly three indices");
    cfg.export_bands = std::array<std::size_t, 3>{static_cast<std::size_t>(bands[0]),
                                                  static_cast<std::size_t>(bands[1]),
                                                  static_cast<std::size_t>(bands[2])};
  }

  std::vector<AlgorithmRun> runs;
  if (!f.algos.empty()) {
    for (const auto& name : f.algos) {
      const Algorithm algorithm = parse_algorithm(name);
      SolverConfig base;
      for (const auto& run : cfg.runs) {
        if (run.algorithm == algorithm) {
          base = run.cfg;
          break;
        }
      }
      for (auto& run : expand(algorithm, base, f)) runs.push_back(run);
    }
  } else {
    for (const auto& run : cfg.runs) {
      // Re-expand only when the flag sweeps the run's own parameter.
      const bool swept = !(is_greedy(run.algorithm) ? f.kappa : f.lambda).empty();
      const bool duplicate = swept && std::any_of(runs.begin(), runs.end(), [&](const AlgorithmRun& r) {
                               return r.algorithm == run.algorithm;
                             });
      if (duplicate) continue;
      for (auto& expanded : expand(run.algorithm, run.cfg, f)) runs.push_back(expanded);
    }
  }
  cfg.runs = std::move(runs);
  return cfg;
}

int run_recover(const RunConfig& cfg) {
  if (cfg.runs.empty()) throw ConfigError("recover needs --algo or an [algorithm] section");
  bool partial = false;
  for (const auto& run : cfg.runs) {
    const auto recovery = cmd_recover(cfg, run);
    partial = partial || recovery.stats.failed > 0;
  }
  return partial ? kExitPartial : kExitOk;
}

int run_report(const Flags& f) {
  if (f.input.empty()) throw ConfigError("report needs --input");
  if (!f.reference.empty()) {
    const CubeFormat format = f.format.empty() ? CubeFormat::native() : parse_cube_format(f.format);
    const auto convention = f.peak.empty() ? PeakConvention::kGlobalMax : parse_peak_convention(f.peak);
    const double db = psnr(load_cube(f.reference, format), load_cube(f.input, format), convention);
    std::cout << "PSNR " << (is_identical_psnr(db) ? std::string("identical") : format_number(db)) << " dB ("
              << peak_convention_name(convention) << ")\n";
    return kExitOk;
  }
  std::cout << cmd_report(f.input);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compressive-sensing reconstruction of hyperspectral cubes"};
  app.require_subcommand(1);
  Flags f;
  auto* sparsify_cmd = app.add_subcommand("sparsify", "threshold every pixel in the inverse-DFT domain");
  auto* compress_cmd = app.add_subcommand("compress", "subsample the sparsified cube with one random mask");
  auto* recover_cmd = app.add_subcommand("recover", "recover every pixel from its measurements");
  auto* bench_cmd = app.add_subcommand("bench", "run the full pipeline and write report.csv");
  auto* report_cmd = app.add_subcommand("report", "print a report CSV or the PSNR between two cubes");
  for (auto* cmd : {sparsify_cmd, compress_cmd, recover_cmd, bench_cmd, report_cmd}) add_common(cmd, f);
  report_cmd->add_option("--reference", f.reference, "reference cube; prints PSNR(reference, input)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (report_cmd->parsed()) return run_report(f);
    const RunConfig cfg = build_config(f);
    if (sparsify_cmd->parsed()) {
      if (cfg.input.empty() && !cfg.synthetic) throw ConfigError("sparsify needs --input or --synthetic");
      cmd_sparsify(cfg);
      return kExitOk;
    }
    if (compress_cmd->parsed()) {
      cmd_compress(cfg);
      return kExitOk;
    }
    if (recover_cmd->parsed()) return run_recover(cfg);
    if (bench_cmd->parsed()) {
      std::size_t failed = 0;
      cmd_bench(cfg, &failed);
      return failed > 0 ? kExitPartial : kExitOk;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const RangeError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const FormatError& e) {
    std::cerr << "format error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}
