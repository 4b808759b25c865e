#include "hypercs/pipeline.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <iterator>
#include <map>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "hypercs/error.hpp"

namespace hypercs {

namespace fs = std::filesystem;

namespace {

constexpr char kMeasurementMagic[4] = {'H', 'S', 'M', '1'};

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return {};
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

double to_double(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (trim(value.substr(pos)).empty()) return v;
  } catch (const std::logic_error&) {
  }
  throw ConfigError("'" + key + "' expects a number, got '" + value + "'");
}

long to_long(const std::string& key, const std::string& value) {
  const double v = to_double(key, value);
  if (v != std::floor(v)) throw ConfigError("'" + key + "' expects an integer, got '" + value + "'");
  return static_cast<long>(v);
}

void apply_solver_key(SolverConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "lambda") cfg.lambda = to_double(key, value);
  else if (key == "kappa") cfg.kappa = to_long(key, value);
  else if (key == "G") cfg.G = to_long(key, value);
  else if (key == "mu") cfg.mu = to_double(key, value);
  else if (key == "alpha") cfg.alpha = to_double(key, value);
  else if (key == "epsilon") cfg.epsilon = to_double(key, value);
  else if (key == "t_conv" || key == "t-conv") cfg.t_conv = to_double(key, value);
  else if (key == "max_iter" || key == "max-iter") cfg.max_iter = to_long(key, value);
  else throw ConfigError("unknown solver key '" + key + "'");
}

bool is_solver_key(const std::string& key) {
  static const char* keys[] = {"lambda", "kappa", "G", "mu", "alpha", "epsilon", "t_conv", "t-conv", "max_iter",
                               "max-iter"};
  return std::any_of(std::begin(keys), std::end(keys), [&](const char* k) { return key == k; });
}

SyntheticSpec parse_synthetic_dims(const std::string& value, SyntheticSpec spec) {
  std::size_t w = 0, h = 0, n = 0;
  char x1 = 0, x2 = 0;
  std::istringstream in(value);
  if (!(in >> w >> x1 >> h >> x2 >> n) || x1 != 'x' || x2 != 'x' || w == 0 || h == 0 || n == 0) {
    throw ConfigError("synthetic dimensions must look like 16x16x64, got '" + value + "'");
  }
  spec.width = w;
  spec.height = h;
  spec.bands = n;
  return spec;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  out.close();
  if (!out) throw IoError("write failed for " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

std::uint32_t get_u32(const unsigned char* p) {
  return std::uint32_t{p[0]} | std::uint32_t{p[1]} << 8 | std::uint32_t{p[2]} << 16 | std::uint32_t{p[3]} << 24;
}

void put_f64(std::vector<unsigned char>& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<unsigned char>(bits >> (8 * i)));
}

double get_f64(const unsigned char* p) {
  std::uint64_t bits = 0;
  for (int i = 7; i >= 0; --i) bits = bits << 8 | p[i];
  return std::bit_cast<double>(bits);
}

// One line per stage on stderr; HYPERCS_QUIET silences it.
void log_stage(const std::string& line) {
  if (const char* quiet = std::getenv("HYPERCS_QUIET"); quiet && *quiet) return;
  std::clog << "[hypercs] " << line << std::endl;
}

}  // namespace

std::string AlgorithmRun::tag() const {
  if (is_greedy(algorithm)) return std::string(algorithm_name(algorithm)) + "_k" + std::to_string(cfg.kappa);
  return std::string(algorithm_name(algorithm)) + "_l" + format_number(cfg.lambda);
}

void RunConfig::validate() const {
  if (!(ratio > 0.0 && ratio <= 1.0)) throw ConfigError("ratio must lie in (0, 1]");
  if (!(T >= 0.0)) throw ConfigError("T must be >= 0");
  if (input.empty() && !synthetic) throw ConfigError("no input cube (use --input or --synthetic)");
  for (const auto& run : runs) run.cfg.validate();
}

std::string RunConfig::dataset_name() const {
  if (!dataset.empty()) return dataset;
  if (synthetic) return "synthetic";
  return input.stem().string();
}

unsigned RunConfig::worker_count() const {
  if (jobs > 0) return jobs;
  if (const char* env = std::getenv("HYPERCS_JOBS"); env && *env) {
    const long value = to_long("HYPERCS_JOBS", env);
    if (value < 0) throw ConfigError("HYPERCS_JOBS must be >= 0");
    if (value > 0) return static_cast<unsigned>(value);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<double> parse_number_list(const std::string& text) {
  std::vector<double> values;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) values.push_back(to_double("list", item));
  }
  if (values.empty()) throw ConfigError("empty number list '" + text + "'");
  return values;
}

RunConfig parse_run_config(const std::string& text) {
  RunConfig cfg;
  SolverConfig defaults;
  std::vector<std::pair<std::string, std::map<std::string, std::string>>> sections;
  bool in_section = false;

  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("line " + std::to_string(line_no) + ": unterminated section");
      sections.emplace_back(trim(line.substr(1, line.size() - 2)), std::map<std::string, std::string>{});
      in_section = true;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (in_section) {
      sections.back().second[key] = value;
      continue;
    }
    if (key == "input") cfg.input = value;
    else if (key == "format") cfg.format = parse_cube_format(value);
    else if (key == "dataset") cfg.dataset = value;
    else if (key == "T") cfg.T = to_double(key, value);
    else if (key == "ratio") cfg.ratio = to_double(key, value);
    else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(to_long(key, value));
    else if (key == "out") cfg.out = value;
    else if (key == "jobs") cfg.jobs = static_cast<unsigned>(to_long(key, value));
    else if (key == "peak") cfg.peak = parse_peak_convention(value);
    else if (key == "synthetic") cfg.synthetic = parse_synthetic_dims(value, cfg.synthetic.value_or(SyntheticSpec{}));
    else if (key == "synthetic_kappa") {
      cfg.synthetic = cfg.synthetic.value_or(SyntheticSpec{});
      cfg.synthetic->kappa = static_cast<std::size_t>(to_long(key, value));
    } else if (key == "synthetic_seed") {
      cfg.synthetic = cfg.synthetic.value_or(SyntheticSpec{});
      cfg.synthetic->seed = static_cast<std::uint64_t>(to_long(key, value));
    } else if (key == "export_bands") {
      const auto bands = parse_number_list(value);
      if (bands.size() != 3) throw ConfigError("export_bands needs exactly three band indices");
      cfg.export_bands = std::array<std::size_t, 3>{static_cast<std::size_t>(bands[0]),
                                                    static_cast<std::size_t>(bands[1]),
                                                    static_cast<std::size_t>(bands[2])};
    } else if (is_solver_key(key)) apply_solver_key(defaults, key, value);
    else throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
  }

  for (const auto& [name, keys] : sections) {
    const Algorithm algorithm = parse_algorithm(name);
    const std::string sweep_key = is_greedy(algorithm) ? "kappa" : "lambda";
    SolverConfig base = defaults;
    for (const auto& [key, value] : keys) {
      if (key != sweep_key) apply_solver_key(base, key, value);
    }
    std::vector<std::string> sweep_values;
    if (const auto it = keys.find(sweep_key); it != keys.end()) {
      for (double v : parse_number_list(it->second)) sweep_values.push_back(format_number(v));
    }
    if (sweep_values.empty()) {
      cfg.runs.push_back({algorithm, base});
      continue;
    }
    for (const auto& v : sweep_values) {
      AlgorithmRun run{algorithm, base};
      apply_solver_key(run.cfg, sweep_key, v);
      cfg.runs.push_back(run);
    }
  }
  return cfg;
}

RunConfig load_run_config(const fs::path& path) { return parse_run_config(read_text(path)); }

std::pair<HsiCube, CubeSparsifyStats> sparsify_cube(const HsiCube& cube, double T, PeakConvention peak) {
  const DftBasis basis = build_dft_basis(static_cast<Index>(cube.bands()));
  HsiCube out(cube.width(), cube.height(), cube.bands());
  out.band_meta = cube.band_meta;
  CubeSparsifyStats stats;
  stats.T = T;
  stats.pixels = cube.pixel_count();
  double zeroed = 0.0;
  for (std::size_t p = 0; p < cube.pixel_count(); ++p) {
    const CVector x = to_sparse_domain(cube.pixel(p), basis);
    const auto [kept, pixel_stats] = sparsify(x, T);
    zeroed += pixel_stats.zero_fraction;
    stats.mean_mu_x += pixel_stats.mu_x;
    stats.mean_sigma_x += pixel_stats.sigma_x;
    const auto f = from_sparse_domain(kept, basis);
    std::copy(f.pixel.values.begin(), f.pixel.values.end(), out.pixel(p).begin());
  }
  const double pixels = static_cast<double>(cube.pixel_count());
  stats.zero_fraction = zeroed / pixels;
  stats.mean_mu_x /= pixels;
  stats.mean_sigma_x /= pixels;
  stats.psnr_vs_original_db = psnr(cube, out, peak);
  return {std::move(out), stats};
}

MeasurementSet compress_cube(const HsiCube& cube, const SelectionMask& mask) {
  MeasurementSet set{cube.width(), cube.height(), mask, {}};
  set.y.reserve(cube.pixel_count());
  for (std::size_t p = 0; p < cube.pixel_count(); ++p) set.y.push_back(measure(cube.pixel(p), mask));
  return set;
}

void save_measurements(const MeasurementSet& set, const fs::path& payload, const fs::path& mask_record) {
  std::vector<unsigned char> bytes(std::begin(kMeasurementMagic), std::end(kMeasurementMagic));
  put_u32(bytes, static_cast<std::uint32_t>(set.width));
  put_u32(bytes, static_cast<std::uint32_t>(set.height));
  put_u32(bytes, static_cast<std::uint32_t>(set.mask.n));
  put_u32(bytes, static_cast<std::uint32_t>(set.mask.m()));
  for (const auto& y : set.y) {
    for (Index j = 0; j < y.size(); ++j) {
      put_f64(bytes, y(j).real());
      put_f64(bytes, y(j).imag());
    }
  }
  std::ofstream out(payload, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + payload.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  out.close();
  if (!out) throw IoError("write failed for " + payload.string());
  write_text(mask_record, serialize_mask(set.mask));
}

MeasurementSet load_measurements(const fs::path& payload, const fs::path& mask_record) {
  if (!fs::exists(mask_record)) throw ConfigError("missing mask record " + mask_record.string() + " (run compress)");
  if (!fs::exists(payload)) throw ConfigError("missing measurements " + payload.string() + " (run compress)");
  MeasurementSet set;
  set.mask = parse_mask(read_text(mask_record));

  std::ifstream in(payload, std::ios::binary);
  if (!in) throw IoError("cannot open " + payload.string());
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < 20 || std::memcmp(bytes.data(), kMeasurementMagic, 4) != 0) {
    throw FormatError("missing HSM1 header in " + payload.string());
  }
  set.width = get_u32(bytes.data() + 4);
  set.height = get_u32(bytes.data() + 8);
  const Index n = get_u32(bytes.data() + 12);
  const Index m = get_u32(bytes.data() + 16);
  if (n != set.mask.n || m != set.mask.m()) throw FormatError("measurement file does not match the mask record");
  const std::size_t pixels = set.width * set.height;
  if (bytes.size() != 20 + pixels * static_cast<std::size_t>(m) * 16) {
    throw FormatError("size mismatch in " + payload.string());
  }
  const unsigned char* p = bytes.data() + 20;
  set.y.resize(pixels);
  for (auto& y : set.y) {
    y.resize(m);
    for (Index j = 0; j < m; ++j, p += 16) y(j) = Complex(get_f64(p), get_f64(p + 8));
  }
  return set;
}

RecoveryOutput recover_measurements(const MeasurementSet& set, const AlgorithmRun& run, unsigned jobs) {
  const DftBasis basis = build_dft_basis(set.mask.n);
  const Dictionary dict = build_dictionary(basis, set.mask);
  RecoveryOutput out{HsiCube(set.width, set.height, static_cast<std::size_t>(set.mask.n)),
                     recover_cube(set.y, set.width, set.height, dict, run.cfg, run.algorithm, jobs)};
  for (std::size_t p = 0; p < out.recovery.pixels.size(); ++p) {
    const auto f = from_sparse_domain(out.recovery.pixels[p].result.x, basis);
    std::copy(f.pixel.values.begin(), f.pixel.values.end(), out.recovered.pixel(p).begin());
  }
  return out;
}

HsiCube load_input(const RunConfig& cfg) {
  if (cfg.synthetic) {
    const auto& s = *cfg.synthetic;
    return generate_synthetic_cube(s.width, s.height, s.bands, s.kappa, s.seed);
  }
  return load_cube(cfg.input, cfg.format);
}

namespace {

void write_sparsify_stats(const CubeSparsifyStats& stats, PeakConvention peak, const fs::path& path) {
  nlohmann::ordered_json j;
  j["T"] = stats.T;
  j["zero_fraction"] = stats.zero_fraction;
  j["mean_mu_x"] = stats.mean_mu_x;
  j["mean_sigma_x"] = stats.mean_sigma_x;
  if (is_identical_psnr(stats.psnr_vs_original_db)) j["psnr_vs_original_db"] = "identical";
  else j["psnr_vs_original_db"] = stats.psnr_vs_original_db;
  j["psnr_peak"] = peak_convention_name(peak);
  j["pixels"] = stats.pixels;
  write_text(path, j.dump(2) + "\n");
}

}  // namespace

CubeSparsifyStats cmd_sparsify(const RunConfig& cfg) {
  const StagePaths paths{cfg.out};
  fs::create_directories(paths.root);
  const HsiCube cube = load_input(cfg);
  auto [sparse, stats] = sparsify_cube(cube, cfg.T, cfg.peak);
  save_cube(sparse, paths.sparsified());
  write_sparsify_stats(stats, cfg.peak, paths.sparsify_stats());
  log_stage("sparsify: T=" + format_number(cfg.T) + " zeroed " + format_number(100.0 * stats.zero_fraction) +
                     "% PSNR " + format_number(stats.psnr_vs_original_db) + " dB");
  return stats;
}

MeasurementSet cmd_compress(const RunConfig& cfg) {
  if (!(cfg.ratio > 0.0 && cfg.ratio <= 1.0)) throw ConfigError("ratio must lie in (0, 1]");
  const StagePaths paths{cfg.out};
  if (!fs::exists(paths.sparsified())) throw ConfigError("missing " + paths.sparsified().string() + " (run sparsify)");
  const HsiCube cube = load_cube(paths.sparsified());
  const SelectionMask mask = build_selection_mask(static_cast<Index>(cube.bands()), cfg.ratio, cfg.seed);
  MeasurementSet set = compress_cube(cube, mask);
  save_measurements(set, paths.measurements(), paths.mask());
  log_stage("compress: M=" + std::to_string(mask.m()) + " of N=" + std::to_string(mask.n));
  return set;
}

void write_pixel_log(const CubeRecovery& recovery, const fs::path& path) {
  std::ostringstream out;
  out << "# elapsed_s is wall-clock and non-deterministic\n";
  out << "pixel,x,y,iterations,converged,stop,elapsed_s,final_delta,failed\n";
  for (std::size_t p = 0; p < recovery.pixels.size(); ++p) {
    const auto& o = recovery.pixels[p];
    out << p << ',' << p / recovery.height << ',' << p % recovery.height << ',' << o.result.iterations << ','
        << (o.result.converged ? 1 : 0) << ',' << (o.failed ? "failed" : stop_name(o.result.reason)) << ','
        << format_number(o.result.elapsed_s) << ',' << format_number(o.result.final_delta) << ','
        << (o.failed ? 1 : 0) << "\n";
  }
  write_text(path, out.str());
}

CubeRecovery cmd_recover(const RunConfig& cfg, const AlgorithmRun& run) {
  run.cfg.validate();
  const StagePaths paths{cfg.out};
  const MeasurementSet set = load_measurements(paths.measurements(), paths.mask());
  auto output = recover_measurements(set, run, cfg.worker_count());
  save_cube(output.recovered, paths.recovered(run));
  write_pixel_log(output.recovery, paths.pixel_log(run));
  const auto& s = output.recovery.stats;
  log_stage("recover " + run.tag() + ": " + format_number(s.convergence_pct()) + "% converged, " +
                     std::to_string(s.total_iterations) + " iterations, " + std::to_string(s.failed) + " failed");
  return std::move(output.recovery);
}

std::vector<SummaryRow> cmd_bench(const RunConfig& cfg, std::size_t* failed_pixels) {
  cfg.validate();
  if (cfg.runs.empty()) throw ConfigError("bench needs at least one algorithm");
  const StagePaths paths{cfg.out};
  fs::create_directories(paths.root);

  const HsiCube original = load_input(cfg);
  if (cfg.export_bands) {
    for (std::size_t b : *cfg.export_bands) {
      if (b >= original.bands()) throw RangeError("export band " + std::to_string(b) + " out of range");
    }
  }
  cmd_sparsify(cfg);
  cmd_compress(cfg);
  const HsiCube sparsified = load_cube(paths.sparsified());
  if (cfg.export_bands) {
    export_false_color(original, *cfg.export_bands, paths.image("original"));
    export_false_color(sparsified, *cfg.export_bands, paths.image("sparsified"));
  }

  std::vector<SummaryRow> rows;
  for (const auto& run : cfg.runs) {
    const CubeRecovery recovery = cmd_recover(cfg, run);
    if (failed_pixels) *failed_pixels += recovery.stats.failed;
    const HsiCube recovered = load_cube(paths.recovered(run));
    const double db = psnr(sparsified, recovered, cfg.peak);
    rows.push_back(summarize(cfg.dataset_name(), run.algorithm, run.cfg, recovery.stats, db));
    if (cfg.export_bands) export_false_color(recovered, *cfg.export_bands, paths.image("recovered_" + run.tag()));
  }
  write_report(rows, paths.report(), true);
  log_stage("bench: wrote " + paths.report().string());
  return rows;
}

std::string cmd_report(const fs::path& report_csv) {
  auto rows = read_report(report_csv);
  // Reuse the report ordering.
  rows = parse_report(format_report(std::move(rows)));
  std::ostringstream out;
  out << std::left << std::setw(14) << "dataset" << std::setw(8) << "algo" << std::setw(12) << "param" << std::right
      << std::setw(12) << "PSNR[dB]" << std::setw(14) << "iterations" << std::setw(12) << "conv[%]"
      << std::setw(14) << "time[s]" << "\n";
  for (const auto& row : rows) {
    std::ostringstream psnr_text;
    if (is_identical_psnr(row.psnr_db)) psnr_text << "identical";
    else psnr_text << std::fixed << std::setprecision(2) << row.psnr_db;
    // param labels carry a two-byte UTF-8 symbol; pad by display width.
    const std::string param = row.param_label + std::string(1, ' ');
    out << std::left << std::setw(14) << row.dataset << std::setw(8) << algorithm_label(row.algorithm)
        << std::setw(13) << param << std::right << std::setw(12) << psnr_text.str() << std::setw(14)
        << row.total_iterations << std::setw(12) << std::fixed << std::setprecision(2) << row.convergence_pct
        << std::setw(14) << std::setprecision(3) << row.recovery_time_s << "\n";
    out.unsetf(std::ios::fixed);
  }
  return out.str();
}

}  // namespace hypercs
