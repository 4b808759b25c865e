#include "hypercs/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <tuple>

#include "hypercs/error.hpp"

namespace hypercs {

namespace {

void require_same_shape(const HsiCube& a, const HsiCube& b) {
  if (a.width() != b.width() || a.height() != b.height() || a.bands() != b.bands()) {
    throw DimensionError("cube dimensions differ");
  }
}

double db(double peak, double mse) { return 10.0 * std::log10(peak * peak / mse); }

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& text) {
  if (text == "identical") return std::numeric_limits<double>::infinity();
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) throw FormatError("bad number '" + text + "' in report");
  return value;
}

}  // namespace

PeakConvention parse_peak_convention(const std::string& name) {
  if (name == "global-max") return PeakConvention::kGlobalMax;
  if (name == "dynamic-range") return PeakConvention::kDynamicRange;
  if (name == "per-band") return PeakConvention::kPerBand;
  throw ConfigError("unknown peak convention '" + name + "' (global-max, dynamic-range, per-band)");
}

std::string_view peak_convention_name(PeakConvention convention) {
  switch (convention) {
    case PeakConvention::kGlobalMax: return "global-max";
    case PeakConvention::kDynamicRange: return "dynamic-range";
    case PeakConvention::kPerBand: return "per-band";
  }
  return "?";
}

double psnr(const HsiCube& reference, const HsiCube& reconstruction, PeakConvention convention) {
  require_same_shape(reference, reconstruction);
  const auto ref = reference.samples();
  const auto rec = reconstruction.samples();
  constexpr double kInf = std::numeric_limits<double>::infinity();

  if (convention == PeakConvention::kPerBand) {
    const std::size_t bands = reference.bands();
    std::vector<double> peak(bands, 0.0), sse(bands, 0.0);
    for (std::size_t i = 0; i < ref.size(); ++i) {
      const std::size_t b = i % bands;
      peak[b] = std::max(peak[b], std::abs(ref[i]));
      sse[b] += (ref[i] - rec[i]) * (ref[i] - rec[i]);
    }
    double sum = 0.0;
    std::size_t counted = 0;
    const double voxels = static_cast<double>(reference.pixel_count());
    for (std::size_t b = 0; b < bands; ++b) {
      if (sse[b] == 0.0) continue;  // identical band contributes no finite term
      if (peak[b] == 0.0) throw MetricError("per-band PSNR undefined: band " + std::to_string(b) + " is all zero");
      sum += db(peak[b], sse[b] / voxels);
      ++counted;
    }
    return counted == 0 ? kInf : sum / static_cast<double>(counted);
  }

  double max_abs = 0.0, lo = kInf, hi = -kInf, sse = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    max_abs = std::max(max_abs, std::abs(ref[i]));
    lo = std::min(lo, ref[i]);
    hi = std::max(hi, ref[i]);
    sse += (ref[i] - rec[i]) * (ref[i] - rec[i]);
  }
  if (max_abs == 0.0) throw MetricError("PSNR undefined for an all-zero reference");
  if (sse == 0.0) return kInf;
  const double peak = convention == PeakConvention::kDynamicRange ? hi - lo : max_abs;
  if (peak == 0.0) throw MetricError("PSNR undefined for a reference with zero dynamic range");
  return db(peak, sse / static_cast<double>(ref.size()));
}

double convergence_ratio(std::span<const SolverResult> results) {
  if (results.empty()) throw MetricError("convergence ratio of an empty collection");
  const auto converged = std::count_if(results.begin(), results.end(), [](const auto& r) { return r.converged; });
  return 100.0 * static_cast<double>(converged) / static_cast<double>(results.size());
}

double convergence_ratio(std::span<const PixelOutcome> outcomes) {
  if (outcomes.empty()) throw MetricError("convergence ratio of an empty collection");
  const auto converged = std::count_if(outcomes.begin(), outcomes.end(),
                                       [](const auto& o) { return !o.failed && o.result.converged; });
  return 100.0 * static_cast<double>(converged) / static_cast<double>(outcomes.size());
}

double SummaryRow::param_value() const {
  const auto eq = param_label.find('=');
  if (eq == std::string::npos) return 0.0;
  return parse_double(param_label.substr(eq + 1));
}

std::string format_number(double value) {
  if (std::isinf(value)) return value > 0 ? "identical" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

std::string param_label(Algorithm algorithm, const SolverConfig& cfg) {
  if (is_greedy(algorithm)) return "κ=" + std::to_string(cfg.kappa);
  return "λ=" + format_number(cfg.lambda);
}

SummaryRow summarize(const std::string& dataset, Algorithm algorithm, const SolverConfig& cfg,
                     const CubeRecoveryStats& stats, double psnr_db) {
  if (stats.pixels == 0) throw MetricError("summary of an empty cube");
  if (stats.converged > stats.pixels) throw MetricError("more converged pixels than pixels");
  if (stats.converged > 0 && stats.total_iterations == 0) {
    throw MetricError("pixels reported converged without any iteration");
  }
  if (std::isnan(psnr_db)) throw MetricError("PSNR is NaN");
  SummaryRow row;
  row.dataset = dataset;
  row.algorithm = algorithm;
  row.param_label = param_label(algorithm, cfg);
  row.psnr_db = psnr_db;
  row.total_iterations = stats.total_iterations;
  row.convergence_pct = stats.convergence_pct();
  row.recovery_time_s = stats.recovery_time_s;
  return row;
}

void export_false_color(const HsiCube& cube, const std::array<std::size_t, 3>& bands,
                        const std::filesystem::path& path) {
  for (std::size_t b : bands) {
    if (b >= cube.bands()) {
      throw RangeError("band " + std::to_string(b) + " out of range for a " + std::to_string(cube.bands()) +
                       "-band cube");
    }
  }
  std::array<double, 3> lo, hi;
  for (std::size_t c = 0; c < 3; ++c) {
    lo[c] = std::numeric_limits<double>::infinity();
    hi[c] = -lo[c];
    for (std::size_t p = 0; p < cube.pixel_count(); ++p) {
      const double v = cube.pixel(p)[bands[c]];
      lo[c] = std::min(lo[c], v);
      hi[c] = std::max(hi[c], v);
    }
  }

  std::ostringstream image(std::ios::binary);
  image << "P6\n" << cube.width() << ' ' << cube.height() << "\n255\n";
  for (std::size_t y = 0; y < cube.height(); ++y) {
    for (std::size_t x = 0; x < cube.width(); ++x) {
      for (std::size_t c = 0; c < 3; ++c) {
        const double range = hi[c] - lo[c];
        const double v = range > 0.0 ? (cube.at(x, y, bands[c]) - lo[c]) / range : 0.0;
        image.put(static_cast<char>(static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0))));
      }
    }
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  const std::string bytes = image.str();
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.close();
  if (!out) throw IoError("write failed for " + path.string());
}

std::string format_report(std::vector<SummaryRow> rows, bool timing_note) {
  std::stable_sort(rows.begin(), rows.end(), [](const SummaryRow& a, const SummaryRow& b) {
    return std::make_tuple(a.dataset, static_cast<int>(a.algorithm), a.param_value()) <
           std::make_tuple(b.dataset, static_cast<int>(b.algorithm), b.param_value());
  });
  std::ostringstream out;
  if (timing_note) out << "# recovery_time_s is wall-clock and non-deterministic\n";
  out << kReportHeader << "\n";
  for (const auto& row : rows) {
    out << row.dataset << ',' << algorithm_label(row.algorithm) << ',' << row.param_label << ','
        << format_number(row.psnr_db) << ',' << row.total_iterations << ',' << format_number(row.convergence_pct)
        << ',' << format_number(row.recovery_time_s) << "\n";
  }
  return out.str();
}

void write_report(std::vector<SummaryRow> rows, const std::filesystem::path& path, bool timing_note) {
  const std::string text = format_report(std::move(rows), timing_note);
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  out.close();
  if (!out) throw IoError("write failed for " + path.string());
}

std::vector<SummaryRow> parse_report(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  bool header_seen = false;
  std::vector<SummaryRow> rows;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    if (!header_seen) {
      if (line != kReportHeader) throw FormatError("unexpected report header: " + line);
      header_seen = true;
      continue;
    }
    const auto fields = split_csv_line(line);
    if (fields.size() != 7) throw FormatError("report line needs 7 fields: " + line);
    SummaryRow row;
    row.dataset = fields[0];
    row.algorithm = parse_algorithm(fields[1]);
    row.param_label = fields[2];
    row.psnr_db = parse_double(fields[3]);
    row.total_iterations = static_cast<long>(parse_double(fields[4]));
    row.convergence_pct = parse_double(fields[5]);
    row.recovery_time_s = parse_double(fields[6]);
    rows.push_back(std::move(row));
  }
  if (!header_seen) throw FormatError("report has no header");
  return rows;
}

std::vector<SummaryRow> read_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_report(buffer.str());
}

}  // namespace hypercs
