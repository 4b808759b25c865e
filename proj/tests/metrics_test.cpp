#include <gtest/gtest.h>

#include "hypercs/error.hpp"
#include "hypercs/metrics.hpp"
#include "hypercs/transform.hpp"
#include "test_support.hpp"

namespace {

using namespace hypercs;
using hypercs::testing::ScratchDir;

HsiCube filled(std::size_t x, std::size_t y, std::size_t n, double value) {
  return HsiCube(x, y, n, std::vector<double>(x * y * n, value));
}

HsiCube random_cube(std::size_t x, std::size_t y, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> value(-1.0, 1.0);
  HsiCube cube(x, y, n);
  for (double& v : cube.samples()) v = value(rng);
  return cube;
}

HsiCube shifted(const HsiCube& cube, double delta) {
  HsiCube out = cube;
  for (double& v : out.samples()) v += delta;
  return out;
}

TEST(Psnr, IdenticalCubesGiveSentinel) {
  const HsiCube cube = random_cube(3, 3, 4, 1);
  for (PeakConvention convention : {PeakConvention::kGlobalMax, PeakConvention::kDynamicRange, PeakConvention::kPerBand}) {
    EXPECT_TRUE(is_identical_psnr(psnr(cube, cube, convention)));
  }
  EXPECT_EQ(format_number(psnr(cube, cube)), "identical");
}

TEST(Psnr, UniformErrorOfTenthGivesTwentyDb) {
  HsiCube reference = filled(2, 2, 5, 0.5);
  reference.at(1, 1, 3) = -1.0;  // peak |v| = 1
  EXPECT_NEAR(psnr(reference, shifted(reference, 0.1)), 20.0, 1e-9);
}

TEST(Psnr, ShiftChangesDbByLogRatio) {
  const HsiCube reference = random_cube(4, 4, 8, 2);
  for (auto [a, b] : {std::pair{0.1, 0.01}, std::pair{0.05, 0.2}, std::pair{0.3, 0.003}}) {
    const double diff = psnr(reference, shifted(reference, b)) - psnr(reference, shifted(reference, a));
    EXPECT_NEAR(diff, 20.0 * std::log10(a / b), 1e-9);
  }
}

TEST(Psnr, PeakConventions) {
  HsiCube reference(1, 1, 2, {4.0, -1.0});
  HsiCube recon(1, 1, 2, {3.0, 0.0});
  // MSE = 1.
  EXPECT_NEAR(psnr(reference, recon, PeakConvention::kGlobalMax), 10.0 * std::log10(16.0), 1e-12);
  EXPECT_NEAR(psnr(reference, recon, PeakConvention::kDynamicRange), 10.0 * std::log10(25.0), 1e-12);
  // Band 0: peak 4, MSE 1; band 1: peak 1, MSE 1.
  EXPECT_NEAR(psnr(reference, recon, PeakConvention::kPerBand), 0.5 * 10.0 * std::log10(16.0), 1e-12);
  EXPECT_EQ(parse_peak_convention("per-band"), PeakConvention::kPerBand);
  EXPECT_EQ(peak_convention_name(PeakConvention::kDynamicRange), "dynamic-range");
  EXPECT_THROW(parse_peak_convention("max"), ConfigError);
}

TEST(Psnr, ErrorCases) {
  EXPECT_THROW(psnr(filled(2, 2, 2, 0.0), filled(2, 2, 2, 1.0)), MetricError);
  EXPECT_THROW(psnr(filled(2, 2, 2, 1.0), filled(2, 2, 3, 1.0)), DimensionError);
}

TEST(Psnr, SameInSpectralAndSparseDomains) {
  // Parseval: per-pixel squared errors match in both domains, so PSNR with the
  // same peak agrees.
  const std::size_t n = 16;
  const DftBasis basis = build_dft_basis(static_cast<Index>(n));
  const HsiCube reference = random_cube(3, 2, n, 3);
  const HsiCube recon = shifted(random_cube(3, 2, n, 4), 0.0);
  double sse_sparse = 0.0, peak = 0.0;
  for (std::size_t p = 0; p < reference.pixel_count(); ++p) {
    const CVector d = to_sparse_domain(reference.pixel(p), basis) - to_sparse_domain(recon.pixel(p), basis);
    sse_sparse += d.squaredNorm();
  }
  for (double v : reference.samples()) peak = std::max(peak, std::abs(v));
  const double sparse_db = 10.0 * std::log10(peak * peak / (sse_sparse / static_cast<double>(reference.samples().size())));
  EXPECT_NEAR(psnr(reference, recon), sparse_db, 1e-9);
}

TEST(ConvergenceRatio, Counts) {
  std::vector<SolverResult> results(4);
  EXPECT_EQ(convergence_ratio(results), 0.0);
  results[2].converged = true;
  EXPECT_EQ(convergence_ratio(results), 25.0);
  for (auto& r : results) r.converged = true;
  EXPECT_EQ(convergence_ratio(results), 100.0);
  EXPECT_THROW(convergence_ratio(std::span<const SolverResult>{}), MetricError);
}

TEST(ConvergenceRatio, PermutationInvariantAndIgnoresFailures) {
  std::vector<PixelOutcome> outcomes(10);
  for (std::size_t i = 0; i < outcomes.size(); ++i) outcomes[i].result.converged = i % 3 == 0;
  outcomes[3].failed = true;
  const double base = convergence_ratio(outcomes);
  EXPECT_EQ(base, 30.0);
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    std::shuffle(outcomes.begin(), outcomes.end(), rng);
    EXPECT_EQ(convergence_ratio(outcomes), base);
  }
}

TEST(Summary, ParameterLabels) {
  SolverConfig cfg;
  cfg.kappa = 24;
  cfg.lambda = 100.0;
  EXPECT_EQ(param_label(Algorithm::kGomp, cfg), "κ=24");
  EXPECT_EQ(param_label(Algorithm::kFista, cfg), "λ=100");
  cfg.lambda = 0.001;
  EXPECT_EQ(param_label(Algorithm::kAdmm, cfg), "λ=0.001");
}

TEST(Summary, BuildsRow) {
  SolverConfig cfg;
  cfg.kappa = 24;
  CubeRecoveryStats stats;
  stats.pixels = 4;
  stats.converged = 3;
  stats.total_iterations = 40;
  stats.recovery_time_s = 1.5;
  const SummaryRow row = summarize("synthetic", Algorithm::kGomp, cfg, stats, 51.2);
  EXPECT_EQ(row.dataset, "synthetic");
  EXPECT_EQ(row.param_label, "κ=24");
  EXPECT_EQ(row.param_value(), 24.0);
  EXPECT_EQ(row.total_iterations, 40);
  EXPECT_EQ(row.convergence_pct, 75.0);
  EXPECT_EQ(row.recovery_time_s, 1.5);
  EXPECT_EQ(row.psnr_db, 51.2);
}

TEST(Summary, RejectsImpossibleStats) {
  SolverConfig cfg;
  CubeRecoveryStats stats;
  stats.pixels = 4;
  stats.converged = 4;
  stats.total_iterations = 0;
  EXPECT_THROW(summarize("d", Algorithm::kFista, cfg, stats, 40.0), MetricError);
  stats.total_iterations = 10;
  EXPECT_THROW(summarize("d", Algorithm::kFista, cfg, stats, std::nan("")), MetricError);
  stats.pixels = 0;
  EXPECT_THROW(summarize("d", Algorithm::kFista, cfg, stats, 40.0), MetricError);
}

struct Ppm {
  std::size_t width = 0, height = 0;
  std::vector<unsigned char> rgb;
};

Ppm read_ppm(const std::filesystem::path& path) {
  const std::string bytes = hypercs::testing::read_text(path);
  std::istringstream in(bytes);
  std::string magic;
  int maxval = 0;
  Ppm ppm;
  in >> magic >> ppm.width >> ppm.height >> maxval;
  EXPECT_EQ(magic, "P6");
  EXPECT_EQ(maxval, 255);
  in.get();
  ppm.rgb.resize(ppm.width * ppm.height * 3);
  in.read(reinterpret_cast<char*>(ppm.rgb.data()), static_cast<std::streamsize>(ppm.rgb.size()));
  EXPECT_EQ(static_cast<std::size_t>(in.gcount()), ppm.rgb.size());
  return ppm;
}

TEST(FalseColor, NormalizesEachBand) {
  ScratchDir dir("ppm_norm");
  HsiCube cube(2, 1, 3);
  cube.at(0, 0, 0) = 10.0;
  cube.at(1, 0, 0) = 20.0;
  cube.at(0, 0, 1) = -1.0;
  cube.at(1, 0, 1) = -3.0;
  cube.at(0, 0, 2) = 5.0;
  cube.at(1, 0, 2) = 5.0;
  export_false_color(cube, {0, 1, 2}, dir / "c.ppm");
  const Ppm ppm = read_ppm(dir / "c.ppm");
  ASSERT_EQ(ppm.width, 2u);
  ASSERT_EQ(ppm.height, 1u);
  EXPECT_EQ(ppm.rgb, (std::vector<unsigned char>{0, 255, 0, 255, 0, 0}));
}

TEST(FalseColor, FlatCubeMapsToZero) {
  ScratchDir dir("ppm_flat");
  export_false_color(filled(3, 2, 4, 7.0), {0, 1, 3}, dir / "c.ppm");
  const Ppm ppm = read_ppm(dir / "c.ppm");
  EXPECT_EQ(ppm.rgb, std::vector<unsigned char>(18, 0));
}

TEST(FalseColor, JasperBandsOnFullCube) {
  ScratchDir dir("ppm_bands");
  const HsiCube cube = random_cube(5, 4, 198, 6);
  export_false_color(cube, {46, 108, 164}, dir / "c.ppm");
  const Ppm ppm = read_ppm(dir / "c.ppm");
  EXPECT_EQ(ppm.width, 5u);
  EXPECT_EQ(ppm.height, 4u);
  EXPECT_THROW(export_false_color(cube, {46, 108, 500}, dir / "bad.ppm"), RangeError);
  EXPECT_THROW(export_false_color(cube, {1, 2, 3}, "/nonexistent/dir/c.ppm"), IoError);
}

std::vector<SummaryRow> sample_rows() {
  return {
      {"salinas", Algorithm::kGomp, "κ=33", 56.24, 120, 100.0, 12.5},
      {"jasper", Algorithm::kFista, "λ=100", 52.89, 3655, 99.97, 1197.2},
      {"jasper", Algorithm::kFista, "λ=0.1", 46.97, 64504, 94.89, 8351.0},
      {"jasper", Algorithm::kCosamp, "κ=24", std::numeric_limits<double>::infinity(), 156, 99.08, 253.5},
  };
}

TEST(Report, EmptyRowsGiveHeaderOnly) {
  ScratchDir dir("report_empty");
  write_report({}, dir / "r.csv");
  EXPECT_EQ(hypercs::testing::read_text(dir / "r.csv"), std::string(kReportHeader) + "\n");
}

TEST(Report, SortedByDatasetAlgorithmParameter) {
  const std::string text = format_report(sample_rows());
  EXPECT_EQ(text, std::string(kReportHeader) + "\n" +
                      "jasper,FISTA,λ=0.1,46.97,64504,94.89,8351\n"
                      "jasper,FISTA,λ=100,52.89,3655,99.97,1197.2\n"
                      "jasper,CoSaMP,κ=24,identical,156,99.08,253.5\n"
                      "salinas,gOMP,κ=33,56.24,120,100,12.5\n");
}

TEST(Report, TwoRowsGiveThreeLines) {
  auto rows = sample_rows();
  rows.resize(2);
  const std::string text = format_report(rows);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 3);
}

TEST(Report, RoundTripsThroughParser) {
  ScratchDir dir("report_roundtrip");
  auto rows = sample_rows();
  write_report(rows, dir / "r.csv", true);
  const std::string text = hypercs::testing::read_text(dir / "r.csv");
  EXPECT_EQ(text.front(), '#');
  auto parsed = read_report(dir / "r.csv");
  std::sort(rows.begin(), rows.end(), [](const SummaryRow& a, const SummaryRow& b) {
    return std::make_tuple(a.dataset, static_cast<int>(a.algorithm), a.param_value()) <
           std::make_tuple(b.dataset, static_cast<int>(b.algorithm), b.param_value());
  });
  EXPECT_EQ(parsed, rows);
}

TEST(Report, ByteStable) {
  ScratchDir dir("report_stable");
  write_report(sample_rows(), dir / "a.csv");
  auto reversed = sample_rows();
  std::reverse(reversed.begin(), reversed.end());
  write_report(reversed, dir / "b.csv");
  EXPECT_EQ(hypercs::testing::read_text(dir / "a.csv"), hypercs::testing::read_text(dir / "b.csv"));
}

TEST(Report, ParserRejectsMalformedInput) {
  EXPECT_THROW(parse_report("a,b\n"), FormatError);
  EXPECT_THROW(parse_report(std::string(kReportHeader) + "\njasper,FISTA,λ=1,x,1,1,1\n"), FormatError);
  EXPECT_THROW(parse_report(""), FormatError);
}

TEST(FormatNumber, ShortestRoundTrip) {
  EXPECT_EQ(format_number(100.0), "100");
  EXPECT_EQ(format_number(0.001), "0.001");
  EXPECT_EQ(format_number(52.89), "52.89");
}

}  // namespace
