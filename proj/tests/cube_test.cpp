#include <bit>
#include <cstring>
#include <numeric>

#include <gtest/gtest.h>

#include "hypercs/cube.hpp"
#include "hypercs/error.hpp"
#include "hypercs/transform.hpp"
#include "test_support.hpp"

namespace {

using namespace hypercs;
using hypercs::testing::ScratchDir;

HsiCube counting_cube() {
  std::vector<double> samples(12);
  std::iota(samples.begin(), samples.end(), 0.0);
  return HsiCube(2, 2, 3, samples);
}

template <typename T>
void append(std::string& bytes, T value, bool big_endian = false) {
  char raw[sizeof(T)];
  std::memcpy(raw, &value, sizeof(T));
  if (big_endian) std::reverse(raw, raw + sizeof(T));
  bytes.append(raw, sizeof(T));
}

void write_native(const std::filesystem::path& path, std::uint32_t x, std::uint32_t y, std::uint32_t n,
                  const std::vector<double>& values) {
  std::string bytes = "HSC1";
  append(bytes, x);
  append(bytes, y);
  append(bytes, n);
  for (double v : values) append(bytes, v);
  hypercs::testing::write_text(path, bytes);
}

TEST(HsiCube, StoresPixelsXMajorBandFastest) {
  const HsiCube cube = counting_cube();
  EXPECT_EQ(cube.at(0, 0, 0), 0.0);
  EXPECT_EQ(cube.at(0, 1, 0), 3.0);
  EXPECT_EQ(cube.at(1, 0, 2), 8.0);
  EXPECT_EQ(cube.at(1, 1, 2), 11.0);
}

TEST(HsiCube, RejectsSampleCountMismatch) {
  EXPECT_THROW(HsiCube(2, 2, 3, std::vector<double>(10)), DimensionError);
  EXPECT_THROW(HsiCube(0, 2, 3), DimensionError);
}

TEST(LoadCube, ReadsNativeCountingCube) {
  ScratchDir dir("load_native");
  std::vector<double> values(12);
  std::iota(values.begin(), values.end(), 0.0);
  write_native(dir / "c.hsc", 2, 2, 3, values);
  const HsiCube cube = load_cube(dir / "c.hsc");
  ASSERT_EQ(cube.width(), 2u);
  ASSERT_EQ(cube.height(), 2u);
  ASSERT_EQ(cube.bands(), 3u);
  EXPECT_TRUE(std::equal(values.begin(), values.end(), cube.samples().begin()));
}

TEST(LoadCube, ShortPayloadIsSizeMismatch) {
  ScratchDir dir("load_short");
  write_native(dir / "c.hsc", 2, 2, 3, std::vector<double>(10, 1.0));
  EXPECT_THROW(load_cube(dir / "c.hsc"), FormatError);
}

TEST(LoadCube, MissingFileIsIoError) {
  EXPECT_THROW(load_cube("/nonexistent/cube.hsc"), IoError);
}

TEST(LoadCube, RejectsNonFiniteSamples) {
  ScratchDir dir("load_nan");
  write_native(dir / "c.hsc", 1, 1, 2, {1.0, std::nan("")});
  EXPECT_THROW(load_cube(dir / "c.hsc"), FormatError);
}

TEST(SaveCube, RoundTripsSmallCube) {
  ScratchDir dir("save_small");
  const HsiCube cube = counting_cube();
  save_cube(cube, dir / "c.hsc");
  EXPECT_EQ(load_cube(dir / "c.hsc"), cube);
}

TEST(SaveCube, RoundTripsSyntheticCubeExactly) {
  ScratchDir dir("save_synth");
  const HsiCube cube = generate_synthetic_cube(8, 8, 32, 5, 11);
  save_cube(cube, dir / "c.hsc");
  const HsiCube back = load_cube(dir / "c.hsc");
  ASSERT_EQ(back.samples().size(), cube.samples().size());
  double worst = 0.0;
  for (std::size_t i = 0; i < cube.samples().size(); ++i) {
    worst = std::max(worst, std::abs(back.samples()[i] - cube.samples()[i]));
  }
  EXPECT_EQ(worst, 0.0);
}

TEST(SaveCube, RoundTripsRandomCubes) {
  ScratchDir dir("save_random");
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::size_t> dim(1, 6);
  std::normal_distribution<double> value(0.0, 1e3);
  for (int trial = 0; trial < 20; ++trial) {
    HsiCube cube(dim(rng), dim(rng), dim(rng));
    for (double& v : cube.samples()) v = value(rng);
    save_cube(cube, dir / "c.hsc");
    EXPECT_EQ(load_cube(dir / "c.hsc"), cube);
  }
}

TEST(SaveCube, UnwritableLocationIsIoError) {
  EXPECT_THROW(save_cube(counting_cube(), "/nonexistent/dir/c.hsc"), IoError);
}

TEST(SaveCube, EnviOutputIsRejected) {
  ScratchDir dir("save_envi");
  EXPECT_THROW(save_cube(counting_cube(), dir / "c.img", CubeFormat::envi()), FormatError);
}

class EnviInterleave : public ::testing::TestWithParam<std::string> {};

// Payload in the named interleave whose value encodes (x, y, b) as 100x + 10y + b.
std::string envi_payload(const std::string& interleave, std::size_t xs, std::size_t ys, std::size_t bs) {
  std::string bytes;
  const auto put = [&](std::size_t x, std::size_t y, std::size_t b) {
    append(bytes, static_cast<float>(100 * x + 10 * y + b));
  };
  if (interleave == "bsq") {
    for (std::size_t b = 0; b < bs; ++b)
      for (std::size_t y = 0; y < ys; ++y)
        for (std::size_t x = 0; x < xs; ++x) put(x, y, b);
  } else if (interleave == "bil") {
    for (std::size_t y = 0; y < ys; ++y)
      for (std::size_t b = 0; b < bs; ++b)
        for (std::size_t x = 0; x < xs; ++x) put(x, y, b);
  } else {
    for (std::size_t y = 0; y < ys; ++y)
      for (std::size_t x = 0; x < xs; ++x)
        for (std::size_t b = 0; b < bs; ++b) put(x, y, b);
  }
  return bytes;
}

TEST_P(EnviInterleave, DecodesEveryVoxel) {
  ScratchDir dir("envi_" + GetParam());
  hypercs::testing::write_text(dir / "c.hdr", "ENVI\nsamples = 3\nlines = 2\nbands = 4\nheader offset = 0\n"
                                              "data type = 4\ninterleave = " +
                                                  GetParam() + "\nbyte order = 0\n");
  hypercs::testing::write_text(dir / "c.img", envi_payload(GetParam(), 3, 2, 4));
  const HsiCube cube = load_cube(dir / "c.hdr", CubeFormat::envi());
  ASSERT_EQ(cube.width(), 3u);
  ASSERT_EQ(cube.height(), 2u);
  ASSERT_EQ(cube.bands(), 4u);
  for (std::size_t x = 0; x < 3; ++x)
    for (std::size_t y = 0; y < 2; ++y)
      for (std::size_t b = 0; b < 4; ++b) EXPECT_EQ(cube.at(x, y, b), 100.0 * x + 10.0 * y + b);
}

INSTANTIATE_TEST_SUITE_P(AllInterleaves, EnviInterleave, ::testing::Values("bsq", "bil", "bip"));

TEST(LoadEnvi, BigEndianU16WithOffsetAndBandNames) {
  ScratchDir dir("envi_u16");
  hypercs::testing::write_text(dir / "c.hdr",
                               "ENVI\nsamples = 2\nlines = 1\nbands = 2\nheader offset = 4\ndata type = 12\n"
                               "interleave = bip\nbyte order = 1\nband names = {\n first, second}\n");
  std::string bytes = "skip";
  for (std::uint16_t v : {1, 65535, 300, 7}) append(bytes, v, true);
  hypercs::testing::write_text(dir / "c", bytes);
  const HsiCube cube = load_cube(dir / "c.hdr", CubeFormat::envi());
  EXPECT_EQ(cube.at(0, 0, 0), 1.0);
  EXPECT_EQ(cube.at(0, 0, 1), 65535.0);
  EXPECT_EQ(cube.at(1, 0, 0), 300.0);
  EXPECT_EQ(cube.at(1, 0, 1), 7.0);
  EXPECT_EQ(cube.band_meta, (std::vector<std::string>{"first", "second"}));
}

TEST(LoadEnvi, JasperDimensionsU16Bsq) {
  ScratchDir dir("envi_jasper");
  hypercs::testing::write_text(dir / "jasper.hdr",
                               "ENVI\nsamples = 100\nlines = 100\nbands = 198\ninterleave = bsq\ndata type = 12\n");
  std::string bytes;
  bytes.reserve(100 * 100 * 198 * 2);
  for (std::size_t i = 0; i < 100 * 100 * 198; ++i) append(bytes, static_cast<std::uint16_t>(i % 4096));
  hypercs::testing::write_text(dir / "jasper.img", bytes);
  const HsiCube cube = load_cube(dir / "jasper.img", CubeFormat::envi());
  EXPECT_EQ(cube.width(), 100u);
  EXPECT_EQ(cube.height(), 100u);
  EXPECT_EQ(cube.bands(), 198u);
  // BSQ: voxel (x, y, b) sits at (b * lines + y) * samples + x.
  EXPECT_EQ(cube.at(7, 3, 5), static_cast<double>(((5 * 100 + 3) * 100 + 7) % 4096));
}

TEST(LoadEnvi, SizeMismatchAndBadType) {
  ScratchDir dir("envi_bad");
  hypercs::testing::write_text(dir / "c.hdr", "ENVI\nsamples = 2\nlines = 2\nbands = 3\ndata type = 4\n");
  hypercs::testing::write_text(dir / "c.img", std::string(10 * sizeof(float), '\0'));
  EXPECT_THROW(load_cube(dir / "c.hdr", CubeFormat::envi()), FormatError);
  hypercs::testing::write_text(dir / "c.hdr", "ENVI\nsamples = 2\nlines = 2\nbands = 3\ndata type = 2\n");
  EXPECT_THROW(load_cube(dir / "c.hdr", CubeFormat::envi()), FormatError);
  hypercs::testing::write_text(dir / "c.hdr", "not a header\n");
  EXPECT_THROW(load_cube(dir / "c.hdr", CubeFormat::envi()), FormatError);
}

TEST(SyntheticCube, SingleCoefficientPixel) {
  const HsiCube cube = generate_synthetic_cube(1, 1, 8, 1, 7);
  const CVector x = to_sparse_domain(cube.pixel(0), build_dft_basis(8));
  EXPECT_EQ(hypercs::testing::count_nonzero(x, 1e-9), 1);
}

TEST(SyntheticCube, EveryPixelHasKappaCoefficientsAndIsReal) {
  const DftBasis basis = build_dft_basis(32);
  for (std::size_t kappa : {1u, 2u, 3u, 7u, 32u}) {
    const HsiCube cube = generate_synthetic_cube(3, 4, 32, kappa, 100 + kappa);
    for (std::size_t p = 0; p < cube.pixel_count(); ++p) {
      const CVector x = to_sparse_domain(cube.pixel(p), basis);
      EXPECT_EQ(hypercs::testing::count_nonzero(x, 1e-9), static_cast<Index>(kappa));
      EXPECT_LT(from_sparse_domain(x, basis).max_imag, 1e-10);
      // Magnitudes come from [1, 2].
      for (Index i = 0; i < x.size(); ++i) {
        if (std::abs(x(i)) > 1e-9) {
          EXPECT_GE(std::abs(x(i)), 1.0 - 1e-9);
          EXPECT_LE(std::abs(x(i)), 2.0 + 1e-9);
        }
      }
    }
  }
}

TEST(SyntheticCube, OddBandCount) {
  const DftBasis basis = build_dft_basis(9);
  const HsiCube cube = generate_synthetic_cube(2, 2, 9, 4, 5);
  for (std::size_t p = 0; p < cube.pixel_count(); ++p) {
    EXPECT_EQ(hypercs::testing::count_nonzero(to_sparse_domain(cube.pixel(p), basis), 1e-9), 4);
  }
}

TEST(SyntheticCube, DeterministicPerSeed) {
  EXPECT_EQ(generate_synthetic_cube(4, 4, 16, 3, 7), generate_synthetic_cube(4, 4, 16, 3, 7));
  EXPECT_FALSE(generate_synthetic_cube(4, 4, 16, 3, 7) == generate_synthetic_cube(4, 4, 16, 3, 8));
}

TEST(SyntheticCube, RejectsKappaOutOfRange) {
  EXPECT_THROW(generate_synthetic_cube(1, 1, 8, 0, 1), RangeError);
  EXPECT_THROW(generate_synthetic_cube(1, 1, 8, 9, 1), RangeError);
}

TEST(ExtractPixel, FirstAndLastPixels) {
  const HsiCube cube = counting_cube();
  EXPECT_EQ(extract_pixel(cube, 0, 0).values, (std::vector<double>{0, 1, 2}));
  EXPECT_EQ(extract_pixel(cube, 1, 1).values, (std::vector<double>{9, 10, 11}));
  EXPECT_THROW(extract_pixel(cube, 2, 0), RangeError);
}

TEST(ExtractPixel, ReassemblesCube) {
  const HsiCube cube = generate_synthetic_cube(3, 5, 6, 2, 9);
  HsiCube rebuilt(3, 5, 6);
  for (std::size_t x = 0; x < 3; ++x) {
    for (std::size_t y = 0; y < 5; ++y) {
      const auto spectrum = extract_pixel(cube, x, y);
      ASSERT_EQ(spectrum.values.size(), 6u);
      for (std::size_t b = 0; b < 6; ++b) rebuilt.at(x, y, b) = spectrum.values[b];
    }
  }
  EXPECT_EQ(rebuilt, cube);
}

TEST(CubeFormat, ParsesCommandLineNames) {
  EXPECT_EQ(parse_cube_format("native").kind, CubeKind::kNative);
  EXPECT_EQ(parse_cube_format("envi").kind, CubeKind::kEnvi);
  EXPECT_EQ(parse_cube_format("native-f32").element_type, ElementType::kF32);
  EXPECT_THROW(parse_cube_format("tiff"), ConfigError);
}

}  // namespace
