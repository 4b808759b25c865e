#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace hypercs {

/// Real-valued hyperspectral cube with X samples, Y lines and N bands.
///
/// Samples are stored as f64 in x-major, band-fastest order: the spectrum of
/// pixel (x, y) is the contiguous slice starting at ((x * Y) + y) * N.
class HsiCube {
 public:
  HsiCube() = default;
  HsiCube(std::size_t width, std::size_t height, std::size_t bands);
  HsiCube(std::size_t width, std::size_t height, std::size_t bands, std::vector<double> samples);

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t bands() const noexcept { return bands_; }
  std::size_t pixel_count() const noexcept { return width_ * height_; }

  std::span<const double> samples() const noexcept { return samples_; }
  std::span<double> samples() noexcept { return samples_; }

  /// Linear pixel index used by the per-pixel pipeline.
  std::size_t pixel_index(std::size_t x, std::size_t y) const noexcept { return x * height_ + y; }

  std::span<const double> pixel(std::size_t index) const;
  std::span<double> pixel(std::size_t index);

  double at(std::size_t x, std::size_t y, std::size_t band) const {
    return samples_[pixel_index(x, y) * bands_ + band];
  }
  double& at(std::size_t x, std::size_t y, std::size_t band) {
    return samples_[pixel_index(x, y) * bands_ + band];
  }

  std::vector<std::string> band_meta;

  friend bool operator==(const HsiCube& a, const HsiCube& b) {
    return a.width_ == b.width_ && a.height_ == b.height_ && a.bands_ == b.bands_ &&
           a.samples_ == b.samples_;
  }

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::size_t bands_ = 0;
  std::vector<double> samples_;
};

/// The N band values of one spatial location.
struct PixelSpectrum {
  std::vector<double> values;
};

enum class CubeKind { kNative, kEnvi };
enum class Interleave { kBsq, kBil, kBip };
enum class ElementType { kF32, kF64, kU16 };
enum class ByteOrder { kLittle, kBig };

struct CubeFormat {
  CubeKind kind = CubeKind::kNative;
  Interleave interleave = Interleave::kBip;
  ElementType element_type = ElementType::kF64;
  ByteOrder byte_order = ByteOrder::kLittle;

  static CubeFormat native() { return {}; }
  static CubeFormat envi() { return {CubeKind::kEnvi, Interleave::kBsq, ElementType::kF32, ByteOrder::kLittle}; }
};

/// Parses "native" or "envi" as used on the command line.
CubeFormat parse_cube_format(const std::string& name);

/// Reads a cube. For ENVI input `path` may name either the .hdr file or the
/// raw payload; the header always wins over the fields of `format`.
HsiCube load_cube(const std::filesystem::path& path, const CubeFormat& format = CubeFormat::native());

/// Writes a cube in the native "HSC1" layout. ENVI output is not supported.
void save_cube(const HsiCube& cube, const std::filesystem::path& path,
               const CubeFormat& format = CubeFormat::native());

/// Cube whose per-pixel inverse-DFT representation has exactly `kappa_true`
/// nonzero coefficients placed conjugate-symmetrically, so every pixel is real.
HsiCube generate_synthetic_cube(std::size_t width, std::size_t height, std::size_t bands,
                                std::size_t kappa_true, std::uint64_t seed);

PixelSpectrum extract_pixel(const HsiCube& cube, std::size_t x, std::size_t y);

}  // namespace hypercs
