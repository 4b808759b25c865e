#include "hypercs/cube.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>

#include "hypercs/error.hpp"
#include "hypercs/transform.hpp"

namespace hypercs {

namespace fs = std::filesystem;

namespace {

constexpr std::array<char, 4> kNativeMagic = {'H', 'S', 'C', '1'};
constexpr std::size_t kNativeHeaderBytes = 16;

std::size_t element_size(ElementType type) {
  switch (type) {
    case ElementType::kF32: return 4;
    case ElementType::kF64: return 8;
    case ElementType::kU16: return 2;
  }
  return 0;
}

template <typename T>
T load_scalar(const unsigned char* bytes, ByteOrder order) {
  std::array<unsigned char, sizeof(T)> buf;
  std::memcpy(buf.data(), bytes, sizeof(T));
  const bool host_little = std::endian::native == std::endian::little;
  if (host_little != (order == ByteOrder::kLittle)) std::reverse(buf.begin(), buf.end());
  T value;
  std::memcpy(&value, buf.data(), sizeof(T));
  return value;
}

template <typename T>
void store_scalar(T value, ByteOrder order, std::vector<unsigned char>& out) {
  std::array<unsigned char, sizeof(T)> buf;
  std::memcpy(buf.data(), &value, sizeof(T));
  const bool host_little = std::endian::native == std::endian::little;
  if (host_little != (order == ByteOrder::kLittle)) std::reverse(buf.begin(), buf.end());
  out.insert(out.end(), buf.begin(), buf.end());
}

double decode(const unsigned char* bytes, ElementType type, ByteOrder order) {
  switch (type) {
    case ElementType::kF32: return load_scalar<float>(bytes, order);
    case ElementType::kF64: return load_scalar<double>(bytes, order);
    case ElementType::kU16: return load_scalar<std::uint16_t>(bytes, order);
  }
  return 0.0;
}

std::vector<unsigned char> read_all(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed for " + path.string());
  return bytes;
}

void check_finite(const HsiCube& cube, const fs::path& path) {
  for (double v : cube.samples()) {
    if (!std::isfinite(v)) throw FormatError("non-finite sample in " + path.string());
  }
}

HsiCube load_native(const fs::path& path, const CubeFormat& format) {
  if (format.element_type == ElementType::kU16) {
    throw FormatError("native cubes hold f32 or f64 samples only");
  }
  const auto bytes = read_all(path);
  if (bytes.size() < kNativeHeaderBytes || !std::equal(kNativeMagic.begin(), kNativeMagic.end(), bytes.begin())) {
    throw FormatError("missing HSC1 header in " + path.string());
  }
  const auto width = load_scalar<std::uint32_t>(bytes.data() + 4, ByteOrder::kLittle);
  const auto height = load_scalar<std::uint32_t>(bytes.data() + 8, ByteOrder::kLittle);
  const auto bands = load_scalar<std::uint32_t>(bytes.data() + 12, ByteOrder::kLittle);
  if (width == 0 || height == 0 || bands == 0) throw FormatError("zero cube dimension in " + path.string());

  const std::size_t count = std::size_t{width} * height * bands;
  const std::size_t esize = element_size(format.element_type);
  if (bytes.size() - kNativeHeaderBytes != count * esize) {
    std::ostringstream msg;
    msg << "size mismatch in " << path.string() << ": header declares " << width << "x" << height << "x"
        << bands << " but payload holds " << (bytes.size() - kNativeHeaderBytes) / esize << " values";
    throw FormatError(msg.str());
  }
  std::vector<double> samples(count);
  const unsigned char* payload = bytes.data() + kNativeHeaderBytes;
  for (std::size_t i = 0; i < count; ++i) {
    samples[i] = decode(payload + i * esize, format.element_type, ByteOrder::kLittle);
  }
  HsiCube cube(width, height, bands, std::move(samples));
  check_finite(cube, path);
  return cube;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return {};
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::map<std::string, std::string> parse_envi_header(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("unreadable ENVI header " + path.string());
  std::string line;
  if (!std::getline(in, line) || trim(line) != "ENVI") {
    throw FormatError("ENVI header must start with 'ENVI': " + path.string());
  }
  std::map<std::string, std::string> fields;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string key = lower(trim(line.substr(0, eq)));
    std::string value = trim(line.substr(eq + 1));
    if (!value.empty() && value.front() == '{') {
      while (value.find('}') == std::string::npos && std::getline(in, line)) value += "\n" + line;
    }
    fields[key] = value;
  }
  return fields;
}

std::size_t header_int(const std::map<std::string, std::string>& fields, const std::string& key,
                       const fs::path& path, std::optional<std::size_t> fallback = std::nullopt) {
  const auto it = fields.find(key);
  if (it == fields.end()) {
    if (fallback) return *fallback;
    throw FormatError("ENVI header " + path.string() + " lacks '" + key + "'");
  }
  try {
    std::size_t pos = 0;
    const long long value = std::stoll(it->second, &pos);
    if (value < 0) throw FormatError("negative '" + key + "' in " + path.string());
    return static_cast<std::size_t>(value);
  } catch (const std::logic_error&) {
    throw FormatError("bad '" + key + "' value in " + path.string());
  }
}

std::vector<std::string> split_brace_list(const std::string& value) {
  std::vector<std::string> out;
  const auto open = value.find('{');
  const auto close = value.rfind('}');
  if (open == std::string::npos || close == std::string::npos || close <= open) return out;
  std::stringstream ss(value.substr(open + 1, close - open - 1));
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

std::pair<fs::path, fs::path> envi_paths(const fs::path& path) {
  if (lower(path.extension().string()) == ".hdr") {
    fs::path stem = path;
    stem.replace_extension();
    if (fs::exists(stem)) return {path, stem};
    for (const char* ext : {".img", ".raw", ".dat", ".bsq", ".bil", ".bip"}) {
      fs::path candidate = stem;
      candidate += ext;
      if (fs::exists(candidate)) return {path, candidate};
    }
    throw IoError("no payload file next to " + path.string());
  }
  fs::path appended = path;
  appended += ".hdr";
  if (fs::exists(appended)) return {appended, path};
  fs::path replaced = path;
  replaced.replace_extension(".hdr");
  if (fs::exists(replaced)) return {replaced, path};
  throw FormatError("unreadable header: no .hdr found for " + path.string());
}

HsiCube load_envi(const fs::path& path) {
  const auto [header_path, data_path] = envi_paths(path);
  const auto fields = parse_envi_header(header_path);
  const std::size_t samples = header_int(fields, "samples", header_path);
  const std::size_t lines = header_int(fields, "lines", header_path);
  const std::size_t bands = header_int(fields, "bands", header_path);
  const std::size_t offset = header_int(fields, "header offset", header_path, 0);
  if (samples == 0 || lines == 0 || bands == 0) throw FormatError("zero cube dimension in " + header_path.string());

  ElementType type;
  switch (header_int(fields, "data type", header_path)) {
    case 4: type = ElementType::kF32; break;
    case 5: type = ElementType::kF64; break;
    case 12: type = ElementType::kU16; break;
    default: throw FormatError("unsupported ENVI data type in " + header_path.string());
  }
  const ByteOrder order = header_int(fields, "byte order", header_path, 0) == 1 ? ByteOrder::kBig : ByteOrder::kLittle;

  Interleave interleave = Interleave::kBsq;
  if (const auto it = fields.find("interleave"); it != fields.end()) {
    const std::string name = lower(trim(it->second));
    if (name == "bsq") interleave = Interleave::kBsq;
    else if (name == "bil") interleave = Interleave::kBil;
    else if (name == "bip") interleave = Interleave::kBip;
    else throw FormatError("unsupported interleave '" + name + "' in " + header_path.string());
  }

  const auto bytes = read_all(data_path);
  const std::size_t count = samples * lines * bands;
  const std::size_t esize = element_size(type);
  if (bytes.size() < offset || bytes.size() - offset != count * esize) {
    std::ostringstream msg;
    msg << "size mismatch: " << header_path.string() << " declares " << samples << "x" << lines << "x" << bands
        << " but " << data_path.string() << " holds " << bytes.size() << " bytes";
    throw FormatError(msg.str());
  }

  HsiCube cube(samples, lines, bands);
  const unsigned char* payload = bytes.data() + offset;
  for (std::size_t y = 0; y < lines; ++y) {
    for (std::size_t x = 0; x < samples; ++x) {
      for (std::size_t b = 0; b < bands; ++b) {
        std::size_t src = 0;
        switch (interleave) {
          case Interleave::kBsq: src = (b * lines + y) * samples + x; break;
          case Interleave::kBil: src = (y * bands + b) * samples + x; break;
          case Interleave::kBip: src = (y * samples + x) * bands + b; break;
        }
        cube.at(x, y, b) = decode(payload + src * esize, type, order);
      }
    }
  }
  if (const auto it = fields.find("band names"); it != fields.end()) cube.band_meta = split_brace_list(it->second);
  check_finite(cube, data_path);
  return cube;
}

}  // namespace

HsiCube::HsiCube(std::size_t width, std::size_t height, std::size_t bands)
    : HsiCube(width, height, bands, std::vector<double>(width * height * bands, 0.0)) {}

HsiCube::HsiCube(std::size_t width, std::size_t height, std::size_t bands, std::vector<double> samples)
    : width_(width), height_(height), bands_(bands), samples_(std::move(samples)) {
  if (width == 0 || height == 0 || bands == 0) throw DimensionError("cube dimensions must be positive");
  if (samples_.size() != width * height * bands) {
    throw DimensionError("sample count " + std::to_string(samples_.size()) + " does not match " +
                         std::to_string(width) + "x" + std::to_string(height) + "x" + std::to_string(bands));
  }
}

std::span<const double> HsiCube::pixel(std::size_t index) const {
  if (index >= pixel_count()) throw RangeError("pixel index out of range");
  return std::span<const double>(samples_).subspan(index * bands_, bands_);
}

std::span<double> HsiCube::pixel(std::size_t index) {
  if (index >= pixel_count()) throw RangeError("pixel index out of range");
  return std::span<double>(samples_).subspan(index * bands_, bands_);
}

CubeFormat parse_cube_format(const std::string& name) {
  const std::string key = lower(name);
  if (key == "native" || key == "hsc") return CubeFormat::native();
  if (key == "envi") return CubeFormat::envi();
  if (key == "native-f32") return {CubeKind::kNative, Interleave::kBip, ElementType::kF32, ByteOrder::kLittle};
  throw ConfigError("unknown cube format '" + name + "'");
}

HsiCube load_cube(const fs::path& path, const CubeFormat& format) {
  if (format.kind == CubeKind::kEnvi) return load_envi(path);
  return load_native(path, format);
}

void save_cube(const HsiCube& cube, const fs::path& path, const CubeFormat& format) {
  if (format.kind != CubeKind::kNative) throw FormatError("only the native cube format can be written");
  if (format.element_type == ElementType::kU16) throw FormatError("native cubes hold f32 or f64 samples only");

  std::vector<unsigned char> bytes(kNativeMagic.begin(), kNativeMagic.end());
  store_scalar(static_cast<std::uint32_t>(cube.width()), ByteOrder::kLittle, bytes);
  store_scalar(static_cast<std::uint32_t>(cube.height()), ByteOrder::kLittle, bytes);
  store_scalar(static_cast<std::uint32_t>(cube.bands()), ByteOrder::kLittle, bytes);
  bytes.reserve(bytes.size() + cube.samples().size() * element_size(format.element_type));
  for (double v : cube.samples()) {
    if (format.element_type == ElementType::kF32) store_scalar(static_cast<float>(v), ByteOrder::kLittle, bytes);
    else store_scalar(v, ByteOrder::kLittle, bytes);
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  out.close();
  if (!out) throw IoError("write failed for " + path.string());
}

HsiCube generate_synthetic_cube(std::size_t width, std::size_t height, std::size_t bands, std::size_t kappa_true,
                                std::uint64_t seed) {
  if (kappa_true < 1 || kappa_true > bands) {
    throw RangeError("kappa_true must lie in [1, " + std::to_string(bands) + "]");
  }
  // Index 0 and, for even N, index N/2 are their own conjugate mirrors and
  // hold a single real coefficient; every other index k pairs with N - k.
  std::vector<std::size_t> self_slots = {0};
  if (bands % 2 == 0 && bands > 1) self_slots.push_back(bands / 2);
  std::vector<std::size_t> pair_slots;
  for (std::size_t k = 1; 2 * k < bands; ++k) pair_slots.push_back(k);

  std::vector<std::size_t> feasible_self_counts;
  for (std::size_t used = 0; used <= self_slots.size(); ++used) {
    if (used <= kappa_true && (kappa_true - used) % 2 == 0 && (kappa_true - used) / 2 <= pair_slots.size()) {
      feasible_self_counts.push_back(used);
    }
  }

  const DftBasis basis = build_dft_basis(bands);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> magnitude(1.0, 2.0);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);

  HsiCube cube(width, height, bands);
  for (std::size_t p = 0; p < cube.pixel_count(); ++p) {
    const std::size_t self_used =
        feasible_self_counts[std::uniform_int_distribution<std::size_t>(0, feasible_self_counts.size() - 1)(rng)];
    std::vector<std::size_t> selves = self_slots;
    std::shuffle(selves.begin(), selves.end(), rng);
    std::vector<std::size_t> pairs = pair_slots;
    std::shuffle(pairs.begin(), pairs.end(), rng);

    CVector x = CVector::Zero(static_cast<Index>(bands));
    for (std::size_t i = 0; i < self_used; ++i) {
      const double sign = std::bernoulli_distribution(0.5)(rng) ? 1.0 : -1.0;
      x(static_cast<Index>(selves[i])) = sign * magnitude(rng);
    }
    for (std::size_t i = 0; i < (kappa_true - self_used) / 2; ++i) {
      const Complex value = std::polar(magnitude(rng), phase(rng));
      x(static_cast<Index>(pairs[i])) = value;
      x(static_cast<Index>(bands - pairs[i])) = std::conj(value);
    }
    const auto spectrum = from_sparse_domain(x, basis);
    std::copy(spectrum.pixel.values.begin(), spectrum.pixel.values.end(), cube.pixel(p).begin());
  }
  return cube;
}

PixelSpectrum extract_pixel(const HsiCube& cube, std::size_t x, std::size_t y) {
  if (x >= cube.width() || y >= cube.height()) {
    throw RangeError("pixel (" + std::to_string(x) + "," + std::to_string(y) + ") outside " +
                     std::to_string(cube.width()) + "x" + std::to_string(cube.height()));
  }
  const auto span = cube.pixel(cube.pixel_index(x, y));
  return PixelSpectrum{{span.begin(), span.end()}};
}

}  // namespace hypercs
