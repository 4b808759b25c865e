#include "hypercs/transform.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include "hypercs/error.hpp"

namespace hypercs {

DftBasis build_dft_basis(Index n) {
  if (n < 1) throw RangeError("DFT size must be at least 1");
  DftBasis basis{n, CMatrix(n, n)};
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (Index j = 0; j < n; ++j) {
    for (Index k = 0; k < n; ++k) {
      // Reduce jk mod n first so large products keep full angular precision.
      const auto phase_index = static_cast<double>((j * k) % n);
      basis.matrix(j, k) = std::polar(scale, -2.0 * std::numbers::pi * phase_index / static_cast<double>(n));
    }
  }
  return basis;
}

CVector to_sparse_domain(std::span<const double> f, const DftBasis& basis) {
  if (static_cast<Index>(f.size()) != basis.size) {
    throw DimensionError("pixel length " + std::to_string(f.size()) + " does not match DFT size " +
                         std::to_string(basis.size));
  }
  const Eigen::Map<const RVector> values(f.data(), basis.size);
  return basis.matrix.adjoint() * values.cast<Complex>();
}

CVector to_sparse_domain(const PixelSpectrum& f, const DftBasis& basis) {
  return to_sparse_domain(std::span<const double>(f.values), basis);
}

SpectrumReconstruction from_sparse_domain(const CVector& x, const DftBasis& basis) {
  if (x.size() != basis.size) {
    throw DimensionError("coefficient length " + std::to_string(x.size()) + " does not match DFT size " +
                         std::to_string(basis.size));
  }
  const CVector f = basis.matrix * x;
  SpectrumReconstruction out;
  out.pixel.values.resize(static_cast<std::size_t>(f.size()));
  for (Index i = 0; i < f.size(); ++i) {
    out.pixel.values[static_cast<std::size_t>(i)] = f(i).real();
    out.max_imag = std::max(out.max_imag, std::abs(f(i).imag()));
  }
  return out;
}

std::pair<CVector, SparsifyStats> sparsify(const CVector& x, double T) {
  if (T < 0.0) throw RangeError("sparsification factor T must be non-negative");
  SparsifyStats stats;
  stats.T = T;
  if (x.size() == 0) return {x, stats};

  const RVector magnitude = x.cwiseAbs();
  const double n = static_cast<double>(x.size());
  stats.mu_x = magnitude.mean();
  stats.sigma_x = std::sqrt((magnitude.array() - stats.mu_x).square().sum() / n);

  CVector out = x;
  Index zeroed = 0;
  for (Index i = 0; i < x.size(); ++i) {
    if (magnitude(i) - stats.mu_x < T * stats.sigma_x) {
      out(i) = Complex(0.0, 0.0);
      ++zeroed;
    }
  }
  stats.zero_fraction = static_cast<double>(zeroed) / n;
  return {out, stats};
}

SelectionMask build_selection_mask(Index n, double ratio, std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio <= 1.0)) throw RangeError("subsampling ratio must lie in (0, 1]");
  if (n < 1) throw RangeError("mask dimension must be at least 1");
  const auto m = static_cast<Index>(std::llround(ratio * static_cast<double>(n)));
  if (m < 1) throw RangeError("ratio * N rounds to zero measurements");

  std::vector<Index> pool(static_cast<std::size_t>(n));
  std::iota(pool.begin(), pool.end(), Index{0});
  std::mt19937_64 rng(seed);
  // Partial Fisher-Yates: the first m slots end up a uniform m-subset.
  for (Index i = 0; i < m; ++i) {
    std::uniform_int_distribution<Index> pick(i, n - 1);
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(pick(rng))]);
  }
  pool.resize(static_cast<std::size_t>(m));
  std::sort(pool.begin(), pool.end());
  return SelectionMask{n, std::move(pool), seed};
}

std::string serialize_mask(const SelectionMask& mask) {
  std::ostringstream out;
  out << "seed " << mask.seed << "\n" << "n " << mask.n << "\n" << "indices";
  for (Index i : mask.indices) out << ' ' << i;
  out << "\n";
  return out.str();
}

SelectionMask parse_mask(const std::string& text) {
  std::istringstream in(text);
  SelectionMask mask;
  bool have_seed = false, have_n = false, have_indices = false;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream fields(line);
    std::string key;
    if (!(fields >> key)) continue;
    if (key == "seed") {
      have_seed = static_cast<bool>(fields >> mask.seed);
    } else if (key == "n") {
      have_n = static_cast<bool>(fields >> mask.n);
    } else if (key == "indices") {
      Index value;
      while (fields >> value) mask.indices.push_back(value);
      have_indices = true;
    }
  }
  if (!have_seed || !have_n || !have_indices) throw FormatError("incomplete mask record");
  if (mask.indices.empty()) throw FormatError("mask record has no indices");
  for (std::size_t i = 0; i < mask.indices.size(); ++i) {
    if (mask.indices[i] < 0 || mask.indices[i] >= mask.n || (i > 0 && mask.indices[i] <= mask.indices[i - 1])) {
      throw FormatError("mask indices must be strictly increasing within [0, n)");
    }
  }
  return mask;
}

CVector measure(const CVector& f, const SelectionMask& mask) {
  if (f.size() != mask.n) {
    throw DimensionError("pixel length " + std::to_string(f.size()) + " does not match mask dimension " +
                         std::to_string(mask.n));
  }
  CVector y(mask.m());
  for (Index j = 0; j < mask.m(); ++j) y(j) = f(mask.indices[static_cast<std::size_t>(j)]);
  return y;
}

CVector measure(std::span<const double> f, const SelectionMask& mask) {
  if (static_cast<Index>(f.size()) != mask.n) {
    throw DimensionError("pixel length " + std::to_string(f.size()) + " does not match mask dimension " +
                         std::to_string(mask.n));
  }
  CVector y(mask.m());
  for (Index j = 0; j < mask.m(); ++j) y(j) = f[static_cast<std::size_t>(mask.indices[static_cast<std::size_t>(j)])];
  return y;
}

CVector measure(const PixelSpectrum& f, const SelectionMask& mask) {
  return measure(std::span<const double>(f.values), mask);
}

double lipschitz_constant(const CMatrix& a) {
  constexpr int kMaxIterations = 1000;
  constexpr double kRelativeTolerance = 1e-10;
  if (a.cols() == 0 || a.rows() == 0) throw DimensionError("empty dictionary");

  // A fixed pseudo-random start. The all-ones vector lies in the null space
  // of every partial DFT that omits row 0, so it cannot be used here.
  std::mt19937_64 rng(0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> normal;
  CVector v(a.cols());
  for (Index i = 0; i < v.size(); ++i) v(i) = Complex(normal(rng), normal(rng));
  v.normalize();

  double estimate = 0.0;
  for (int it = 0; it < kMaxIterations; ++it) {
    const CVector w = a.adjoint() * (a * v);
    const double next = std::real(v.dot(w));  // Rayleigh quotient, v is unit
    const double norm = w.norm();
    if (norm == 0.0) throw NumericalError("power iteration collapsed to zero", it);
    v = w / norm;
    if (it > 0 && std::abs(next - estimate) <= kRelativeTolerance * std::abs(next)) {
      estimate = next;
      break;
    }
    estimate = next;
  }
  if (!(estimate > 0.0)) throw NumericalError("non-positive Lipschitz estimate", kMaxIterations);
  return estimate;
}

Dictionary Dictionary::from_matrix(CMatrix a, std::optional<double> alpha) {
  Dictionary dict;
  dict.a_ = std::move(a);
  dict.lipschitz_ = lipschitz_constant(dict.a_);
  if (alpha) dict.admm_factor(*alpha);
  return dict;
}

Dictionary build_dictionary(const DftBasis& basis, const SelectionMask& mask, std::optional<double> alpha) {
  if (mask.n != basis.size) {
    throw DimensionError("mask dimension " + std::to_string(mask.n) + " does not match DFT size " +
                         std::to_string(basis.size));
  }
  Dictionary dict;
  dict.a_.resize(mask.m(), basis.size);
  for (Index j = 0; j < mask.m(); ++j) dict.a_.row(j) = basis.matrix.row(mask.indices[static_cast<std::size_t>(j)]);
  dict.mask_ = mask;
  dict.basis_ = basis;
  dict.lipschitz_ = lipschitz_constant(dict.a_);
  if (alpha) dict.admm_factor(*alpha);
  return dict;
}

std::shared_ptr<const Dictionary::AdmmFactor> Dictionary::admm_factor(double alpha) const {
  if (!(alpha > 0.0)) throw RangeError("ADMM penalty alpha must be positive");
  std::lock_guard lock(cache_->mutex);
  auto& slot = cache_->factors[alpha];
  if (!slot) {
    CMatrix system = a_.adjoint() * a_;
    system.diagonal().array() += alpha;
    auto factor = std::make_shared<AdmmFactor>(system);
    // A^*A + alpha I is Hermitian positive definite for alpha > 0.
    if (factor->info() != Eigen::Success) throw NumericalError("ADMM system factorization failed", 0);
    slot = std::move(factor);
  }
  return slot;
}

}  // namespace hypercs
