#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hypercs/cube.hpp"
#include "hypercs/types.hpp"

namespace hypercs {

/// Unitary N-point DFT matrix, entry (j, k) = exp(-2 pi i jk / N) / sqrt(N).
/// Psi maps the sparse (inverse-DFT) domain to the pixel domain, f = Psi x.
struct DftBasis {
  Index size = 0;
  CMatrix matrix;
};

DftBasis build_dft_basis(Index n);

/// x = Psi^* f.
CVector to_sparse_domain(std::span<const double> f, const DftBasis& basis);
CVector to_sparse_domain(const PixelSpectrum& f, const DftBasis& basis);

struct SpectrumReconstruction {
  PixelSpectrum pixel;   ///< Re(Psi x)
  double max_imag = 0.0; ///< largest |Im(Psi x)|, nonzero only for non-symmetric x
};

SpectrumReconstruction from_sparse_domain(const CVector& x, const DftBasis& basis);

struct SparsifyStats {
  double mu_x = 0.0;
  double sigma_x = 0.0;
  double zero_fraction = 0.0;
  double T = 0.0;
};

/// Zeroes every coefficient with |x_i| - mean|x| < T * std|x| (population std).
/// Kept coefficients are copied unchanged.
std::pair<CVector, SparsifyStats> sparsify(const CVector& x, double T);

/// Row selector Phi: M distinct sorted indices out of N.
struct SelectionMask {
  Index n = 0;
  std::vector<Index> indices;
  std::uint64_t seed = 0;

  Index m() const noexcept { return static_cast<Index>(indices.size()); }
  friend bool operator==(const SelectionMask&, const SelectionMask&) = default;
};

/// M = round(ratio * N) (half away from zero) indices drawn without replacement.
SelectionMask build_selection_mask(Index n, double ratio, std::uint64_t seed);

/// Text record: "seed <s>", "n <N>", "indices i0 i1 ...".
std::string serialize_mask(const SelectionMask& mask);
SelectionMask parse_mask(const std::string& text);

/// y[j] = f[mask.indices[j]].
CVector measure(std::span<const double> f, const SelectionMask& mask);
CVector measure(const PixelSpectrum& f, const SelectionMask& mask);
CVector measure(const CVector& f, const SelectionMask& mask);

/// Sensing operator A = Phi Psi with its Lipschitz constant and ADMM system
/// factorizations. Immutable apart from the factorization cache, which is
/// guarded so the dictionary can be shared between worker threads.
class Dictionary {
 public:
  using AdmmFactor = Eigen::LLT<CMatrix>;

  /// Test hook: wraps an arbitrary M x N matrix with no basis or mask.
  static Dictionary from_matrix(CMatrix a, std::optional<double> alpha = std::nullopt);

  const CMatrix& matrix() const noexcept { return a_; }
  Index rows() const noexcept { return a_.rows(); }
  Index cols() const noexcept { return a_.cols(); }
  double lipschitz() const noexcept { return lipschitz_; }
  const std::optional<SelectionMask>& mask() const noexcept { return mask_; }
  const std::optional<DftBasis>& basis() const noexcept { return basis_; }

  /// Cholesky factor of (A^* A + alpha I); computed on first request.
  std::shared_ptr<const AdmmFactor> admm_factor(double alpha) const;

 private:
  friend Dictionary build_dictionary(const DftBasis&, const SelectionMask&, std::optional<double>);

  CMatrix a_;
  std::optional<SelectionMask> mask_;
  std::optional<DftBasis> basis_;
  double lipschitz_ = 0.0;

  struct Cache {
    std::mutex mutex;
    std::map<double, std::shared_ptr<const AdmmFactor>> factors;
  };
  std::shared_ptr<Cache> cache_ = std::make_shared<Cache>();
};

Dictionary build_dictionary(const DftBasis& basis, const SelectionMask& mask,
                            std::optional<double> alpha = std::nullopt);

/// Largest eigenvalue of A^* A by power iteration (1000 steps, 1e-10 relative).
double lipschitz_constant(const CMatrix& a);

}  // namespace hypercs
