#pragma once

#include <vector>

#include "hypercs/types.hpp"

namespace hypercs {

class Dictionary;

/// Sorted, duplicate-free column indices.
class SupportSet {
 public:
  SupportSet() = default;
  /// Sorts and deduplicates; throws RangeError for negative indices.
  explicit SupportSet(std::vector<Index> indices);

  const std::vector<Index>& indices() const noexcept { return indices_; }
  Index size() const noexcept { return static_cast<Index>(indices_.size()); }
  bool empty() const noexcept { return indices_.empty(); }
  Index operator[](Index i) const { return indices_[static_cast<std::size_t>(i)]; }

  /// Linear merge of two sorted sets.
  static SupportSet unite(const SupportSet& a, const SupportSet& b);

  friend bool operator==(const SupportSet&, const SupportSet&) = default;

 private:
  std::vector<Index> indices_;
};

/// Complex shrinkage: v_i / |v_i| * max(|v_i| - t, 0), and 0 where v_i = 0.
CVector soft_threshold(const CVector& v, double t);

/// Positions of the k largest |v_i|; ties go to the lower index.
SupportSet argmax_k(const CVector& v, Index k);

/// Minimizer of ||B s - y||_2; minimum-norm when B is rank deficient.
CVector least_squares(const CMatrix& b, const CVector& y);

/// ||r - r_prev||_2
double residual_delta(const CVector& r, const CVector& r_prev);

CMatrix gather_columns(const CMatrix& a, const SupportSet& support);
CMatrix gather_columns(const Dictionary& a, const SupportSet& support);

/// Indices of the exactly-nonzero entries of v.
SupportSet nonzero_support(const CVector& v);

/// x = 0 except x(support[j]) = values(j).
CVector scatter(Index n, const SupportSet& support, const CVector& values);

}  // namespace hypercs
