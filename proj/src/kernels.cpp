#include "hypercs/kernels.hpp"

#include <algorithm>
#include <iterator>
#include <numeric>

#include "hypercs/error.hpp"
#include "hypercs/transform.hpp"

namespace hypercs {

namespace {
constexpr double kRankTolerance = 1e-10;
}

SupportSet::SupportSet(std::vector<Index> indices) : indices_(std::move(indices)) {
  std::sort(indices_.begin(), indices_.end());
  indices_.erase(std::unique(indices_.begin(), indices_.end()), indices_.end());
  if (!indices_.empty() && indices_.front() < 0) throw RangeError("negative support index");
}

SupportSet SupportSet::unite(const SupportSet& a, const SupportSet& b) {
  SupportSet out;
  out.indices_.reserve(a.indices_.size() + b.indices_.size());
  std::set_union(a.indices_.begin(), a.indices_.end(), b.indices_.begin(), b.indices_.end(),
                 std::back_inserter(out.indices_));
  return out;
}

CVector soft_threshold(const CVector& v, double t) {
  if (t < 0.0) throw RangeError("threshold must be non-negative");
  CVector out(v.size());
  for (Index i = 0; i < v.size(); ++i) {
    const double magnitude = std::abs(v(i));
    out(i) = magnitude > t ? v(i) * ((magnitude - t) / magnitude) : Complex(0.0, 0.0);
  }
  return out;
}

SupportSet argmax_k(const CVector& v, Index k) {
  if (k < 1 || k > v.size()) {
    throw RangeError("argmax_k: k=" + std::to_string(k) + " outside [1, " + std::to_string(v.size()) + "]");
  }
  std::vector<Index> order(static_cast<std::size_t>(v.size()));
  std::iota(order.begin(), order.end(), Index{0});
  const RVector magnitude = v.cwiseAbs();
  const auto larger = [&](Index a, Index b) {
    return magnitude(a) > magnitude(b) || (magnitude(a) == magnitude(b) && a < b);
  };
  std::nth_element(order.begin(), order.begin() + (k - 1), order.end(), larger);
  order.resize(static_cast<std::size_t>(k));
  return SupportSet(std::move(order));
}

CVector least_squares(const CMatrix& b, const CVector& y) {
  if (b.rows() != y.size()) throw DimensionError("least_squares: row count does not match y");
  if (b.cols() == 0) return CVector(0);

  Eigen::ColPivHouseholderQR<CMatrix> qr(b);
  qr.setThreshold(kRankTolerance);
  if (qr.rank() == b.cols()) return qr.solve(y);

  // Near-dependent atoms: minimum-norm solution through the SVD.
  Eigen::JacobiSVD<CMatrix> svd(b, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(kRankTolerance);
  return svd.solve(y);
}

double residual_delta(const CVector& r, const CVector& r_prev) {
  if (r.size() != r_prev.size()) throw DimensionError("residual_delta: length mismatch");
  return (r - r_prev).norm();
}

CMatrix gather_columns(const CMatrix& a, const SupportSet& support) {
  CMatrix out(a.rows(), support.size());
  for (Index j = 0; j < support.size(); ++j) {
    if (support[j] >= a.cols()) throw RangeError("support index " + std::to_string(support[j]) + " out of range");
    out.col(j) = a.col(support[j]);
  }
  return out;
}

CMatrix gather_columns(const Dictionary& a, const SupportSet& support) { return gather_columns(a.matrix(), support); }

SupportSet nonzero_support(const CVector& v) {
  std::vector<Index> indices;
  for (Index i = 0; i < v.size(); ++i) {
    if (v(i) != Complex(0.0, 0.0)) indices.push_back(i);
  }
  return SupportSet(std::move(indices));
}

CVector scatter(Index n, const SupportSet& support, const CVector& values) {
  if (values.size() != support.size()) throw DimensionError("scatter: values do not match support size");
  CVector x = CVector::Zero(n);
  for (Index j = 0; j < support.size(); ++j) {
    if (support[j] >= n) throw RangeError("scatter: support index out of range");
    x(support[j]) = values(j);
  }
  return x;
}

}  // namespace hypercs
