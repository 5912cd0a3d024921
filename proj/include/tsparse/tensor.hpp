#pragma once

// Dense and coordinate-list tensors of arbitrary order, norms and
// tensor-vector contractions.
//
// Storage is row-major (last index fastest) and indices are 0-based. Modes
// are numbered 0..order-1.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "tsparse/error.hpp"

namespace tsparse {

using Dims = std::vector<std::size_t>;
using MultiIndex = std::vector<std::size_t>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

inline std::size_t element_count(std::span<const std::size_t> dims) {
  return std::accumulate(dims.begin(), dims.end(), std::size_t{1},
                         std::multiplies<>{});
}

inline std::string dims_string(std::span<const std::size_t> dims) {
  std::string out;
  for (std::size_t k = 0; k < dims.size(); ++k) {
    if (k) out += 'x';
    out += std::to_string(dims[k]);
  }
  return out;
}

inline void validate_dims(std::span<const std::size_t> dims) {
  if (dims.empty()) fail(ErrorCode::invalid_argument, "tensor order must be >= 1");
  for (std::size_t n : dims)
    if (n == 0) fail(ErrorCode::invalid_argument, "tensor dims must be >= 1");
}

inline bool is_cubic(std::span<const std::size_t> dims) {
  return std::adjacent_find(dims.begin(), dims.end(), std::not_equal_to<>{}) ==
         dims.end();
}

// Row-major offset -> multi-index, written into `index` (size == dims.size()).
inline void unravel(std::size_t offset, std::span<const std::size_t> dims,
                    std::span<std::size_t> index) {
  for (std::size_t k = dims.size(); k-- > 0;) {
    index[k] = offset % dims[k];
    offset /= dims[k];
  }
}

inline std::size_t ravel(std::span<const std::size_t> index,
                         std::span<const std::size_t> dims) {
  std::size_t offset = 0;
  for (std::size_t k = 0; k < dims.size(); ++k) offset = offset * dims[k] + index[k];
  return offset;
}

template <typename Scalar>
class DenseTensor {
 public:
  using scalar_type = Scalar;
  using VectorType = Vector<Scalar>;

  explicit DenseTensor(Dims dims) : dims_(std::move(dims)) {
    validate_dims(dims_);
    values_ = VectorType::Zero(static_cast<Eigen::Index>(element_count(dims_)));
  }

  DenseTensor(Dims dims, VectorType values)
      : dims_(std::move(dims)), values_(std::move(values)) {
    validate_dims(dims_);
    if (static_cast<std::size_t>(values_.size()) != element_count(dims_))
      fail(ErrorCode::length_mismatch,
           "value count " + std::to_string(values_.size()) +
               " does not match dims " + dims_string(dims_));
  }

  static DenseTensor constant(Dims dims, Scalar value) {
    DenseTensor t(std::move(dims));
    t.values_.setConstant(value);
    return t;
  }

  std::size_t order() const noexcept { return dims_.size(); }
  const Dims& dims() const noexcept { return dims_; }
  std::size_t dim(std::size_t mode) const { return dims_.at(mode); }
  std::size_t size() const noexcept { return static_cast<std::size_t>(values_.size()); }
  bool cubic() const noexcept { return is_cubic(dims_); }

  const VectorType& values() const noexcept { return values_; }
  VectorType& values() noexcept { return values_; }

  Scalar operator()(std::span<const std::size_t> index) const {
    return values_[static_cast<Eigen::Index>(checked_offset(index))];
  }
  Scalar& operator()(std::span<const std::size_t> index) {
    return values_[static_cast<Eigen::Index>(checked_offset(index))];
  }
  Scalar operator()(std::initializer_list<std::size_t> index) const {
    return (*this)(std::span<const std::size_t>(index.begin(), index.size()));
  }
  Scalar& operator()(std::initializer_list<std::size_t> index) {
    return (*this)(std::span<const std::size_t>(index.begin(), index.size()));
  }

  friend bool operator==(const DenseTensor& a, const DenseTensor& b) {
    return a.dims_ == b.dims_ && a.values_ == b.values_;
  }

 private:
  std::size_t checked_offset(std::span<const std::size_t> index) const {
    if (index.size() != dims_.size())
      fail(ErrorCode::length_mismatch, "multi-index has wrong order");
    for (std::size_t k = 0; k < dims_.size(); ++k)
      if (index[k] >= dims_[k])
        fail(ErrorCode::index_out_of_range, "multi-index component out of range");
    return ravel(index, dims_);
  }

  Dims dims_;
  VectorType values_;
};

// Coordinate-list tensor. Entries are strictly lexicographically sorted and
// never store an exact zero.
template <typename Scalar>
class SparseTensor {
 public:
  using scalar_type = Scalar;

  explicit SparseTensor(Dims dims) : dims_(std::move(dims)) { validate_dims(dims_); }

  // `indices` holds nnz * order components, entry-major.
  SparseTensor(Dims dims, std::vector<std::size_t> indices, std::vector<Scalar> values)
      : dims_(std::move(dims)), indices_(std::move(indices)), values_(std::move(values)) {
    validate_dims(dims_);
    if (indices_.size() != values_.size() * dims_.size())
      fail(ErrorCode::length_mismatch, "index/value arrays disagree on nnz");
    for (std::size_t k = 0; k < nnz(); ++k) {
      auto idx = index(k);
      for (std::size_t m = 0; m < dims_.size(); ++m)
        if (idx[m] >= dims_[m])
          fail(ErrorCode::index_out_of_range,
               "entry " + std::to_string(k) + " index component " + std::to_string(m) +
                   " = " + std::to_string(idx[m]) + " exceeds dim " +
                   std::to_string(dims_[m]));
      if (values_[k] == Scalar(0))
        fail(ErrorCode::zero_value, "entry " + std::to_string(k) + " stores zero");
      if (k > 0) {
        auto prev = index(k - 1);
        auto cmp = std::lexicographical_compare_three_way(prev.begin(), prev.end(),
                                                          idx.begin(), idx.end());
        if (cmp == 0)
          fail(ErrorCode::duplicate_index, "duplicate index at entry " + std::to_string(k));
        if (cmp > 0)
          fail(ErrorCode::unsorted_index, "unsorted index at entry " + std::to_string(k));
      }
    }
  }

  std::size_t order() const noexcept { return dims_.size(); }
  const Dims& dims() const noexcept { return dims_; }
  std::size_t nnz() const noexcept { return values_.size(); }

  std::span<const std::size_t> index(std::size_t k) const {
    return {indices_.data() + k * dims_.size(), dims_.size()};
  }
  Scalar value(std::size_t k) const { return values_[k]; }
  const std::vector<Scalar>& values() const noexcept { return values_; }
  const std::vector<std::size_t>& flat_indices() const noexcept { return indices_; }

  friend bool operator==(const SparseTensor&, const SparseTensor&) = default;

 private:
  Dims dims_;
  std::vector<std::size_t> indices_;
  std::vector<Scalar> values_;
};

using Tensor = DenseTensor<double>;
using Sparse = SparseTensor<double>;
using VectorXd = Vector<double>;

template <typename Scalar>
Scalar frobenius_norm_sq(const DenseTensor<Scalar>& t) {
  Scalar acc(0);
  for (Scalar v : t.values()) acc += v * v;
  return acc;
}

template <typename Scalar>
Scalar frobenius_norm_sq(const SparseTensor<Scalar>& t) {
  Scalar acc(0);
  for (Scalar v : t.values()) acc += v * v;
  return acc;
}

template <typename T>
auto frobenius_norm(const T& t) {
  using std::sqrt;
  return sqrt(frobenius_norm_sq(t));
}

template <typename Scalar>
SparseTensor<Scalar> to_sparse(const DenseTensor<Scalar>& t) {
  std::vector<std::size_t> indices;
  std::vector<Scalar> values;
  MultiIndex idx(t.order());
  for (std::size_t off = 0; off < t.size(); ++off) {
    const Scalar v = t.values()[static_cast<Eigen::Index>(off)];
    if (v == Scalar(0)) continue;
    unravel(off, t.dims(), idx);
    indices.insert(indices.end(), idx.begin(), idx.end());
    values.push_back(v);
  }
  return SparseTensor<Scalar>(t.dims(), std::move(indices), std::move(values));
}

template <typename Scalar>
DenseTensor<Scalar> to_dense(const SparseTensor<Scalar>& s) {
  DenseTensor<Scalar> t(s.dims());
  for (std::size_t k = 0; k < s.nnz(); ++k)
    t.values()[static_cast<Eigen::Index>(ravel(s.index(k), s.dims()))] = s.value(k);
  return t;
}

// T x_mode x : sums mode `mode` against x, returning an order-(d-1) tensor.
// Contracting the only mode of an order-1 tensor is what contract_all is for.
template <typename Scalar, typename Derived>
DenseTensor<Scalar> mode_contract(const DenseTensor<Scalar>& t,
                                  const Eigen::MatrixBase<Derived>& x, std::size_t mode) {
  if (mode >= t.order())
    fail(ErrorCode::invalid_argument, "mode " + std::to_string(mode) + " out of range");
  if (t.order() < 2)
    fail(ErrorCode::invalid_argument, "mode_contract needs order >= 2; use contract_all");
  const std::size_t m = t.dim(mode);
  if (static_cast<std::size_t>(x.size()) != m)
    fail(ErrorCode::length_mismatch, "vector length " + std::to_string(x.size()) +
                                         " does not match dim " + std::to_string(m) +
                                         " of mode " + std::to_string(mode));
  std::size_t outer = 1, inner = 1;
  for (std::size_t k = 0; k < mode; ++k) outer *= t.dim(k);
  for (std::size_t k = mode + 1; k < t.order(); ++k) inner *= t.dim(k);

  Dims out_dims = t.dims();
  out_dims.erase(out_dims.begin() + static_cast<std::ptrdiff_t>(mode));
  DenseTensor<Scalar> out(std::move(out_dims));
  const Scalar* src = t.values().data();
  Scalar* dst = out.values().data();
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t i = 0; i < m; ++i) {
      const Scalar xi = x[static_cast<Eigen::Index>(i)];
      const Scalar* row = src + (o * m + i) * inner;
      Scalar* acc = dst + o * inner;
      for (std::size_t in = 0; in < inner; ++in) acc[in] += row[in] * xi;
    }
  return out;
}

namespace detail {

template <typename Scalar>
void check_contraction(const DenseTensor<Scalar>& t, const std::vector<Vector<Scalar>>& xs,
                       std::span<const std::size_t> modes) {
  if (xs.size() != modes.size())
    fail(ErrorCode::length_mismatch, "one vector per contracted mode is required");
  std::vector<bool> seen(t.order(), false);
  for (std::size_t k = 0; k < modes.size(); ++k) {
    if (modes[k] >= t.order())
      fail(ErrorCode::invalid_argument, "mode " + std::to_string(modes[k]) + " out of range");
    if (seen[modes[k]])
      fail(ErrorCode::repeated_mode, "mode " + std::to_string(modes[k]) + " repeated");
    seen[modes[k]] = true;
    if (static_cast<std::size_t>(xs[k].size()) != t.dim(modes[k]))
      fail(ErrorCode::length_mismatch,
           "vector " + std::to_string(k) + " length does not match mode " +
               std::to_string(modes[k]));
  }
}

}  // namespace detail

// Contracts several distinct modes. Modes are applied in descending order so
// the remaining modes keep their positions; the result keeps the uncontracted
// modes in their original relative order.
template <typename Scalar>
DenseTensor<Scalar> multi_contract(const DenseTensor<Scalar>& t,
                                   const std::vector<Vector<Scalar>>& xs,
                                   std::span<const std::size_t> modes) {
  detail::check_contraction(t, xs, modes);
  if (modes.size() >= t.order())
    fail(ErrorCode::invalid_argument,
         "multi_contract must leave at least one mode; use contract_all");
  std::vector<std::size_t> order(modes.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return modes[a] > modes[b]; });
  DenseTensor<Scalar> cur = t;
  for (std::size_t k : order) cur = mode_contract(cur, xs[k], modes[k]);
  return cur;
}

// T x_0 x_0 ... x_{d-1} x_{d-1}: the full multilinear form.
template <typename Scalar>
Scalar contract_all(const DenseTensor<Scalar>& t, const std::vector<Vector<Scalar>>& xs) {
  std::vector<std::size_t> modes(t.order());
  std::iota(modes.begin(), modes.end(), std::size_t{0});
  detail::check_contraction(t, xs, modes);
  if (t.order() == 1) return t.values().dot(xs[0]);
  std::vector<Vector<Scalar>> head(xs.begin(), xs.end() - 1);
  modes.pop_back();
  const DenseTensor<Scalar> last = multi_contract(t, head, modes);
  return last.values().dot(xs.back());
}

// u_0 (outer) u_1 (outer) ... (outer) u_{d-1}
template <typename Scalar>
DenseTensor<Scalar> outer_product(const std::vector<Vector<Scalar>>& factors) {
  Dims dims;
  for (const auto& f : factors) dims.push_back(static_cast<std::size_t>(f.size()));
  DenseTensor<Scalar> t(dims);
  MultiIndex idx(dims.size());
  for (std::size_t off = 0; off < t.size(); ++off) {
    unravel(off, dims, idx);
    Scalar v(1);
    for (std::size_t k = 0; k < dims.size(); ++k) v *= factors[k][static_cast<Eigen::Index>(idx[k])];
    t.values()[static_cast<Eigen::Index>(off)] = v;
  }
  return t;
}

}  // namespace tsparse
