#include "tsparse/sparsify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "tsparse/exact_sum.hpp"
#include "tsparse/keyed_rng.hpp"

namespace tsparse {

namespace {

void check_sketch_inputs(const Dims& dims, double s) {
  if (!(s > 0) || !std::isfinite(s))
    fail(ErrorCode::invalid_argument, "sampling parameter s must be positive, got " +
                                          std::to_string(s));
  if (!is_cubic(dims))
    fail(ErrorCode::non_cubic, "sparsification needs a cubic tensor, got " + dims_string(dims));
}

struct Classifier {
  Thresholds th;
  std::uint64_t seed;
  SketchCounts counts;
  ExactSum expected;

  // Returns the sketch value, or 0 when the entry is dropped.
  double visit(std::span<const std::size_t> index, double value) {
    const double sq = value * value;
    switch (classify(sq, th)) {
      case EntryClass::zeroed:
        ++counts.zeroed_small;
        return 0.0;
      case EntryClass::kept_large:
        ++counts.kept_large;
        expected.add(1.0);
        return value;
      case EntryClass::middle: {
        const double p = keep_probability(sq, th);
        expected.add(p);
        if (keyed_keep(seed, index, p)) {
          ++counts.middle_sampled_kept;
          return value / p;
        }
        ++counts.middle_sampled_dropped;
        return 0.0;
      }
    }
    return 0.0;
  }
};

double exact_frob_sq(const Tensor& t) {
  ExactSum acc;
  for (double v : t.values()) acc.add(v * v);
  return acc.value();
}

}  // namespace

Thresholds compute_thresholds(double frob_sq, double s, std::size_t n, std::size_t d) {
  if (!(frob_sq > 0) || !std::isfinite(frob_sq))
    fail(ErrorCode::invalid_argument, "frob_sq must be positive (zero tensor?)");
  if (!(s > 0) || !std::isfinite(s))
    fail(ErrorCode::invalid_argument, "sampling parameter s must be positive");
  if (n < 2) fail(ErrorCode::invalid_argument, "dimension n must be >= 2");
  if (d < 1) fail(ErrorCode::invalid_argument, "order d must be >= 1");
  const double ln_n = std::log(static_cast<double>(n));
  const double factor = ln_n * ln_n / std::pow(static_cast<double>(n), 0.5 * static_cast<double>(d));
  if (factor > 1.0)
    fail(ErrorCode::out_of_regime,
         "ln^2(n)/n^(d/2) = " + std::to_string(factor) +
             " exceeds 1 for n=" + std::to_string(n) + ", d=" + std::to_string(d) +
             "; the zero threshold would exceed the keep threshold");
  Thresholds th;
  th.frob_sq = frob_sq;
  th.s = s;
  th.keep_threshold = frob_sq / s;
  th.zero_threshold = factor * th.keep_threshold;
  return th;
}

EntryClass classify(double value_sq, const Thresholds& th) noexcept {
  if (value_sq <= th.zero_threshold) return EntryClass::zeroed;
  if (value_sq >= th.keep_threshold) return EntryClass::kept_large;
  return EntryClass::middle;
}

bool keyed_keep(std::uint64_t seed, std::span<const std::size_t> index, double p) noexcept {
  return keyed_uniform(seed, index) < p;
}

SketchResult sparsify(const Tensor& t, double s, std::uint64_t seed) {
  check_sketch_inputs(t.dims(), s);
  const double frob_sq = exact_frob_sq(t);
  Classifier c{compute_thresholds(frob_sq, s, t.dim(0), t.order()), seed, {}, {}};

  std::vector<std::size_t> indices;
  std::vector<double> values;
  MultiIndex idx(t.order());
  for (std::size_t off = 0; off < t.size(); ++off) {
    const double v = t.values()[static_cast<Eigen::Index>(off)];
    if (v == 0.0) continue;
    unravel(off, t.dims(), idx);
    const double out = c.visit(idx, v);
    if (out == 0.0) continue;
    indices.insert(indices.end(), idx.begin(), idx.end());
    values.push_back(out);
  }
  return SketchResult{Sparse(t.dims(), std::move(indices), std::move(values)), c.th,
                      c.counts, seed, c.expected.value()};
}

double expected_nnz(const Tensor& t, double s) {
  check_sketch_inputs(t.dims(), s);
  const Thresholds th = compute_thresholds(exact_frob_sq(t), s, t.dim(0), t.order());
  ExactSum acc;
  for (double v : t.values()) {
    if (v == 0.0) continue;
    const double sq = v * v;
    switch (classify(sq, th)) {
      case EntryClass::zeroed: break;
      case EntryClass::kept_large: acc.add(1.0); break;
      case EntryClass::middle: acc.add(keep_probability(sq, th)); break;
    }
  }
  return acc.value();
}

SketchResult stream_sparsify(const EntrySource& source, const Dims& dims, double s,
                             std::uint64_t seed) {
  validate_dims(dims);
  check_sketch_inputs(dims, s);
  const std::size_t order = dims.size();

  auto check_index = [&](std::span<const std::size_t> index) {
    if (index.size() != order)
      fail(ErrorCode::length_mismatch, "stream entry has wrong index order");
    for (std::size_t k = 0; k < order; ++k)
      if (index[k] >= dims[k])
        fail(ErrorCode::index_out_of_range, "stream entry index out of range");
  };

  ExactSum frob;
  std::size_t pass1_count = 0;
  source([&](std::span<const std::size_t> index, double value) {
    check_index(index);
    if (value == 0.0) return;
    frob.add(value * value);
    ++pass1_count;
  });

  Classifier c{compute_thresholds(frob.value(), s, dims[0], order), seed, {}, {}};
  struct Kept {
    MultiIndex index;
    double value;
  };
  std::vector<Kept> kept;
  source([&](std::span<const std::size_t> index, double value) {
    check_index(index);
    if (value == 0.0) return;
    const double out = c.visit(index, value);
    if (out != 0.0) kept.push_back({MultiIndex(index.begin(), index.end()), out});
  });
  if (c.counts.total() != pass1_count)
    fail(ErrorCode::invalid_argument, "stream yielded different entries on its second pass");

  std::sort(kept.begin(), kept.end(),
            [](const Kept& a, const Kept& b) { return a.index < b.index; });
  for (std::size_t k = 1; k < kept.size(); ++k)
    if (kept[k].index == kept[k - 1].index)
      fail(ErrorCode::duplicate_index, "stream yields index more than once");

  std::vector<std::size_t> indices;
  std::vector<double> values;
  indices.reserve(kept.size() * order);
  values.reserve(kept.size());
  for (const auto& e : kept) {
    indices.insert(indices.end(), e.index.begin(), e.index.end());
    values.push_back(e.value);
  }
  return SketchResult{Sparse(dims, std::move(indices), std::move(values)), c.th, c.counts,
                      seed, c.expected.value()};
}

long band_index(double value_sq, double keep_threshold) noexcept {
  if (value_sq >= std::ldexp(keep_threshold, -1)) return 1;
  long k = static_cast<long>(std::ceil(std::log2(keep_threshold / value_sq)));
  k = std::max(k, 2L);
  while (value_sq < std::ldexp(keep_threshold, static_cast<int>(-k))) ++k;
  while (k > 2 && value_sq >= std::ldexp(keep_threshold, static_cast<int>(-(k - 1)))) --k;
  return k;
}

LevelBands level_decompose(const Tensor& t, double s) {
  check_sketch_inputs(t.dims(), s);
  const double frob_sq = exact_frob_sq(t);
  const Thresholds th = compute_thresholds(frob_sq, s, t.dim(0), t.order());

  const double n = static_cast<double>(t.dim(0));
  const double ln_n = std::log(n);
  LevelBands out{{}, Sparse(t.dims()), s, frob_sq, 0, 1};
  out.ell = static_cast<long>(
      std::floor(std::log2(std::pow(n, 0.5 * static_cast<double>(t.order())) / (ln_n * ln_n))));

  double min_sq = std::numeric_limits<double>::infinity();
  for (double v : t.values())
    if (v != 0.0) min_sq = std::min(min_sq, v * v);
  out.k_max = band_index(min_sq, th.keep_threshold);

  const auto bands = static_cast<std::size_t>(out.k_max);
  std::vector<std::vector<std::size_t>> band_idx(bands + 1);
  std::vector<std::vector<double>> band_val(bands + 1);
  MultiIndex idx(t.order());
  for (std::size_t off = 0; off < t.size(); ++off) {
    const double v = t.values()[static_cast<Eigen::Index>(off)];
    if (v == 0.0) continue;
    unravel(off, t.dims(), idx);
    const auto k = static_cast<std::size_t>(band_index(v * v, th.keep_threshold));
    const std::size_t slot = std::min(k, bands + 1) - 1;
    band_idx[slot].insert(band_idx[slot].end(), idx.begin(), idx.end());
    band_val[slot].push_back(v);
  }
  for (std::size_t k = 0; k < bands; ++k)
    out.bands.emplace_back(t.dims(), std::move(band_idx[k]), std::move(band_val[k]));
  out.tail = Sparse(t.dims(), std::move(band_idx[bands]), std::move(band_val[bands]));
  return out;
}

}  // namespace tsparse
