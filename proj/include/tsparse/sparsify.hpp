#pragma once

// Element-wise sparsification: entries with A^2 <= ln^2(n)/n^(d/2) * |A|_F^2/s
// are zeroed, entries with A^2 >= |A|_F^2/s are kept verbatim, and every
// entry in between is kept with probability p = s*A^2/|A|_F^2 and rescaled
// to A/p.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "tsparse/tensor.hpp"

namespace tsparse {

struct Thresholds {
  double zero_threshold = 0;  // A^2 <= this is dropped
  double keep_threshold = 0;  // A^2 >= this is kept verbatim
  double frob_sq = 0;
  double s = 0;
};

// frob_sq / s and (ln^2 n / n^(d/2)) * frob_sq / s.
Thresholds compute_thresholds(double frob_sq, double s, std::size_t n, std::size_t d);

enum class EntryClass { zeroed, kept_large, middle };

EntryClass classify(double value_sq, const Thresholds& th) noexcept;

inline double keep_probability(double value_sq, const Thresholds& th) noexcept {
  return th.s * value_sq / th.frob_sq;
}

// Bernoulli(p) decision for a middle-band entry under the keyed RNG contract.
bool keyed_keep(std::uint64_t seed, std::span<const std::size_t> index, double p) noexcept;

struct SketchCounts {
  std::size_t kept_large = 0;
  std::size_t zeroed_small = 0;
  std::size_t middle_sampled_kept = 0;
  std::size_t middle_sampled_dropped = 0;

  std::size_t total() const noexcept {
    return kept_large + zeroed_small + middle_sampled_kept + middle_sampled_dropped;
  }
  friend bool operator==(const SketchCounts&, const SketchCounts&) = default;
};

struct SketchResult {
  Sparse sketch;
  Thresholds thresholds;
  SketchCounts counts;
  std::uint64_t seed = 0;
  double expected_nnz = 0;
};

SketchResult sparsify(const Tensor& t, double s, std::uint64_t seed);

double expected_nnz(const Tensor& t, double s);

// Replays the stream: calls `visit(index, value)` once per nonzero entry. It
// is invoked twice (norm pass, then classification pass) and must yield the
// same entries both times, in any order.
using EntryVisitor = std::function<void(std::span<const std::size_t>, double)>;
using EntrySource = std::function<void(const EntryVisitor&)>;

// Two-pass variant of sparsify for inputs too large to materialise. Memory is
// proportional to the sketch, not the input. Output is bit-identical to
// sparsify on the materialised tensor regardless of stream order.
SketchResult stream_sparsify(const EntrySource& source, const Dims& dims, double s,
                             std::uint64_t seed);

struct LevelBands {
  // bands[k-1] holds A^[k]: A^[1] is A^2 >= keep/2, A^[k] is
  // keep*2^-k <= A^2 < keep*2^-(k-1).
  std::vector<Sparse> bands;
  // Entries whose band index exceeds bands.size().
  Sparse tail;
  double s = 0;
  double frob_sq = 0;
  // floor(log2(n^(d/2) / ln^2 n))
  long ell = 0;
  // ceil(log2(frob_sq / (s * min nonzero A^2))), at least 1
  long k_max = 1;
};

// Band index of a nonzero entry (1-based).
long band_index(double value_sq, double keep_threshold) noexcept;

LevelBands level_decompose(const Tensor& t, double s);

}  // namespace tsparse
