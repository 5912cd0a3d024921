#pragma once

// Random tensor generators, sparsification error sweeps and the Monte Carlo
// drivers that check each bound against its empirical counterpart.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tsparse/bounds.hpp"
#include "tsparse/sparsify.hpp"
#include "tsparse/tensor.hpp"

namespace tsparse {

enum class GeneratorKind { gaussian, rademacher, low_rank_plus_noise, power_law };

std::string_view to_string(GeneratorKind k) noexcept;
GeneratorKind parse_generator_kind(std::string_view name);

struct GeneratorSpec {
  GeneratorKind kind = GeneratorKind::gaussian;
  std::size_t n = 2;
  std::size_t d = 2;
  int rank = 1;           // low_rank_plus_noise
  double sigma = 0.0;     // low_rank_plus_noise
  double exponent = 1.0;  // power_law
  std::uint64_t seed = 0;
};

// gaussian: keyed standard normals. rademacher: sign of the keyed u64's top
// bit. low_rank_plus_noise: sum of `rank` outer products of random unit
// vectors plus sigma * gaussian. power_law: |entry| = r^-exponent where r is
// the entry's 1-based rank under a keyed random permutation, random signs.
Tensor gen_random_tensor(const GeneratorSpec& spec);

struct SweepRow {
  double s = 0;
  std::size_t trial = 0;
  double rel_error = 0;
  std::size_t nnz = 0;
  double expected_nnz = 0;
  std::uint64_t seed = 0;
  NormProxy norm_proxy = NormProxy::power;
};

struct SweepOptions {
  NormProxyOptions norm{};
  unsigned threads = 1;
};

// Sketch seed for trial k is derive_seed(seed, k), shared across s values.
// The denominator |A|_2 is always the lower-bound estimate (power iteration
// for matrices, HOPM otherwise), so net_upper rows bound the true relative
// error from above.
std::vector<SweepRow> error_sweep(const Tensor& t, const std::vector<double>& s_values,
                                  std::size_t trials, std::uint64_t seed, NormProxy proxy,
                                  const SweepOptions& opt = {});

std::string sweep_csv(const std::vector<SweepRow>& rows);

struct UnbiasedRow {
  MultiIndex index;
  double value = 0;
  double p = 0;
  double mean = 0;
  double z = 0;
};

// One row per middle-band entry: z = (mean sketch value - A) / SE with
// SE = |A| sqrt((1-p)/p/trials), trial k using derive_seed(seed, k).
std::vector<UnbiasedRow> verify_unbiasedness(const Tensor& t, double s, std::size_t trials,
                                             std::uint64_t seed);

struct TailCheck {
  double t = 0;
  double empirical = 0;
  double bound = 0;
  double se = 0;
  bool pass = false;
};

struct BennettReport {
  std::size_t n_vars = 0;
  double sigma_sq = 0;
  std::size_t trials = 0;
  std::vector<TailCheck> rows;
  bool pass = false;
};

// Sums of n_vars centred Bernoulli(1/2) variables (values +-1/2, so
// sigma^2 = n_vars / 4). Pass iff empirical P(S > t) <= e^(-t/2) + 3 SE.
BennettReport verify_bennett(std::size_t n_vars, const std::vector<double>& t_grid,
                             std::size_t trials, std::uint64_t seed);

struct MomentCheck {
  char part = 'a';
  double a = 0, b = 0, h = 0, q = 0;
  double mc_mean = 0;
  double se = 0;
  double bound = 0;
  bool pass = false;
};

// Part (a) draws X = a + b Exp(1), which meets its tail hypothesis with h = 0
// exactly; part (b) draws X = a + b sqrt(Exp(1)) for the Gaussian-type tail.
// Both checks use the same uniforms.
std::vector<MomentCheck> verify_moment_conversion(const std::vector<double>& a_grid,
                                                  const std::vector<double>& b_grid,
                                                  const std::vector<double>& q_grid,
                                                  std::size_t samples, std::uint64_t seed);

struct SliceCheck {
  std::size_t instance = 0;
  double mean = 0;
  double se = 0;
  double bound = 0;
  bool mean_pass = false;
  // Tail at level bound + t sqrt(2) beta against e^(-t^2), t = 1, 1.5, 2.
  std::vector<TailCheck> tails;
  bool pass = false;
};

// Random (A, x, y) on an n x n x n grid; H = g o A with fresh g per draw.
std::vector<SliceCheck> verify_gaussian_slice(std::size_t n, std::size_t instances,
                                              std::size_t draws, std::uint64_t seed);

struct NetBracketRow {
  std::size_t instance = 0;
  double hopm = 0;
  double net = 0;
  double eps = 0;
  bool pass = false;
};

// Gaussian n^d tensors; pass iff HOPM <= net upper bound.
std::vector<NetBracketRow> verify_net_bracket(std::size_t count, std::size_t n, std::size_t d,
                                              int m, std::uint64_t seed,
                                              const IterationOptions& hopm = {
                                                  .restarts = kDefaultTensorRestarts});

enum class BoundCheckGenerator { rademacher, gaussian, deterministic };

struct BoundCheckConfig {
  BoundCheckGenerator generator = BoundCheckGenerator::rademacher;
  std::size_t n = 20;
  std::size_t d = 2;
  std::optional<double> q;  // default ln n
  std::size_t trials = 200;
  std::optional<NormProxy> proxy;
};

// Zero-mean generators use a zero mean tensor; `deterministic` returns the
// same rademacher tensor every trial and uses it as the mean.
std::vector<BoundReport> verify_theorem2_suite(const std::vector<BoundCheckConfig>& configs,
                                               std::uint64_t seed, unsigned threads = 1);

std::string bound_reports_csv(const std::vector<BoundReport>& reports);

// Every ratio <= max_ratio and, for configs of equal d where n doubles, the
// ratio grows by at most max_growth.
bool bound_ratios_ok(const std::vector<BoundReport>& reports, double max_ratio = 10.0,
                        double max_growth = 1.5);

}  // namespace tsparse
