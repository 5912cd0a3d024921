#pragma once

// Closed-form quantities from the random-tensor spectral norm bound and the
// sparsification guarantee.

#include <array>
#include <cstdint>
#include <optional>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "tsparse/spectral.hpp"
#include "tsparse/tensor.hpp"

namespace tsparse {

struct AlphaBeta {
  double alpha = 0;  // sqrt of the largest fiber square-sum over all modes
  double beta = 0;   // max |entry|
  // per_mode_max_fiber_sq[j] = max over the other indices of sum_{i_j} A^2
  std::vector<double> per_mode_max_fiber_sq;
};

AlphaBeta alpha_beta(const Tensor& t);

// frob^2 / spectral^2. Warns on stderr when frob < spectral, which signals
// that `spectral` came from an upper-bound proxy.
double stable_rank(double frob, double spectral);

// The sampling budget C d^3 8^(2d) st n^(d/2) ln^3 n / eps^2. Warns on
// stderr outside n >= 300, 2 <= d <= 0.5 ln n.
double required_s(std::size_t n, std::size_t d, double st, double eps, double C = 1.0);
bool in_budget_regime(std::size_t n, std::size_t d) noexcept;

// P(sum X_i > t) <= exp(-t/2) for t >= 1.5 * sum Var(X_i).
double bennett_tail(double sigma_sq, double t);

// Moment bounds from tail bounds of a non-negative X:
//   P(X >= a + tb) <= exp(-t + h)   =>  E X^q <= 2 (a + bh + bq)^q
//   P(X >= a + tb) <= exp(-t^2 + h) =>  E X^q <= 3 sqrt(q) (a + b sqrt(h) + b sqrt(q/2))^q
double expectation_bound_a(double a, double b, double h, double q);
double expectation_bound_b(double a, double b, double h, double q);

// E_g |H x_i x x_j y|_2 <= sqrt(max fiber square-sum along the free mode),
// where H = g o A elementwise and {i, j} = contracted_modes (order 3 only).
double gaussian_slice_bound(const Tensor& t, std::array<std::size_t, 2> contracted_modes);

// Deviation level u such that P(|H x_i x x_j y|_2 >= u) <= exp(-t^2):
// sqrt(max fiber square-sum) + t sqrt(2) beta.
double gaussian_slice_deviation(const Tensor& t, std::array<std::size_t, 2> contracted_modes,
                                double t_dev);

enum class NormProxy { power, hopm_lower, net_upper };

std::string_view to_string(NormProxy p) noexcept;
NormProxy parse_norm_proxy(std::string_view name);

struct NormProxyOptions {
  IterationOptions iteration{};
  int net_m = 6;
};

// Spectral norm under a proxy. power is legal only for order 2.
SpectralEstimate estimate_norm(const Tensor& t, NormProxy proxy, const NormProxyOptions& opt);

// Draws one random tensor for a trial seed.
using TensorSampler = std::function<Tensor(std::uint64_t trial_seed)>;

struct BoundReport {
  std::size_t n = 0;
  std::size_t d = 0;
  double q = 0;
  std::size_t trials = 0;
  NormProxy norm_proxy = NormProxy::power;
  double lhs_estimate = 0;
  double rhs_core = 0;
  double ratio = 0;
  std::uint64_t seed = 0;
};

inline constexpr std::size_t kMinBoundCheckTrials = 30;

struct BoundCheckOptions {
  NormProxyOptions norm{};
  // Unset: power for order 2, hopm_lower otherwise.
  std::optional<NormProxy> proxy;
  unsigned threads = 1;
};

// Monte Carlo estimate of both sides of the random-tensor bound with c1 = 1:
//   lhs = (mean |A - mean|^q)^(1/q)
//   rhs = 8^d (sqrt(d ln n) + sqrt(q)) (sum_j mean max-fiber_j(A)^(q/2))^(1/q)
// Trial k draws sampler(derive_seed(seed, k)).
BoundReport theorem2_verify(const TensorSampler& sampler, const Tensor& mean_tensor, double q,
                            std::size_t trials, std::uint64_t seed,
                            const BoundCheckOptions& opt = {});

std::string bound_report_csv_header();
std::string to_csv_row(const BoundReport& r);

}  // namespace tsparse
