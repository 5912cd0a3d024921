#include "tsparse/bounds.hpp"

#include <cmath>
#include <iostream>

#include "tsparse/keyed_rng.hpp"
#include "tsparse/parallel.hpp"
#include "tsparse/tensor_io.hpp"

namespace tsparse {

namespace {

void require_cubic(const Tensor& t, const char* what) {
  if (!t.cubic())
    fail(ErrorCode::non_cubic, std::string(what) + " needs a cubic tensor, got " +
                                   dims_string(t.dims()));
}

// Largest sum of squares over the fibers running along `mode`.
double max_fiber_sq(const Tensor& t, std::size_t mode) {
  std::size_t outer = 1, inner = 1;
  for (std::size_t k = 0; k < mode; ++k) outer *= t.dim(k);
  for (std::size_t k = mode + 1; k < t.order(); ++k) inner *= t.dim(k);
  const std::size_t m = t.dim(mode);
  const double* v = t.values().data();
  double best = 0;
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t in = 0; in < inner; ++in) {
      double acc = 0;
      for (std::size_t i = 0; i < m; ++i) {
        const double x = v[(o * m + i) * inner + in];
        acc += x * x;
      }
      best = std::max(best, acc);
    }
  return best;
}

std::size_t free_mode(const Tensor& t, std::array<std::size_t, 2> modes) {
  if (t.order() != 3)
    fail(ErrorCode::invalid_argument, "gaussian slice bound is defined for order-3 tensors");
  require_cubic(t, "gaussian slice bound");
  if (modes[0] >= 3 || modes[1] >= 3)
    fail(ErrorCode::invalid_argument, "contracted mode out of range");
  if (modes[0] == modes[1]) fail(ErrorCode::repeated_mode, "contracted modes must differ");
  return 3 - modes[0] - modes[1];
}

}  // namespace

AlphaBeta alpha_beta(const Tensor& t) {
  require_cubic(t, "alpha_beta");
  AlphaBeta ab;
  double worst = 0;
  for (std::size_t j = 0; j < t.order(); ++j) {
    ab.per_mode_max_fiber_sq.push_back(max_fiber_sq(t, j));
    worst = std::max(worst, ab.per_mode_max_fiber_sq.back());
  }
  ab.alpha = std::sqrt(worst);
  ab.beta = t.values().cwiseAbs().maxCoeff();
  return ab;
}

double stable_rank(double frob, double spectral) {
  if (!(spectral > 0)) fail(ErrorCode::invalid_argument, "spectral norm must be positive");
  // rank-one inputs land on frob == spectral up to rounding
  if (frob < spectral * (1 - 1e-9))
    std::cerr << "warning: frobenius norm " << frob << " is below spectral estimate "
              << spectral << "; the spectral value is probably an upper-bound proxy\n";
  return (frob * frob) / (spectral * spectral);
}

bool in_budget_regime(std::size_t n, std::size_t d) noexcept {
  return n >= 300 && d >= 2 && static_cast<double>(d) <= 0.5 * std::log(static_cast<double>(n));
}

double required_s(std::size_t n, std::size_t d, double st, double eps, double C) {
  if (n < 2) fail(ErrorCode::invalid_argument, "n must be >= 2");
  if (d < 2) fail(ErrorCode::invalid_argument, "d must be >= 2");
  if (!(st > 0)) fail(ErrorCode::invalid_argument, "stable rank must be positive");
  if (!(eps > 0)) fail(ErrorCode::invalid_argument, "eps must be positive");
  if (!(C > 0)) fail(ErrorCode::invalid_argument, "C must be positive");
  if (!in_budget_regime(n, d))
    std::cerr << "warning: n=" << n << ", d=" << d
              << " is outside n >= 300, 2 <= d <= 0.5 ln n; value is a reference only\n";
  const double dd = static_cast<double>(d);
  const double ln_n = std::log(static_cast<double>(n));
  return C * dd * dd * dd * std::pow(8.0, 2.0 * dd) * st *
         std::pow(static_cast<double>(n), 0.5 * dd) * ln_n * ln_n * ln_n / (eps * eps);
}

double bennett_tail(double sigma_sq, double t) {
  if (!(sigma_sq > 0)) fail(ErrorCode::invalid_argument, "sigma_sq must be positive");
  if (!(t >= 1.5 * sigma_sq))
    fail(ErrorCode::out_of_regime, "bennett tail needs t >= 1.5 * sigma_sq (t=" +
                                       std::to_string(t) + ", sigma_sq=" +
                                       std::to_string(sigma_sq) + ")");
  return std::exp(-t / 2.0);
}

namespace {

void check_moment_args(double a, double b, double h, double q) {
  if (!(a >= 0 && b >= 0 && h >= 0))
    fail(ErrorCode::invalid_argument, "a, b and h must be non-negative");
  if (!(q >= 1)) fail(ErrorCode::invalid_argument, "q must be >= 1");
}

}  // namespace

double expectation_bound_a(double a, double b, double h, double q) {
  check_moment_args(a, b, h, q);
  return 2.0 * std::pow(a + b * h + b * q, q);
}

double expectation_bound_b(double a, double b, double h, double q) {
  check_moment_args(a, b, h, q);
  return 3.0 * std::sqrt(q) * std::pow(a + b * std::sqrt(h) + b * std::sqrt(q / 2.0), q);
}

double gaussian_slice_bound(const Tensor& t, std::array<std::size_t, 2> contracted_modes) {
  return std::sqrt(max_fiber_sq(t, free_mode(t, contracted_modes)));
}

double gaussian_slice_deviation(const Tensor& t, std::array<std::size_t, 2> contracted_modes,
                                double t_dev) {
  if (!(t_dev >= 0)) fail(ErrorCode::invalid_argument, "deviation t must be non-negative");
  const double beta = t.values().cwiseAbs().maxCoeff();
  return gaussian_slice_bound(t, contracted_modes) + t_dev * std::sqrt(2.0) * beta;
}

std::string_view to_string(NormProxy p) noexcept {
  switch (p) {
    case NormProxy::power: return "power";
    case NormProxy::hopm_lower: return "hopm_lower";
    case NormProxy::net_upper: return "net_upper";
  }
  return "unknown";
}

NormProxy parse_norm_proxy(std::string_view name) {
  if (name == "power") return NormProxy::power;
  if (name == "hopm" || name == "hopm_lower") return NormProxy::hopm_lower;
  if (name == "net" || name == "net_upper") return NormProxy::net_upper;
  fail(ErrorCode::invalid_argument, "unknown norm proxy '" + std::string(name) +
                                        "' (expected power, hopm or net)");
}

SpectralEstimate estimate_norm(const Tensor& t, NormProxy proxy, const NormProxyOptions& opt) {
  switch (proxy) {
    case NormProxy::power:
      if (t.order() != 2)
        fail(ErrorCode::invalid_argument, "power proxy is only defined for order 2");
      return spectral_norm_matrix(t, opt.iteration);
    case NormProxy::hopm_lower:
      return spectral_norm_tensor_hopm(t, opt.iteration);
    case NormProxy::net_upper:
      require_cubic(t, "net proxy");
      return net_upper_bound(t, build_epsilon_net(t.dim(0), opt.net_m));
  }
  fail(ErrorCode::invalid_argument, "unknown norm proxy");
}

BoundReport theorem2_verify(const TensorSampler& sampler, const Tensor& mean_tensor, double q,
                            std::size_t trials, std::uint64_t seed, const BoundCheckOptions& opt) {
  require_cubic(mean_tensor, "theorem2_verify");
  if (!(q >= 1)) fail(ErrorCode::invalid_argument, "q must be >= 1");
  if (trials < kMinBoundCheckTrials)
    fail(ErrorCode::invalid_argument, "theorem2_verify needs at least " +
                                          std::to_string(kMinBoundCheckTrials) + " trials");
  const std::size_t d = mean_tensor.order();
  const std::size_t n = mean_tensor.dim(0);
  const NormProxy proxy =
      opt.proxy.value_or(d == 2 ? NormProxy::power : NormProxy::hopm_lower);

  struct Trial {
    double deviation_q = 0;
    std::vector<double> fiber_q;
  };
  std::vector<Trial> results(trials);
  parallel_for(trials, opt.threads, [&](std::size_t k) {
    const Tensor sample = sampler(derive_seed(seed, k));
    if (sample.dims() != mean_tensor.dims())
      fail(ErrorCode::length_mismatch, "sampler produced tensor with wrong dims");
    const Tensor centered(sample.dims(), sample.values() - mean_tensor.values());
    const double dev = estimate_norm(centered, proxy, opt.norm).value;
    Trial& r = results[k];
    r.deviation_q = std::pow(dev, q);
    for (std::size_t j = 0; j < d; ++j) r.fiber_q.push_back(std::pow(max_fiber_sq(sample, j), q / 2.0));
  });

  double dev_sum = 0;
  std::vector<double> fiber_sum(d, 0.0);
  for (const Trial& r : results) {
    dev_sum += r.deviation_q;
    for (std::size_t j = 0; j < d; ++j) fiber_sum[j] += r.fiber_q[j];
  }
  const double count = static_cast<double>(trials);
  double fiber_total = 0;
  for (double f : fiber_sum) fiber_total += f / count;

  const double dd = static_cast<double>(d);
  BoundReport report;
  report.n = n;
  report.d = d;
  report.q = q;
  report.trials = trials;
  report.norm_proxy = proxy;
  report.seed = seed;
  report.lhs_estimate = std::pow(dev_sum / count, 1.0 / q);
  report.rhs_core = std::pow(8.0, dd) *
                    (std::sqrt(dd * std::log(static_cast<double>(n))) + std::sqrt(q)) *
                    std::pow(fiber_total, 1.0 / q);
  report.ratio = report.lhs_estimate == 0.0 ? 0.0 : report.lhs_estimate / report.rhs_core;
  return report;
}

std::string bound_report_csv_header() { return "n,d,q,trials,norm_proxy,lhs,rhs_core,ratio,seed"; }

std::string to_csv_row(const BoundReport& r) {
  std::string row = std::to_string(r.n) + ',' + std::to_string(r.d) + ',' + format_double(r.q) +
                    ',' + std::to_string(r.trials) + ',' + std::string(to_string(r.norm_proxy)) +
                    ',' + format_double(r.lhs_estimate) + ',' + format_double(r.rhs_core) + ',' +
                    format_double(r.ratio) + ',' + std::to_string(r.seed);
  return row;
}

}  // namespace tsparse
