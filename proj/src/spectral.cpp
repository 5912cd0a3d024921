#include "tsparse/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "tsparse/keyed_rng.hpp"

namespace tsparse {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstRowMap = Eigen::Map<const RowMatrix>;

constexpr std::uint64_t kCoveringProbeSeed = 0x6e65742d70726f62ULL;

bool converged(double prev, double cur, double tol) {
  return std::fabs(cur - prev) <= tol * cur;
}

void check_options(const IterationOptions& opt) {
  if (!(opt.tol > 0)) fail(ErrorCode::invalid_argument, "tol must be positive");
  if (opt.max_iter < 1) fail(ErrorCode::invalid_argument, "max_iter must be >= 1");
  if (opt.restarts < 1) fail(ErrorCode::invalid_argument, "restarts must be >= 1");
}

// Contraction of every mode except `keep`, as a vector of length dims[keep].
VectorXd contract_except(const Tensor& t, const std::vector<VectorXd>& xs, std::size_t keep) {
  std::vector<VectorXd> vs;
  std::vector<std::size_t> modes;
  for (std::size_t j = 0; j < t.order(); ++j) {
    if (j == keep) continue;
    vs.push_back(xs[j]);
    modes.push_back(j);
  }
  return multi_contract(t, vs, modes).values();
}

long long gcd_of(const std::vector<int>& v) {
  long long g = 0;
  for (int c : v) g = std::gcd(g, static_cast<long long>(std::abs(c)));
  return g;
}

}  // namespace

std::string_view to_string(BoundDirection d) noexcept {
  switch (d) {
    case BoundDirection::lower_bound: return "lower_bound";
    case BoundDirection::upper_bound: return "upper_bound";
    case BoundDirection::converged_estimate: return "converged_estimate";
  }
  return "unknown";
}

std::string_view to_string(NormMethod m) noexcept {
  switch (m) {
    case NormMethod::power_iteration: return "power_iteration";
    case NormMethod::hopm: return "hopm";
    case NormMethod::epsilon_net: return "epsilon_net";
  }
  return "unknown";
}

VectorXd random_unit_vector(std::size_t n, std::uint64_t seed) {
  VectorXd v(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t key[1] = {i};
    v[static_cast<Eigen::Index>(i)] = keyed_gaussian(seed, key);
  }
  const double norm = v.norm();
  if (norm == 0.0) {
    v.setZero();
    v[0] = 1.0;
    return v;
  }
  return v / norm;
}

SpectralEstimate spectral_norm_matrix(const Tensor& a, const IterationOptions& opt) {
  if (a.order() != 2)
    fail(ErrorCode::invalid_argument, "spectral_norm_matrix needs an order-2 tensor");
  check_options(opt);
  const ConstRowMap m(a.values().data(), static_cast<Eigen::Index>(a.dim(0)),
                      static_cast<Eigen::Index>(a.dim(1)));

  SpectralEstimate est;
  est.method = NormMethod::power_iteration;
  est.restarts = opt.restarts;
  est.tolerance = opt.tol;
  if (a.values().isZero(0.0)) {
    est.direction = BoundDirection::converged_estimate;
    return est;
  }

  bool any_converged = false;
  for (int r = 0; r < opt.restarts; ++r) {
    VectorXd x = random_unit_vector(a.dim(1), derive_seed(opt.seed, static_cast<std::uint64_t>(r)));
    VectorXd z = m * x;
    double sigma = z.norm();
    bool done = false;
    for (int it = 0; it < opt.max_iter && !done; ++it) {
      ++est.iterations;
      const VectorXd y = m.transpose() * z;
      const double ny = y.norm();
      if (ny == 0.0) {
        done = true;
        break;
      }
      x = y / ny;
      z = m * x;
      const double next = z.norm();
      done = converged(sigma, next, opt.tol);
      sigma = next;
    }
    any_converged = any_converged || done;
    if (sigma > est.value) est.value = sigma;
  }
  est.direction = any_converged ? BoundDirection::converged_estimate : BoundDirection::lower_bound;
  return est;
}

SpectralEstimate spectral_norm_tensor_hopm(const Tensor& t, IterationOptions opt) {
  if (t.order() < 2) fail(ErrorCode::invalid_argument, "hopm needs order >= 2");
  check_options(opt);
  SpectralEstimate est;
  est.method = NormMethod::hopm;
  est.restarts = opt.restarts;
  est.tolerance = opt.tol;
  est.direction = BoundDirection::lower_bound;
  if (t.values().isZero(0.0)) {
    est.direction = BoundDirection::converged_estimate;
    return est;
  }

  const std::size_t d = t.order();
  for (int r = 0; r < opt.restarts; ++r) {
    const std::uint64_t restart_seed = derive_seed(opt.seed, static_cast<std::uint64_t>(r));
    std::vector<VectorXd> xs;
    for (std::size_t j = 0; j < d; ++j) xs.push_back(random_unit_vector(t.dim(j), derive_seed(restart_seed, j)));
    double obj = std::fabs(contract_all(t, xs));
    for (int it = 0; it < opt.max_iter; ++it) {
      ++est.iterations;
      double next = 0;
      for (std::size_t j = 0; j < d; ++j) {
        const VectorXd g = contract_except(t, xs, j);
        const double ng = g.norm();
        if (ng > 0.0) xs[j] = g / ng;
        next = ng;
      }
      const bool done = converged(obj, next, opt.tol);
      obj = next;
      if (done) break;
    }
    if (obj > est.value) est.value = obj;
  }
  return est;
}

EpsilonNet build_epsilon_net(std::size_t n, int m) {
  if (n < 1) fail(ErrorCode::invalid_argument, "net dimension must be >= 1");
  if (m < 1) fail(ErrorCode::invalid_argument, "net resolution m must be >= 1");
  if (n > kMaxNetDimension)
    fail(ErrorCode::budget_exceeded, "epsilon-net enumeration is limited to n <= " +
                                         std::to_string(kMaxNetDimension));
  const double lattice = std::pow(2.0 * m + 1.0, static_cast<double>(n));
  if (lattice > 2e7)
    fail(ErrorCode::budget_exceeded, "lattice {-m..m}^n too large to enumerate");

  EpsilonNet net;
  net.n = n;
  net.resolution = m;
  std::vector<int> v(n, -m);
  for (;;) {
    if (gcd_of(v) == 1) {
      VectorXd p(static_cast<Eigen::Index>(n));
      for (std::size_t i = 0; i < n; ++i) p[static_cast<Eigen::Index>(i)] = v[i];
      net.points.push_back(p / p.norm());
    }
    std::size_t k = n;
    while (k > 0 && v[k - 1] == m) v[--k] = -m;
    if (k == 0) break;
    ++v[k - 1];
  }

  RowMatrix pts(static_cast<Eigen::Index>(net.points.size()), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < net.points.size(); ++i) pts.row(static_cast<Eigen::Index>(i)) = net.points[i].transpose();
  double worst = 0;
  for (std::size_t probe = 0; probe < kCoveringProbes; ++probe) {
    const VectorXd u = random_unit_vector(n, derive_seed(kCoveringProbeSeed, probe));
    const double best_dot = std::min(1.0, (pts * u).maxCoeff());
    worst = std::max(worst, std::sqrt(std::max(0.0, 2.0 - 2.0 * best_dot)));
  }
  net.eps = kCoveringInflation * worst;
  if (!(net.eps < 1.0))
    fail(ErrorCode::invalid_argument, "probed covering radius " + std::to_string(net.eps) +
                                          " is not below 1 for n=" + std::to_string(n) +
                                          ", m=" + std::to_string(m) + "; raise m");
  return net;
}

SpectralEstimate net_upper_bound(const Tensor& t, const EpsilonNet& net, std::size_t tuple_budget) {
  if (!t.cubic()) fail(ErrorCode::non_cubic, "net_upper_bound needs a cubic tensor");
  if (t.dim(0) != net.n)
    fail(ErrorCode::length_mismatch, "net dimension " + std::to_string(net.n) +
                                         " does not match tensor dim " + std::to_string(t.dim(0)));
  const std::size_t d = t.order();
  const double tuples = std::pow(static_cast<double>(net.points.size()), static_cast<double>(d - 1));
  if (tuples > static_cast<double>(tuple_budget))
    fail(ErrorCode::budget_exceeded, "net enumeration needs " + std::to_string(tuples) +
                                         " tuples, budget is " + std::to_string(tuple_budget));

  SpectralEstimate est;
  est.method = NormMethod::epsilon_net;
  est.direction = BoundDirection::upper_bound;
  est.tolerance = net.eps;
  est.iterations = static_cast<long>(tuples);

  const auto n = static_cast<Eigen::Index>(net.n);
  RowMatrix pts(static_cast<Eigen::Index>(net.points.size()), n);
  for (std::size_t i = 0; i < net.points.size(); ++i) pts.row(static_cast<Eigen::Index>(i)) = net.points[i].transpose();

  double best = 0;
  // Contract the leading mode against each net point until a matrix is left;
  // the final level is one dense product P * M.
  auto recurse = [&](auto&& self, const Tensor& cur) -> void {
    if (cur.order() == 1) {
      best = std::max(best, cur.values().norm());
      return;
    }
    if (cur.order() == 2) {
      const ConstRowMap mat(cur.values().data(), n, n);
      const RowMatrix rows = pts * mat;
      best = std::max(best, rows.rowwise().norm().maxCoeff());
      return;
    }
    for (const auto& p : net.points) self(self, mode_contract(cur, p, 0));
  };
  recurse(recurse, t);

  est.value = std::pow(1.0 / (1.0 - net.eps), static_cast<double>(d - 1)) * best;
  return est;
}

SphereSplit split_sphere_vector(const VectorXd& x, double lambda) {
  if (!(lambda > 0.0 && lambda <= 1.0))
    fail(ErrorCode::invalid_argument, "lambda must lie in (0, 1]");
  if (x.size() == 0) fail(ErrorCode::invalid_argument, "vector must be non-empty");
  if (x.norm() > 1.0 + 1e-12) fail(ErrorCode::invalid_argument, "vector norm exceeds 1");
  const double tau = 1.0 / std::sqrt(lambda * static_cast<double>(x.size()));
  SphereSplit out{VectorXd::Zero(x.size()), VectorXd::Zero(x.size())};
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (std::fabs(x[i]) >= tau)
      out.sparse[i] = x[i];
    else
      out.spread[i] = x[i];
  }
  return out;
}

}  // namespace tsparse
