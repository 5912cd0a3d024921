#include <doctest.h>

#include <cmath>

#include "tsparse/bounds.hpp"
#include "tsparse/keyed_rng.hpp"

using namespace tsparse;

namespace {

Tensor random_tensor(Dims dims, std::uint64_t seed) {
  Tensor t(std::move(dims));
  for (std::size_t k = 0; k < t.size(); ++k) {
    const std::size_t key[] = {k};
    t.values()[static_cast<Eigen::Index>(k)] = keyed_gaussian(seed, key);
  }
  return t;
}

// Enumerates every fiber of an order-3 tensor by explicit index loops.
double brute_max_fiber_sq(const Tensor& t, std::size_t mode) {
  const std::size_t n = t.dim(0);
  double best = 0;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) {
      double sum = 0;
      for (std::size_t k = 0; k < n; ++k) {
        std::size_t idx[3];
        idx[mode] = k;
        idx[mode == 0 ? 1 : 0] = a;
        idx[mode == 2 ? 1 : 2] = b;
        sum += t(idx) * t(idx);
      }
      best = std::max(best, sum);
    }
  return best;
}

Tensor rademacher(std::size_t n, std::size_t d, std::uint64_t seed) {
  Tensor t(Dims(d, n));
  for (std::size_t k = 0; k < t.size(); ++k) {
    const std::size_t key[] = {k};
    t.values()[static_cast<Eigen::Index>(k)] = (keyed_u64(seed, key) >> 63) ? 1.0 : -1.0;
  }
  return t;
}

}  // namespace

TEST_CASE("alpha beta examples") {
  Tensor t({2, 2, 2});
  t({0, 0, 0}) = 1;
  t({1, 1, 1}) = 2;
  const AlphaBeta ab = alpha_beta(t);
  CHECK(ab.alpha == 2);
  CHECK(ab.beta == 2);

  const AlphaBeta ones = alpha_beta(Tensor::constant({5, 5}, 1.0));
  CHECK(ones.alpha == doctest::Approx(std::sqrt(5.0)));
  CHECK(ones.beta == 1);

  const Tensor r = random_tensor({3, 3, 3}, 4);
  const AlphaBeta base = alpha_beta(r);
  const AlphaBeta neg = alpha_beta(Tensor(r.dims(), -3.0 * r.values()));
  CHECK(neg.alpha == doctest::Approx(3 * base.alpha).epsilon(1e-14));
  CHECK(neg.beta == doctest::Approx(3 * base.beta).epsilon(1e-14));

  CHECK_THROWS_AS(alpha_beta(random_tensor({2, 3}, 1)), Error);
}

TEST_CASE("alpha beta matches fiber enumeration") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Tensor t = random_tensor({3, 3, 3}, seed + 40);
    const AlphaBeta ab = alpha_beta(t);
    double alpha_sq = 0, beta = 0;
    for (std::size_t mode = 0; mode < 3; ++mode) {
      const double f = brute_max_fiber_sq(t, mode);
      CHECK(ab.per_mode_max_fiber_sq[mode] == doctest::Approx(f).epsilon(1e-14));
      alpha_sq = std::max(alpha_sq, f);
    }
    for (double v : t.values()) beta = std::max(beta, std::fabs(v));
    CHECK(ab.alpha == doctest::Approx(std::sqrt(alpha_sq)).epsilon(1e-14));
    CHECK(ab.beta == beta);
    CHECK(ab.beta <= ab.alpha);
  }
}

TEST_CASE("stable rank") {
  CHECK(stable_rank(5, 5) == 1);
  CHECK(stable_rank(std::sqrt(7.0), 1) == doctest::Approx(7.0));
  CHECK_THROWS_AS(stable_rank(1, 0), Error);
}

TEST_CASE("required sampling budget") {
  const double ln300 = std::log(300.0);
  CHECK(required_s(300, 2, 1, 0.5) ==
        doctest::Approx(8 * 4096 * 300 * ln300 * ln300 * ln300 / 0.25).epsilon(1e-12));
  CHECK(required_s(300, 2, 1, 0.5) == doctest::Approx(7.2965e9).epsilon(1e-4));
  CHECK(required_s(300, 2, 1, 0.25) == 4 * required_s(300, 2, 1, 0.5));
  CHECK(required_s(301, 2, 1, 0.5) >= required_s(300, 2, 1, 0.5));
  CHECK(required_s(300, 3, 1, 0.5) >= required_s(300, 2, 1, 0.5));
  CHECK(required_s(300, 2, 2, 0.5) >= required_s(300, 2, 1, 0.5));
  CHECK(required_s(300, 2, 1, 0.5, 2) >= required_s(300, 2, 1, 0.5));
  CHECK(required_s(300, 2, 1, 0.4) > required_s(300, 2, 1, 0.5));
  CHECK_THROWS_AS(required_s(300, 2, 0, 0.5), Error);
  CHECK_THROWS_AS(required_s(300, 2, 1, 0), Error);
  CHECK(in_budget_regime(300, 2));
  CHECK_FALSE(in_budget_regime(100, 2));
  CHECK_FALSE(in_budget_regime(300, 3));
}

TEST_CASE("bennett tail") {
  CHECK(bennett_tail(2, 3) == doctest::Approx(0.223130).epsilon(1e-6));
  CHECK(bennett_tail(10, 15) == doctest::Approx(5.531e-4).epsilon(1e-3));
  try {
    bennett_tail(1, 0);
    FAIL("expected out of regime");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::out_of_regime);
  }
}

TEST_CASE("moment conversion bounds") {
  CHECK(expectation_bound_a(1, 1, 0, 1) == 4);
  CHECK(expectation_bound_b(0, 1, 0, 2) == doctest::Approx(3 * std::sqrt(2.0)));
  CHECK_THROWS_AS(expectation_bound_a(1, 1, 0, 0.5), Error);
  CHECK_THROWS_AS(expectation_bound_b(1, 1, 0, 0.5), Error);
  // closed form: E (a + b Exp(1))^q for integer q is sum C(q,k) a^(q-k) b^k k!
  for (double a : {0.0, 1.0, 2.0})
    for (double b : {0.0, 1.0, 2.0}) {
      const double m4 = std::pow(a, 4) + 4 * std::pow(a, 3) * b + 12 * a * a * b * b +
                        24 * a * std::pow(b, 3) + 24 * std::pow(b, 4);
      CHECK(m4 <= expectation_bound_a(a, b, 0, 4));
    }
}

TEST_CASE("gaussian slice bound") {
  CHECK(gaussian_slice_bound(Tensor::constant({2, 2, 2}, 1.0), {0, 1}) ==
        doctest::Approx(std::sqrt(2.0)));
  Tensor single({3, 3, 3});
  single({1, 0, 2}) = -0.75;
  CHECK(gaussian_slice_bound(single, {0, 2}) == 0.75);
  CHECK(gaussian_slice_deviation(single, {0, 2}, 1) ==
        doctest::Approx(0.75 + std::sqrt(2.0) * 0.75));
  CHECK_THROWS_AS(gaussian_slice_bound(Tensor::constant({2, 2}, 1.0), {0, 1}), Error);
  CHECK_THROWS_AS(gaussian_slice_bound(single, {1, 1}), Error);
}

TEST_CASE("norm proxy names") {
  for (NormProxy p : {NormProxy::power, NormProxy::hopm_lower, NormProxy::net_upper})
    CHECK(parse_norm_proxy(to_string(p)) == p);
  CHECK(parse_norm_proxy("hopm") == NormProxy::hopm_lower);
  CHECK(parse_norm_proxy("net") == NormProxy::net_upper);
  CHECK_THROWS_AS(parse_norm_proxy("magic"), Error);
}

TEST_CASE("random tensor bound report") {
  const std::size_t n = 10;
  const TensorSampler fixed = [&](std::uint64_t) { return rademacher(n, 2, 1); };
  const BoundReport zero = theorem2_verify(fixed, rademacher(n, 2, 1), 2, 30, 5);
  CHECK(zero.lhs_estimate == 0);
  CHECK(zero.ratio == 0);
  CHECK(zero.rhs_core > 0);

  const TensorSampler rad = [&](std::uint64_t s) { return rademacher(n, 2, s); };
  const TensorSampler rad3 = [&](std::uint64_t s) {
    const Tensor t = rademacher(n, 2, s);
    return Tensor(t.dims(), 3.0 * t.values());
  };
  const double q = std::log(static_cast<double>(n));
  const BoundReport a = theorem2_verify(rad, Tensor(Dims{n, n}), q, 40, 9);
  const BoundReport b = theorem2_verify(rad3, Tensor(Dims{n, n}), q, 40, 9);
  CHECK(a.norm_proxy == NormProxy::power);
  CHECK(a.lhs_estimate > 0);
  CHECK(b.lhs_estimate == doctest::Approx(3 * a.lhs_estimate).epsilon(1e-9));
  CHECK(b.rhs_core == doctest::Approx(3 * a.rhs_core).epsilon(1e-12));
  CHECK(b.ratio == doctest::Approx(a.ratio).epsilon(1e-9));

  // rhs_core from an independent evaluation: every row and column of a sign
  // matrix has square-sum n
  const double rhs = 64 * (std::sqrt(2 * std::log(10.0)) + std::sqrt(q)) *
                     std::pow(2 * std::pow(10.0, q / 2), 1 / q);
  CHECK(a.rhs_core == doctest::Approx(rhs).epsilon(1e-12));

  BoundCheckOptions threaded;
  threaded.threads = 3;
  const BoundReport c = theorem2_verify(rad, Tensor(Dims{n, n}), q, 40, 9, threaded);
  CHECK(to_csv_row(c) == to_csv_row(a));

  CHECK_THROWS_AS(theorem2_verify(rad, Tensor(Dims{n, n}), q, 29, 9), Error);
  CHECK_THROWS_AS(theorem2_verify(rad, Tensor(Dims{n, n}), 0.5, 40, 9), Error);
  CHECK(bound_report_csv_header() == "n,d,q,trials,norm_proxy,lhs,rhs_core,ratio,seed");
}
