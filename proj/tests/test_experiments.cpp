#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "tsparse/experiments.hpp"
#include "tsparse/keyed_rng.hpp"
#include "tsparse/spectral.hpp"

using namespace tsparse;

namespace {

Tensor diag34() {
  Tensor t({2, 2});
  t({0, 0}) = 3;
  t({1, 1}) = 4;
  return t;
}

GeneratorSpec spec(GeneratorKind kind, std::size_t n, std::size_t d, std::uint64_t seed) {
  GeneratorSpec g;
  g.kind = kind;
  g.n = n;
  g.d = d;
  g.seed = seed;
  return g;
}

}  // namespace

TEST_CASE("generators") {
  const Tensor r = gen_random_tensor(spec(GeneratorKind::rademacher, 4, 2, 1));
  CHECK(frobenius_norm_sq(r) == 16);
  for (double v : r.values()) CHECK(std::fabs(v) == 1);

  for (GeneratorKind k : {GeneratorKind::gaussian, GeneratorKind::rademacher,
                          GeneratorKind::low_rank_plus_noise, GeneratorKind::power_law}) {
    CHECK(parse_generator_kind(to_string(k)) == k);
    const Tensor a = gen_random_tensor(spec(k, 5, 3, 9));
    const Tensor b = gen_random_tensor(spec(k, 5, 3, 9));
    CHECK(a == b);
    CHECK_FALSE(a == gen_random_tensor(spec(k, 5, 3, 10)));
  }

  GeneratorSpec lr = spec(GeneratorKind::low_rank_plus_noise, 6, 2, 3);
  const Tensor one = gen_random_tensor(lr);
  const double st = stable_rank(frobenius_norm(one), spectral_norm_matrix(one).value);
  CHECK(std::fabs(st - 1) <= 1e-9);

  GeneratorSpec pl = spec(GeneratorKind::power_law, 3, 2, 5);
  pl.exponent = 1.5;
  const Tensor p = gen_random_tensor(pl);
  std::vector<double> mags;
  for (double v : p.values()) mags.push_back(std::fabs(v));
  std::sort(mags.rbegin(), mags.rend());
  for (std::size_t k = 0; k < mags.size(); ++k)
    CHECK(mags[k] == std::pow(static_cast<double>(k + 1), -1.5));

  CHECK_THROWS_AS(parse_generator_kind("uniform"), Error);
  CHECK_THROWS_AS(gen_random_tensor(spec(GeneratorKind::gaussian, 1, 2, 0)), Error);
  lr.rank = 0;
  CHECK_THROWS_AS(gen_random_tensor(lr), Error);
}

TEST_CASE("sweep rows") {
  const Tensor t = gen_random_tensor(spec(GeneratorKind::gaussian, 12, 2, 4));
  const double frob_sq = frobenius_norm_sq(t);
  double min_sq = frob_sq;
  for (double v : t.values()) min_sq = std::min(min_sq, v * v);
  const double s_all = frob_sq / min_sq * 1.01;

  SweepOptions opt;
  opt.threads = 1;
  const auto rows = error_sweep(t, {20, 80, s_all}, 5, 7, NormProxy::power, opt);
  REQUIRE(rows.size() == 15);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    CHECK(rows[k].trial == k % 5);
    CHECK(rows[k].rel_error >= 0);
    CHECK(rows[k].seed == derive_seed(7, k % 5));
  }
  for (std::size_t k = 10; k < 15; ++k) {
    CHECK(rows[k].rel_error == 0);
    CHECK(rows[k].nnz == t.size());
  }

  opt.threads = 3;
  const auto threaded = error_sweep(t, {20, 80, s_all}, 5, 7, NormProxy::power, opt);
  const std::string csv = sweep_csv(rows);
  CHECK(sweep_csv(threaded) == csv);
  CHECK(csv.rfind("s,trial,rel_error,nnz,expected_nnz,seed,norm_proxy\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 16);
  CHECK(csv.find(" \n") == std::string::npos);

  CHECK_THROWS_AS(error_sweep(gen_random_tensor(spec(GeneratorKind::gaussian, 3, 3, 1)), {5}, 2, 0,
                              NormProxy::power),
                  Error);
}

TEST_CASE("sweep nnz tracks expected nnz") {
  const Tensor t = gen_random_tensor(spec(GeneratorKind::gaussian, 20, 2, 8));
  const double s = 60;
  const Thresholds th = sparsify(t, s, 0).thresholds;
  double var = 0;
  for (double v : t.values())
    if (classify(v * v, th) == EntryClass::middle) {
      const double p = keep_probability(v * v, th);
      var += p * (1 - p);
    }
  const auto rows = error_sweep(t, {s}, 200, 3, NormProxy::power);
  double mean = 0;
  for (const auto& r : rows) mean += static_cast<double>(r.nnz);
  mean /= static_cast<double>(rows.size());
  // mean of 200 draws: standard deviation sqrt(var / 200)
  CHECK(std::fabs(mean - rows[0].expected_nnz) <= 4 * std::sqrt(var / 200));
}

TEST_CASE("hopm relative error sits below the net proxy") {
  const Tensor t = gen_random_tensor(spec(GeneratorKind::gaussian, 4, 3, 12));
  SweepOptions opt;
  opt.norm.net_m = 4;
  const auto lo = error_sweep(t, {10, 30}, 3, 5, NormProxy::hopm_lower, opt);
  const auto hi = error_sweep(t, {10, 30}, 3, 5, NormProxy::net_upper, opt);
  REQUIRE(lo.size() == hi.size());
  for (std::size_t k = 0; k < lo.size(); ++k) CHECK(lo[k].rel_error <= hi[k].rel_error);
}

TEST_CASE("unbiasedness table") {
  const auto rows = verify_unbiasedness(diag34(), 2, 20000, 1);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].index == MultiIndex{0, 0});
  CHECK(rows[0].p == doctest::Approx(0.72));
  CHECK(std::fabs(rows[0].z) < 4);
  CHECK(verify_unbiasedness(Tensor::constant({3, 3}, 1.0), 9, 100, 0).empty());
}

TEST_CASE("bennett driver") {
  const BennettReport rep = verify_bennett(40, {15, 20, 30}, 20000, 2);
  CHECK(rep.sigma_sq == 10);
  REQUIRE(rep.rows.size() == 3);
  CHECK(rep.rows[0].bound == doctest::Approx(std::exp(-7.5)));
  CHECK(rep.rows[0].empirical >= rep.rows[1].empirical);
  CHECK(rep.rows[1].empirical >= rep.rows[2].empirical);
  CHECK(rep.pass);
  CHECK_THROWS_AS(verify_bennett(40, {5}, 100, 2), Error);
}

TEST_CASE("moment and slice drivers") {
  const auto m = verify_moment_conversion({0, 1}, {1, 2}, {1, 2}, 20000, 4);
  CHECK(m.size() == 16);
  for (const auto& r : m) CHECK(r.pass);

  const auto sl = verify_gaussian_slice(3, 3, 2000, 6);
  REQUIRE(sl.size() == 3);
  for (const auto& r : sl) {
    CHECK(r.pass);
    CHECK(r.tails.size() == 3);
  }
}

TEST_CASE("net bracket driver") {
  const auto rows = verify_net_bracket(5, 3, 3, 4, 7);
  REQUIRE(rows.size() == 5);
  for (const auto& r : rows) {
    CHECK(r.pass);
    CHECK(r.hopm <= r.net);
  }
}

TEST_CASE("random tensor bound suite") {
  BoundCheckConfig zero;
  zero.generator = BoundCheckGenerator::deterministic;
  zero.n = 8;
  zero.trials = 30;
  BoundCheckConfig rad;
  rad.n = 8;
  rad.trials = 30;
  const auto reports = verify_theorem2_suite({zero, rad}, 11);
  REQUIRE(reports.size() == 2);
  CHECK(reports[0].ratio == 0);
  CHECK(reports[1].ratio > 0);
  CHECK(reports[1].q == doctest::Approx(std::log(8.0)));
  const std::string csv = bound_reports_csv(reports);
  CHECK(csv == bound_reports_csv(verify_theorem2_suite({zero, rad}, 11, 2)));
  CHECK(csv.rfind("n,d,q,trials,norm_proxy,lhs,rhs_core,ratio,seed\n", 0) == 0);

  BoundReport a, b;
  a.d = b.d = 2;
  a.n = 20;
  b.n = 40;
  a.ratio = 0.1;
  b.ratio = 0.14;
  CHECK(bound_ratios_ok({a, b}));
  b.ratio = 0.16;
  CHECK_FALSE(bound_ratios_ok({a, b}));
  b.ratio = 11;
  CHECK_FALSE(bound_ratios_ok({b}));
}
