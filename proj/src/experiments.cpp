#include "tsparse/experiments.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <numeric>

#include "tsparse/keyed_rng.hpp"
#include "tsparse/parallel.hpp"
#include "tsparse/spectral.hpp"
#include "tsparse/tensor_io.hpp"

namespace tsparse {

namespace {

constexpr double kMaxGeneratedElements = 1e8;

// Sub-stream tags for the generators.
constexpr std::uint64_t kPermutationTag = 1;
constexpr std::uint64_t kSignTag = 2;
constexpr std::uint64_t kFactorTag = 3;
constexpr std::uint64_t kNoiseTag = 4;

double standard_error(double sum, double sum_sq, std::size_t count) {
  const double c = static_cast<double>(count);
  const double mean = sum / c;
  const double var = std::max(0.0, sum_sq / c - mean * mean);
  return std::sqrt(var / c);
}

double frequency_se(double freq, std::size_t count) {
  return std::sqrt(freq * (1.0 - freq) / static_cast<double>(count));
}

}  // namespace

std::string_view to_string(GeneratorKind k) noexcept {
  switch (k) {
    case GeneratorKind::gaussian: return "gaussian";
    case GeneratorKind::rademacher: return "rademacher";
    case GeneratorKind::low_rank_plus_noise: return "low_rank_plus_noise";
    case GeneratorKind::power_law: return "power_law";
  }
  return "unknown";
}

GeneratorKind parse_generator_kind(std::string_view name) {
  if (name == "gaussian") return GeneratorKind::gaussian;
  if (name == "rademacher") return GeneratorKind::rademacher;
  if (name == "low_rank_plus_noise" || name == "low-rank-plus-noise")
    return GeneratorKind::low_rank_plus_noise;
  if (name == "power_law" || name == "power-law") return GeneratorKind::power_law;
  fail(ErrorCode::invalid_argument, "unknown generator kind '" + std::string(name) + "'");
}

Tensor gen_random_tensor(const GeneratorSpec& spec) {
  if (spec.n < 2) fail(ErrorCode::invalid_argument, "generator needs n >= 2");
  if (spec.d < 2) fail(ErrorCode::invalid_argument, "generator needs d >= 2");
  if (std::pow(static_cast<double>(spec.n), static_cast<double>(spec.d)) > kMaxGeneratedElements)
    fail(ErrorCode::budget_exceeded, "n^d exceeds the generator size limit");

  const Dims dims(spec.d, spec.n);
  Tensor t(dims);
  MultiIndex idx(spec.d);
  auto fill = [&](auto&& entry) {
    for (std::size_t off = 0; off < t.size(); ++off) {
      unravel(off, dims, idx);
      t.values()[static_cast<Eigen::Index>(off)] = entry(off, std::span<const std::size_t>(idx));
    }
  };

  switch (spec.kind) {
    case GeneratorKind::gaussian:
      fill([&](std::size_t, std::span<const std::size_t> i) { return keyed_gaussian(spec.seed, i); });
      break;
    case GeneratorKind::rademacher:
      fill([&](std::size_t, std::span<const std::size_t> i) {
        return (keyed_u64(spec.seed, i) >> 63) ? -1.0 : 1.0;
      });
      break;
    case GeneratorKind::low_rank_plus_noise: {
      if (spec.rank < 1) fail(ErrorCode::invalid_argument, "rank must be >= 1");
      if (!(spec.sigma >= 0) || !std::isfinite(spec.sigma))
        fail(ErrorCode::invalid_argument, "sigma must be finite and >= 0");
      const std::uint64_t factor_seed = derive_seed(spec.seed, kFactorTag);
      for (int r = 0; r < spec.rank; ++r) {
        std::vector<VectorXd> factors;
        for (std::size_t j = 0; j < spec.d; ++j)
          factors.push_back(random_unit_vector(spec.n, derive_seed(factor_seed, r * spec.d + j)));
        t.values() += outer_product(factors).values();
      }
      if (spec.sigma > 0) {
        const std::uint64_t noise_seed = derive_seed(spec.seed, kNoiseTag);
        for (std::size_t off = 0; off < t.size(); ++off) {
          unravel(off, dims, idx);
          t.values()[static_cast<Eigen::Index>(off)] += spec.sigma * keyed_gaussian(noise_seed, idx);
        }
      }
      break;
    }
    case GeneratorKind::power_law: {
      if (!(spec.exponent >= 0) || !std::isfinite(spec.exponent))
        fail(ErrorCode::invalid_argument, "exponent must be finite and >= 0");
      const std::uint64_t perm_seed = derive_seed(spec.seed, kPermutationTag);
      const std::uint64_t sign_seed = derive_seed(spec.seed, kSignTag);
      std::vector<std::pair<std::uint64_t, std::size_t>> keys(t.size());
      for (std::size_t off = 0; off < t.size(); ++off) {
        unravel(off, dims, idx);
        keys[off] = {keyed_u64(perm_seed, idx), off};
      }
      std::sort(keys.begin(), keys.end());
      for (std::size_t rank = 0; rank < keys.size(); ++rank) {
        const std::size_t off = keys[rank].second;
        unravel(off, dims, idx);
        const double mag = std::pow(static_cast<double>(rank + 1), -spec.exponent);
        t.values()[static_cast<Eigen::Index>(off)] = (keyed_u64(sign_seed, idx) >> 63) ? -mag : mag;
      }
      break;
    }
  }
  return t;
}

std::vector<SweepRow> error_sweep(const Tensor& t, const std::vector<double>& s_values,
                                  std::size_t trials, std::uint64_t seed, NormProxy proxy,
                                  const SweepOptions& opt) {
  if (!t.cubic()) fail(ErrorCode::non_cubic, "error_sweep needs a cubic tensor");
  if (proxy == NormProxy::power && t.order() != 2)
    fail(ErrorCode::invalid_argument, "power proxy is only defined for order 2");
  const NormProxy reference = t.order() == 2 ? NormProxy::power : NormProxy::hopm_lower;
  const double norm_a = estimate_norm(t, reference, opt.norm).value;
  if (!(norm_a > 0)) fail(ErrorCode::invalid_argument, "error_sweep needs a nonzero tensor");

  std::vector<double> expected(s_values.size());
  for (std::size_t k = 0; k < s_values.size(); ++k) expected[k] = expected_nnz(t, s_values[k]);

  std::vector<SweepRow> rows(s_values.size() * trials);
  parallel_for(rows.size(), opt.threads, [&](std::size_t job) {
    const std::size_t si = job / trials;
    const std::size_t trial = job % trials;
    const std::uint64_t trial_seed = derive_seed(seed, trial);
    const SketchResult sk = sparsify(t, s_values[si], trial_seed);
    const Tensor diff(t.dims(), t.values() - to_dense(sk.sketch).values());
    SweepRow& row = rows[job];
    row.s = s_values[si];
    row.trial = trial;
    row.rel_error = estimate_norm(diff, proxy, opt.norm).value / norm_a;
    row.nnz = sk.sketch.nnz();
    row.expected_nnz = expected[si];
    row.seed = trial_seed;
    row.norm_proxy = proxy;
  });
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = "s,trial,rel_error,nnz,expected_nnz,seed,norm_proxy\n";
  for (const auto& r : rows) {
    out += format_double(r.s) + ',' + std::to_string(r.trial) + ',' + format_double(r.rel_error) +
           ',' + std::to_string(r.nnz) + ',' + format_double(r.expected_nnz) + ',' +
           std::to_string(r.seed) + ',' + std::string(to_string(r.norm_proxy)) + '\n';
  }
  return out;
}

std::vector<UnbiasedRow> verify_unbiasedness(const Tensor& t, double s, std::size_t trials,
                                             std::uint64_t seed) {
  if (trials == 0) fail(ErrorCode::invalid_argument, "trials must be >= 1");
  // Same thresholds sparsify would use, including its exact norm.
  const Thresholds th = sparsify(t, s, seed).thresholds;
  std::vector<UnbiasedRow> out;
  MultiIndex idx(t.order());
  for (std::size_t off = 0; off < t.size(); ++off) {
    const double v = t.values()[static_cast<Eigen::Index>(off)];
    if (v == 0.0 || classify(v * v, th) != EntryClass::middle) continue;
    unravel(off, t.dims(), idx);
    const double p = keep_probability(v * v, th);
    double sum = 0;
    for (std::size_t k = 0; k < trials; ++k)
      if (keyed_keep(derive_seed(seed, k), idx, p)) sum += v / p;
    UnbiasedRow row;
    row.index = idx;
    row.value = v;
    row.p = p;
    row.mean = sum / static_cast<double>(trials);
    const double se = std::fabs(v) * std::sqrt((1.0 - p) / p / static_cast<double>(trials));
    row.z = (row.mean - v) / se;
    out.push_back(std::move(row));
  }
  return out;
}

BennettReport verify_bennett(std::size_t n_vars, const std::vector<double>& t_grid,
                             std::size_t trials, std::uint64_t seed) {
  if (n_vars == 0 || trials == 0) fail(ErrorCode::invalid_argument, "n_vars and trials must be >= 1");
  BennettReport rep;
  rep.n_vars = n_vars;
  rep.sigma_sq = static_cast<double>(n_vars) / 4.0;
  rep.trials = trials;
  std::vector<double> bounds;
  for (double t : t_grid) bounds.push_back(bennett_tail(rep.sigma_sq, t));

  std::vector<std::size_t> exceed(t_grid.size(), 0);
  for (std::size_t k = 0; k < trials; ++k) {
    SplitMix64 gen(derive_seed(seed, k));
    std::size_t ones = 0;
    for (std::size_t left = n_vars; left > 0;) {
      const std::size_t take = std::min<std::size_t>(left, 64);
      std::uint64_t bits = gen();
      if (take < 64) bits &= (std::uint64_t{1} << take) - 1;
      ones += static_cast<std::size_t>(std::popcount(bits));
      left -= take;
    }
    const double sum = static_cast<double>(ones) - 0.5 * static_cast<double>(n_vars);
    for (std::size_t i = 0; i < t_grid.size(); ++i)
      if (sum > t_grid[i]) ++exceed[i];
  }
  rep.pass = true;
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    TailCheck c;
    c.t = t_grid[i];
    c.bound = bounds[i];
    c.empirical = static_cast<double>(exceed[i]) / static_cast<double>(trials);
    c.se = frequency_se(c.empirical, trials);
    c.pass = c.empirical <= c.bound + 3.0 * c.se;
    rep.pass = rep.pass && c.pass;
    rep.rows.push_back(c);
  }
  return rep;
}

std::vector<MomentCheck> verify_moment_conversion(const std::vector<double>& a_grid,
                                                  const std::vector<double>& b_grid,
                                                  const std::vector<double>& q_grid,
                                                  std::size_t samples, std::uint64_t seed) {
  if (samples < 2) fail(ErrorCode::invalid_argument, "samples must be >= 2");
  std::vector<double> expo(samples);
  SplitMix64 gen(seed);
  for (double& e : expo) e = -std::log1p(-gen.uniform53());

  std::vector<MomentCheck> out;
  for (char part : {'a', 'b'})
    for (double a : a_grid)
      for (double b : b_grid)
        for (double q : q_grid) {
          MomentCheck c;
          c.part = part;
          c.a = a;
          c.b = b;
          c.q = q;
          c.bound = part == 'a' ? expectation_bound_a(a, b, 0.0, q) : expectation_bound_b(a, b, 0.0, q);
          double sum = 0, sum_sq = 0;
          for (double e : expo) {
            const double x = a + b * (part == 'a' ? e : std::sqrt(e));
            const double xq = std::pow(x, q);
            sum += xq;
            sum_sq += xq * xq;
          }
          c.mc_mean = sum / static_cast<double>(samples);
          c.se = standard_error(sum, sum_sq, samples);
          c.pass = c.mc_mean <= c.bound + 3.0 * c.se;
          out.push_back(c);
        }
  return out;
}

std::vector<SliceCheck> verify_gaussian_slice(std::size_t n, std::size_t instances,
                                              std::size_t draws, std::uint64_t seed) {
  if (n < 2 || instances == 0 || draws < 2)
    fail(ErrorCode::invalid_argument, "need n >= 2, instances >= 1, draws >= 2");
  const std::array<std::size_t, 2> contracted{0, 1};
  const std::vector<double> t_levels{1.0, 1.5, 2.0};
  std::vector<SliceCheck> out;
  for (std::size_t inst = 0; inst < instances; ++inst) {
    const std::uint64_t inst_seed = derive_seed(seed, inst);
    const Tensor a = gen_random_tensor({GeneratorKind::gaussian, n, 3, 1, 0, 1, derive_seed(inst_seed, 0)});
    const VectorXd x = random_unit_vector(n, derive_seed(inst_seed, 1));
    const VectorXd y = random_unit_vector(n, derive_seed(inst_seed, 2));
    const std::uint64_t draw_seed = derive_seed(inst_seed, 3);

    SliceCheck c;
    c.instance = inst;
    c.bound = gaussian_slice_bound(a, contracted);
    std::vector<double> levels;
    for (double t : t_levels) levels.push_back(gaussian_slice_deviation(a, contracted, t));
    std::vector<std::size_t> exceed(levels.size(), 0);

    double sum = 0, sum_sq = 0;
    Tensor h(a.dims());
    MultiIndex idx(3);
    for (std::size_t k = 0; k < draws; ++k) {
      const std::uint64_t g_seed = derive_seed(draw_seed, k);
      for (std::size_t off = 0; off < a.size(); ++off) {
        unravel(off, a.dims(), idx);
        h.values()[static_cast<Eigen::Index>(off)] =
            keyed_gaussian(g_seed, idx) * a.values()[static_cast<Eigen::Index>(off)];
      }
      const double norm = multi_contract(h, {x, y}, std::vector<std::size_t>{0, 1}).values().norm();
      sum += norm;
      sum_sq += norm * norm;
      for (std::size_t i = 0; i < levels.size(); ++i)
        if (norm >= levels[i]) ++exceed[i];
    }
    c.mean = sum / static_cast<double>(draws);
    c.se = standard_error(sum, sum_sq, draws);
    c.mean_pass = c.mean <= c.bound + 3.0 * c.se;
    c.pass = c.mean_pass;
    for (std::size_t i = 0; i < levels.size(); ++i) {
      TailCheck tc;
      tc.t = t_levels[i];
      tc.bound = std::exp(-t_levels[i] * t_levels[i]);
      tc.empirical = static_cast<double>(exceed[i]) / static_cast<double>(draws);
      tc.se = frequency_se(tc.empirical, draws);
      tc.pass = tc.empirical <= tc.bound + 3.0 * tc.se;
      c.pass = c.pass && tc.pass;
      c.tails.push_back(tc);
    }
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<NetBracketRow> verify_net_bracket(std::size_t count, std::size_t n, std::size_t d,
                                              int m, std::uint64_t seed,
                                              const IterationOptions& hopm) {
  const EpsilonNet net = build_epsilon_net(n, m);
  std::vector<NetBracketRow> out;
  for (std::size_t i = 0; i < count; ++i) {
    const Tensor t = gen_random_tensor({GeneratorKind::gaussian, n, d, 1, 0, 1, derive_seed(seed, i)});
    IterationOptions opt = hopm;
    opt.seed = derive_seed(seed ^ 0x686f706dULL, i);
    NetBracketRow row;
    row.instance = i;
    row.hopm = spectral_norm_tensor_hopm(t, opt).value;
    row.net = net_upper_bound(t, net).value;
    row.eps = net.eps;
    row.pass = row.hopm <= row.net;
    out.push_back(row);
  }
  return out;
}

std::vector<BoundReport> verify_theorem2_suite(const std::vector<BoundCheckConfig>& configs,
                                               std::uint64_t seed, unsigned threads) {
  std::vector<BoundReport> out;
  for (std::size_t c = 0; c < configs.size(); ++c) {
    const BoundCheckConfig& cfg = configs[c];
    const std::uint64_t config_seed = derive_seed(seed, c);
    const Dims dims(cfg.d, cfg.n);
    Tensor mean(dims);
    TensorSampler sampler;
    switch (cfg.generator) {
      case BoundCheckGenerator::rademacher:
      case BoundCheckGenerator::gaussian: {
        const GeneratorKind kind = cfg.generator == BoundCheckGenerator::rademacher
                                       ? GeneratorKind::rademacher
                                       : GeneratorKind::gaussian;
        sampler = [kind, cfg](std::uint64_t s) {
          return gen_random_tensor({kind, cfg.n, cfg.d, 1, 0, 1, s});
        };
        break;
      }
      case BoundCheckGenerator::deterministic:
        mean = gen_random_tensor({GeneratorKind::rademacher, cfg.n, cfg.d, 1, 0, 1, config_seed});
        sampler = [mean](std::uint64_t) { return mean; };
        break;
    }
    const double q = cfg.q.value_or(std::log(static_cast<double>(cfg.n)));
    BoundCheckOptions opt;
    opt.proxy = cfg.proxy;
    opt.threads = threads;
    out.push_back(theorem2_verify(sampler, mean, q, cfg.trials, config_seed, opt));
  }
  return out;
}

std::string bound_reports_csv(const std::vector<BoundReport>& reports) {
  std::string out = bound_report_csv_header() + '\n';
  for (const auto& r : reports) out += to_csv_row(r) + '\n';
  return out;
}

bool bound_ratios_ok(const std::vector<BoundReport>& reports, double max_ratio,
                        double max_growth) {
  for (const auto& r : reports)
    if (!(r.ratio <= max_ratio)) return false;
  for (const auto& small : reports)
    for (const auto& big : reports)
      if (big.d == small.d && big.n == 2 * small.n && small.ratio > 0 &&
          !(big.ratio / small.ratio <= max_growth))
        return false;
  return true;
}

}  // namespace tsparse
