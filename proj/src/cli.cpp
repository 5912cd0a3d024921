#include "tsparse/cli.hpp"

#include <cmath>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "tsparse/bounds.hpp"
#include "tsparse/experiments.hpp"
#include "tsparse/parallel.hpp"
#include "tsparse/sparsify.hpp"
#include "tsparse/spectral.hpp"
#include "tsparse/tensor_io.hpp"

namespace tsparse::cli {

namespace {

struct Globals {
  std::uint64_t seed = 0;
  unsigned threads = default_thread_count();
  std::string out;
};

struct GenArgs {
  std::string kind;
  std::size_t n = 0, d = 0;
  int rank = 1;
  double sigma = 0.0, exponent = 1.0;
};

struct SparsifyArgs {
  std::string in, stats;
  double s = 0;
};

struct NormArgs {
  std::string in, method = "power";
  double tol = 1e-10;
  int max_iter = 10000;
  std::optional<int> restarts;
  int net_m = 6;
};

struct SweepArgs {
  std::string in, proxy = "power";
  std::vector<double> s_list;
  std::size_t trials = 20;
  std::optional<int> restarts;
};

struct BennettArgs {
  std::size_t n_vars = 40;
  std::vector<double> t_list;
  std::size_t trials = 100000;
};

struct BoundCheckArgs {
  std::vector<std::size_t> n_list{20, 40, 80};
  std::size_t d = 2;
  std::optional<double> q;
  std::size_t trials = 200;
  std::string generator = "rademacher";
  double max_ratio = 10.0, max_growth = 1.5;
};

struct UnbiasedArgs {
  std::string in;
  double s = 0;
  std::size_t trials = 20000;
};

struct NetArgs {
  std::size_t count = 50, n = 3, d = 3;
  int m = 6;
};

struct MomentArgs {
  std::size_t samples = 1000000;
};

struct SliceArgs {
  std::size_t n = 4, instances = 10, draws = 10000;
};

struct RequiredSArgs {
  std::size_t n = 0, d = 0;
  double st = 0, eps = 0, C = 1.0;
};

std::string pass_fail(bool ok) { return ok ? "PASS" : "FAIL"; }

const std::string& require_out(const Globals& g) {
  if (g.out.empty()) fail(ErrorCode::invalid_argument, "--out is required");
  return g.out;
}

int cmd_gen(const Globals& g, const GenArgs& a, std::ostream& out) {
  GeneratorSpec spec;
  spec.kind = parse_generator_kind(a.kind);
  spec.n = a.n;
  spec.d = a.d;
  spec.rank = a.rank;
  spec.sigma = a.sigma;
  spec.exponent = a.exponent;
  spec.seed = g.seed;
  const Tensor t = gen_random_tensor(spec);
  store_dense(t, require_out(g));
  out << "wrote " << dims_string(t.dims()) << " " << to_string(spec.kind) << " tensor to "
      << g.out << "\n";
  return kExitOk;
}

int cmd_sparsify(const Globals& g, const SparsifyArgs& a, std::ostream& out) {
  const Tensor t = load_dense(a.in);
  const SketchResult r = sparsify(t, a.s, g.seed);
  store_sparse(r.sketch, require_out(g));
  if (!a.stats.empty()) {
    nlohmann::ordered_json j;
    j["kept_large"] = r.counts.kept_large;
    j["zeroed_small"] = r.counts.zeroed_small;
    j["sampled_kept"] = r.counts.middle_sampled_kept;
    j["sampled_dropped"] = r.counts.middle_sampled_dropped;
    j["keep_threshold"] = r.thresholds.keep_threshold;
    j["zero_threshold"] = r.thresholds.zero_threshold;
    j["expected_nnz"] = r.expected_nnz;
    j["seed"] = r.seed;
    write_file(a.stats, j.dump(2) + "\n");
  }
  out << "nnz=" << r.sketch.nnz() << " expected_nnz=" << format_double(r.expected_nnz)
      << " kept_large=" << r.counts.kept_large << " zeroed_small=" << r.counts.zeroed_small
      << " sampled_kept=" << r.counts.middle_sampled_kept
      << " sampled_dropped=" << r.counts.middle_sampled_dropped << "\n";
  return kExitOk;
}

int cmd_norm(const Globals& g, const NormArgs& a, std::ostream& out) {
  const Tensor t = load_dense(a.in);
  IterationOptions opt;
  opt.tol = a.tol;
  opt.max_iter = a.max_iter;
  opt.seed = g.seed;
  SpectralEstimate est;
  if (a.method == "power") {
    opt.restarts = a.restarts.value_or(kDefaultMatrixRestarts);
    est = spectral_norm_matrix(t, opt);
  } else if (a.method == "hopm") {
    opt.restarts = a.restarts.value_or(kDefaultTensorRestarts);
    est = spectral_norm_tensor_hopm(t, opt);
  } else {
    if (!t.cubic()) fail(ErrorCode::non_cubic, "net method needs a cubic tensor");
    est = net_upper_bound(t, build_epsilon_net(t.dim(0), a.net_m));
  }
  out << "value=" << format_double(est.value) << "\n"
      << "direction=" << to_string(est.direction) << "\n"
      << "method=" << to_string(est.method) << "\n"
      << "restarts=" << est.restarts << "\n"
      << "iterations=" << est.iterations << "\n"
      << (est.method == NormMethod::epsilon_net ? "eps=" : "tolerance=")
      << format_double(est.tolerance) << "\n";
  return kExitOk;
}

int cmd_sweep(const Globals& g, const SweepArgs& a, std::ostream& out) {
  const Tensor t = load_dense(a.in);
  SweepOptions opt;
  opt.threads = g.threads;
  opt.norm.iteration.seed = g.seed;
  opt.norm.iteration.restarts =
      a.restarts.value_or(t.order() == 2 ? kDefaultMatrixRestarts : kDefaultTensorRestarts);
  const auto rows = error_sweep(t, a.s_list, a.trials, g.seed, parse_norm_proxy(a.proxy), opt);
  write_file(require_out(g), sweep_csv(rows));
  out << "wrote " << rows.size() << " rows to " << g.out << "\n";
  return kExitOk;
}

int cmd_bennett(const Globals& g, const BennettArgs& a, std::ostream& out) {
  std::vector<double> ts = a.t_list;
  const double sigma_sq = static_cast<double>(a.n_vars) / 4.0;
  if (ts.empty()) ts = {1.5 * sigma_sq, 2.0 * sigma_sq, 3.0 * sigma_sq};
  const BennettReport rep = verify_bennett(a.n_vars, ts, a.trials, g.seed);
  for (const auto& r : rep.rows)
    out << pass_fail(r.pass) << " bennett t=" << format_double(r.t)
        << " empirical=" << format_double(r.empirical) << " bound=" << format_double(r.bound)
        << " se=" << format_double(r.se) << "\n";
  return rep.pass ? kExitOk : kExitFail;
}

int cmd_theorem2(const Globals& g, const BoundCheckArgs& a, std::ostream& out) {
  BoundCheckGenerator gen = BoundCheckGenerator::rademacher;
  if (a.generator == "gaussian")
    gen = BoundCheckGenerator::gaussian;
  else if (a.generator == "deterministic")
    gen = BoundCheckGenerator::deterministic;
  else if (a.generator != "rademacher")
    fail(ErrorCode::invalid_argument, "--generator must be rademacher, gaussian or deterministic");
  std::vector<BoundCheckConfig> configs;
  for (std::size_t n : a.n_list) configs.push_back({gen, n, a.d, a.q, a.trials, std::nullopt});
  const auto reports = verify_theorem2_suite(configs, g.seed, g.threads);
  if (!g.out.empty()) write_file(g.out, bound_reports_csv(reports));
  bool ok = true;
  for (const auto& r : reports) {
    const bool pass = r.ratio <= a.max_ratio;
    ok = ok && pass;
    out << pass_fail(pass) << " theorem2 n=" << r.n << " d=" << r.d << " q=" << format_double(r.q)
        << " lhs=" << format_double(r.lhs_estimate) << " rhs_core=" << format_double(r.rhs_core)
        << " ratio=" << format_double(r.ratio) << "\n";
  }
  const bool growth = bound_ratios_ok(reports, a.max_ratio, a.max_growth);
  out << pass_fail(growth) << " theorem2 ratio growth under n doubling <= "
      << format_double(a.max_growth) << "\n";
  return ok && growth ? kExitOk : kExitFail;
}

int cmd_unbiased(const Globals& g, const UnbiasedArgs& a, std::ostream& out) {
  const Tensor t = load_dense(a.in);
  const auto rows = verify_unbiasedness(t, a.s, a.trials, g.seed);
  bool ok = true;
  for (const auto& r : rows) {
    const bool pass = std::fabs(r.z) < 4.0;
    ok = ok && pass;
    out << pass_fail(pass) << " unbiased index=";
    for (std::size_t k = 0; k < r.index.size(); ++k) out << (k ? "," : "") << r.index[k];
    out << " p=" << format_double(r.p) << " mean=" << format_double(r.mean)
        << " z=" << format_double(r.z) << "\n";
  }
  if (rows.empty()) out << "no middle-band entries at this s\n";
  return ok ? kExitOk : kExitFail;
}

int cmd_lemma_net(const Globals& g, const NetArgs& a, std::ostream& out) {
  const auto rows = verify_net_bracket(a.count, a.n, a.d, a.m, g.seed);
  std::size_t passed = 0;
  for (const auto& r : rows) {
    passed += r.pass ? 1 : 0;
    if (!r.pass)
      out << "FAIL lemma-net instance=" << r.instance << " hopm=" << format_double(r.hopm)
          << " net=" << format_double(r.net) << "\n";
  }
  const bool ok = passed == rows.size();
  out << pass_fail(ok) << " lemma-net " << passed << "/" << rows.size()
      << " instances with hopm <= net bound (eps=" << (rows.empty() ? 0.0 : rows[0].eps) << ")\n";
  return ok ? kExitOk : kExitFail;
}

int cmd_moments(const Globals& g, const MomentArgs& a, std::ostream& out) {
  const auto rows = verify_moment_conversion({0, 1, 2}, {0, 1, 2}, {1, 2, 4}, a.samples, g.seed);
  bool ok = true;
  for (const auto& r : rows) {
    ok = ok && r.pass;
    out << pass_fail(r.pass) << " moments part=" << r.part << " a=" << format_double(r.a)
        << " b=" << format_double(r.b) << " q=" << format_double(r.q)
        << " mc=" << format_double(r.mc_mean) << " bound=" << format_double(r.bound) << "\n";
  }
  return ok ? kExitOk : kExitFail;
}

int cmd_slice(const Globals& g, const SliceArgs& a, std::ostream& out) {
  const auto rows = verify_gaussian_slice(a.n, a.instances, a.draws, g.seed);
  bool ok = true;
  for (const auto& r : rows) {
    ok = ok && r.pass;
    out << pass_fail(r.pass) << " slice instance=" << r.instance
        << " mean=" << format_double(r.mean) << " bound=" << format_double(r.bound)
        << " se=" << format_double(r.se) << "\n";
  }
  return ok ? kExitOk : kExitFail;
}

int cmd_required_s(const RequiredSArgs& a, std::ostream& out) {
  out << format_double(required_s(a.n, a.d, a.st, a.eps, a.C)) << "\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Element-wise tensor sparsification and spectral-norm experiments", "tsparse"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--seed", g.seed, "Random seed (u64)");
  app.add_option("--threads", g.threads, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--out", g.out, "Output path");

  GenArgs gen;
  auto* c_gen = app.add_subcommand("gen", "Generate a random dense tensor");
  c_gen->add_option("--kind", gen.kind, "gaussian|rademacher|low_rank_plus_noise|power_law")->required();
  c_gen->add_option("--n", gen.n, "Dimension per mode")->required();
  c_gen->add_option("--d", gen.d, "Order")->required();
  c_gen->add_option("--rank", gen.rank, "Rank (low_rank_plus_noise)");
  c_gen->add_option("--sigma", gen.sigma, "Noise level (low_rank_plus_noise)");
  c_gen->add_option("--exponent", gen.exponent, "Decay exponent (power_law)");

  SparsifyArgs sp;
  auto* c_sp = app.add_subcommand("sparsify", "Sparsify a dense tensor");
  c_sp->add_option("--in", sp.in, "Dense input")->required();
  c_sp->add_option("--s", sp.s, "Sampling parameter")->required();
  c_sp->add_option("--stats", sp.stats, "JSON statistics output");

  NormArgs nm;
  auto* c_norm = app.add_subcommand("norm", "Estimate the spectral norm of a dense tensor");
  c_norm->add_option("--in", nm.in, "Dense input")->required();
  c_norm->add_option("--method", nm.method, "power|hopm|net")
      ->check(CLI::IsMember({"power", "hopm", "net"}));
  c_norm->add_option("--tol", nm.tol, "Relative convergence tolerance");
  c_norm->add_option("--max-iter", nm.max_iter, "Iteration cap per restart");
  c_norm->add_option("--restarts", nm.restarts, "Random restarts");
  c_norm->add_option("--net-m", nm.net_m, "Net lattice resolution");

  SweepArgs sw;
  auto* c_sweep = app.add_subcommand("sweep", "Relative sketch error over a grid of s");
  c_sweep->add_option("--in", sw.in, "Dense input")->required();
  c_sweep->add_option("--s-list", sw.s_list, "Comma-separated s values")->required()->delimiter(',');
  c_sweep->add_option("--trials", sw.trials, "Trials per s");
  c_sweep->add_option("--norm-proxy", sw.proxy, "power|hopm|net")
      ->check(CLI::IsMember({"power", "hopm", "net"}));
  c_sweep->add_option("--restarts", sw.restarts, "Random restarts per norm estimate");

  auto* c_verify = app.add_subcommand("verify", "Monte Carlo checks");
  c_verify->require_subcommand(1);

  BennettArgs be;
  auto* v_bennett = c_verify->add_subcommand("bennett", "Bennett tail domination");
  v_bennett->add_option("--n-vars", be.n_vars, "Number of summands");
  v_bennett->add_option("--t-list", be.t_list, "Comma-separated thresholds")->delimiter(',');
  v_bennett->add_option("--trials", be.trials, "Monte Carlo trials");

  BoundCheckArgs t2;
  auto* v_t2 = c_verify->add_subcommand("theorem2", "Random-tensor spectral norm bound ratios");
  v_t2->add_option("--n-list", t2.n_list, "Comma-separated n values")->delimiter(',');
  v_t2->add_option("--d", t2.d, "Order");
  v_t2->add_option("--q", t2.q, "Moment order (default ln n)");
  v_t2->add_option("--trials", t2.trials, "Monte Carlo trials");
  v_t2->add_option("--generator", t2.generator, "rademacher|gaussian|deterministic");
  v_t2->add_option("--max-ratio", t2.max_ratio, "Ratio ceiling");
  v_t2->add_option("--max-growth", t2.max_growth, "Growth ceiling under n doubling");

  UnbiasedArgs ub;
  auto* v_unb = c_verify->add_subcommand("unbiased", "Middle-band unbiasedness z-scores");
  v_unb->add_option("--in", ub.in, "Dense input")->required();
  v_unb->add_option("--s", ub.s, "Sampling parameter")->required();
  v_unb->add_option("--trials", ub.trials, "Monte Carlo trials");

  NetArgs na;
  auto* v_net = c_verify->add_subcommand("lemma-net", "HOPM <= epsilon-net bound bracket");
  v_net->add_option("--count", na.count, "Number of random tensors");
  v_net->add_option("--n", na.n, "Dimension");
  v_net->add_option("--d", na.d, "Order");
  v_net->add_option("--m", na.m, "Net lattice resolution");

  MomentArgs mo;
  auto* v_mom = c_verify->add_subcommand("moments", "Moment-conversion bound domination");
  v_mom->add_option("--samples", mo.samples, "Monte Carlo samples");

  SliceArgs sl;
  auto* v_slice = c_verify->add_subcommand("slice", "Fixed-vector Gaussian slice bound");
  v_slice->add_option("--n", sl.n, "Dimension");
  v_slice->add_option("--instances", sl.instances, "Random (A, x, y) instances");
  v_slice->add_option("--draws", sl.draws, "Gaussian draws per instance");

  RequiredSArgs rs;
  auto* c_rs = app.add_subcommand("required-s", "Sampling budget for a target accuracy");
  c_rs->add_option("--n", rs.n, "Dimension")->required();
  c_rs->add_option("--d", rs.d, "Order")->required();
  c_rs->add_option("--st", rs.st, "Stable rank")->required();
  c_rs->add_option("--eps", rs.eps, "Accuracy")->required();
  c_rs->add_option("--C", rs.C, "Leading constant");

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (c_gen->parsed()) return cmd_gen(g, gen, out);
    if (c_sp->parsed()) return cmd_sparsify(g, sp, out);
    if (c_norm->parsed()) return cmd_norm(g, nm, out);
    if (c_sweep->parsed()) return cmd_sweep(g, sw, out);
    if (c_rs->parsed()) return cmd_required_s(rs, out);
    if (v_bennett->parsed()) return cmd_bennett(g, be, out);
    if (v_t2->parsed()) return cmd_theorem2(g, t2, out);
    if (v_unb->parsed()) return cmd_unbiased(g, ub, out);
    if (v_net->parsed()) return cmd_lemma_net(g, na, out);
    if (v_mom->parsed()) return cmd_moments(g, mo, out);
    if (v_slice->parsed()) return cmd_slice(g, sl, out);
  } catch (const Error& e) {
    err << "error [" << to_string(e.code()) << "]: " << e.what() << "\n";
    return kExitUsage;
  }
  err << "error: no command given\n";
  return kExitUsage;
}

}  // namespace tsparse::cli
