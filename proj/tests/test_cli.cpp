#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include <json.hpp>

#include "tsparse/cli.hpp"
#include "tsparse/experiments.hpp"
#include "tsparse/tensor_io.hpp"

using namespace tsparse;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("tsparse_cli_" + std::to_string(std::rand()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("required-s prints the budget") {
  const Result r = run_cli({"required-s", "--n", "300", "--d", "2", "--st", "1", "--eps", "0.5"});
  CHECK(r.code == 0);
  CHECK(std::stod(r.out) == doctest::Approx(7.2965e9).epsilon(1e-4));
}

TEST_CASE("usage errors exit with 2") {
  CHECK(run_cli({}).code == 2);
  CHECK(run_cli({"required-s", "--n", "300"}).code == 2);
  CHECK(run_cli({"required-s", "--n", "300", "--d", "2", "--st", "1", "--eps", "0.5", "--bogus"})
            .code == 2);
  CHECK(run_cli({"frobnicate"}).code == 2);
  CHECK(run_cli({"norm", "--in", "x", "--method", "svd"}).code == 2);
  const Result missing = run_cli({"norm", "--in", "/nonexistent/file.dtns"});
  CHECK(missing.code == 2);
  CHECK(missing.err.find("/nonexistent/file.dtns") != std::string::npos);
  CHECK(run_cli({"--help"}).code == 0);
  CHECK(run_cli({"verify", "--help"}).code == 0);
}

TEST_CASE("gen sparsify round trip") {
  TempDir dir;
  CHECK(run_cli({"--seed", "3", "--out", dir / "a.dtns", "gen", "--kind", "gaussian", "--n", "6",
                 "--d", "3"})
            .code == 0);
  GeneratorSpec spec;
  spec.n = 6;
  spec.d = 3;
  spec.seed = 3;
  CHECK(load_dense(dir / "a.dtns") == gen_random_tensor(spec));

  // all-large: every entry equals frob_sq / s
  store_dense(Tensor::constant({3, 3, 3}, -2.0), dir / "flat.dtns");
  const Result r = run_cli({"--out", dir / "flat.txt", "sparsify", "--in", dir / "flat.dtns",
                            "--s", "27", "--stats", dir / "flat.json"});
  CHECK(r.code == 0);
  CHECK(to_dense(load_sparse(dir / "flat.txt")) == Tensor::constant({3, 3, 3}, -2.0));

  const auto stats = nlohmann::ordered_json::parse(read_file(dir / "flat.json"));
  std::vector<std::string> keys;
  for (const auto& [k, v] : stats.items()) keys.push_back(k);
  CHECK(keys == std::vector<std::string>{"kept_large", "zeroed_small", "sampled_kept",
                                         "sampled_dropped", "keep_threshold", "zero_threshold",
                                         "expected_nnz", "seed"});
  CHECK(stats["kept_large"] == 27);
  CHECK(stats["keep_threshold"] == 4.0);
  CHECK(stats["expected_nnz"] == 27.0);
}

TEST_CASE("cli output equals the library call") {
  TempDir dir;
  GeneratorSpec spec;
  spec.n = 8;
  spec.d = 3;
  spec.seed = 1;
  const Tensor t = gen_random_tensor(spec);
  store_dense(t, dir / "t.dtns");
  CHECK(run_cli({"--seed", "99", "--out", dir / "s.txt", "sparsify", "--in", dir / "t.dtns", "--s",
                 "120"})
            .code == 0);
  CHECK(read_file(dir / "s.txt") == encode_sparse(sparsify(t, 120, 99).sketch));
}

TEST_CASE("file outputs are deterministic across runs and thread counts") {
  TempDir dir;
  GeneratorSpec spec;
  spec.n = 10;
  spec.d = 2;
  spec.seed = 4;
  store_dense(gen_random_tensor(spec), dir / "m.dtns");
  const std::vector<std::string> sweep = {"sweep", "--in", dir / "m.dtns", "--s-list", "10,40",
                                          "--trials", "4"};
  auto with = [&](const std::string& threads, const std::string& out) {
    std::vector<std::string> args = {"--seed", "5", "--threads", threads, "--out", out};
    args.insert(args.end(), sweep.begin(), sweep.end());
    return run_cli(args).code;
  };
  CHECK(with("1", dir / "a.csv") == 0);
  CHECK(with("1", dir / "b.csv") == 0);
  CHECK(with("3", dir / "c.csv") == 0);
  const std::string a = read_file(dir / "a.csv");
  CHECK(a == read_file(dir / "b.csv"));
  CHECK(a == read_file(dir / "c.csv"));
  CHECK(a.rfind("s,trial,rel_error,nnz,expected_nnz,seed,norm_proxy\n", 0) == 0);

  const std::vector<std::string> t2 = {"verify", "theorem2", "--n-list", "6,12", "--trials", "30"};
  auto t2_with = [&](const std::string& threads, const std::string& out) {
    std::vector<std::string> args = {"--threads", threads, "--out", out};
    args.insert(args.end(), t2.begin(), t2.end());
    return run_cli(args).code;
  };
  t2_with("1", dir / "t1.csv");
  t2_with("2", dir / "t2.csv");
  CHECK(read_file(dir / "t1.csv") == read_file(dir / "t2.csv"));
}

TEST_CASE("norm and verify subcommands") {
  TempDir dir;
  store_dense(Tensor({2, 2}, (VectorXd(4) << 1, 2, 3, 4).finished()), dir / "m.dtns");
  const Result r = run_cli({"norm", "--in", dir / "m.dtns"});
  CHECK(r.code == 0);
  CHECK(r.out.rfind("value=5.4649", 0) == 0);
  CHECK(r.out.find("direction=converged_estimate") != std::string::npos);

  const Result net = run_cli({"norm", "--in", dir / "m.dtns", "--method", "net", "--net-m", "3"});
  CHECK(net.code == 0);
  CHECK(net.out.find("direction=upper_bound") != std::string::npos);

  const Result b = run_cli({"verify", "bennett", "--trials", "5000"});
  CHECK(b.code == 0);
  CHECK(b.out.find("PASS") != std::string::npos);
  CHECK(b.out.find("FAIL") == std::string::npos);

  store_dense(Tensor({2, 2}, (VectorXd(4) << 3, 0, 0, 4).finished()), dir / "d.dtns");
  const Result u = run_cli({"verify", "unbiased", "--in", dir / "d.dtns", "--s", "2"});
  CHECK(u.code == 0);
  CHECK(u.out.find("index=0,0") != std::string::npos);

  const Result n = run_cli({"verify", "lemma-net", "--count", "3", "--m", "3"});
  CHECK(n.code == 0);
}

TEST_CASE("binary exit codes") {
  const std::string bin = TSPARSE_BIN;
  CHECK(std::system((bin + " required-s --n 300 --d 2 --st 1 --eps 0.5 > /dev/null").c_str()) == 0);
  const int bad = std::system((bin + " required-s --n 300 2> /dev/null").c_str());
  CHECK(WEXITSTATUS(bad) == 2);
}
