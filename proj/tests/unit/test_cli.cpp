#include <doctest.h>

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dfa/cli.hpp"
#include "dfa/io.hpp"
#include "dfa/panel.hpp"
#include "fixtures.hpp"

using namespace dfa;
using namespace dfa::testing;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = 0;
  std::string out, err;
};

Outcome run_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  Outcome o;
  o.code = cli::run(args, out, err);
  o.out = out.str();
  o.err = err.str();
  return o;
}

class TempDir {
 public:
  TempDir() {
    std::string pattern = (fs::temp_directory_path() / "dfa_cli_XXXXXX").string();
    path_ = ::mkdtemp(pattern.data());
  }
  ~TempDir() { fs::remove_all(path_); }
  fs::path operator/(const std::string& name) const { return path_ / name; }
  std::string str(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void write_small_params(const fs::path& path) {
  Rng rng(101);
  io::ParamsFile file;
  file.spec = {1, 1, 1, 4};
  file.params = random_params(rng, file.spec);
  file.params.beta.col(0) *= 2.0;
  io::write_params(file, path);
}

}  // namespace

TEST_CASE("usage failures exit with code 2 and a JSON error line") {
  const Outcome none = run_cli({});
  CHECK(none.code == cli::kExitUsage);
  const Outcome unknown = run_cli({"frobnicate"});
  CHECK(unknown.code == cli::kExitUsage);
  const auto j = nlohmann::json::parse(unknown.err);
  CHECK(j.at("error") == "usage");
  CHECK(j.at("exit_code") == 2);
  CHECK(j.at("message").get<std::string>().find("frobnicate") != std::string::npos);
  CHECK(run_cli({"ic", "--input", "/nonexistent.csv"}).code == cli::kExitUsage);
  CHECK(run_cli({"fit", "--n", "0", "--input", "/nonexistent.csv"}).code == cli::kExitUsage);
}

TEST_CASE("help and version exit cleanly") {
  CHECK(run_cli({"--help"}).code == cli::kExitOk);
  const Outcome v = run_cli({"--version"});
  CHECK(v.code == cli::kExitOk);
  CHECK_FALSE(v.out.empty());
}

TEST_CASE("malformed data exits with code 3") {
  TempDir dir;
  io::write_text(dir / "prices.csv", "date,A\n2020-01-02,1\n2020-01-02,2\n");
  const Outcome o = run_cli({"clean", "--input", dir.str("prices.csv"), "--out", dir.str("o")});
  CHECK(o.code == cli::kExitData);
  CHECK(nlohmann::json::parse(o.err).at("error") == "data");
}

TEST_CASE("clean writes returns and honours the output directory variable") {
  TempDir dir;
  io::write_text(dir / "prices.csv", "date,A,B\n2020-01-02,100,10\n2020-01-03,101,\n2020-01-06,99,11\n2020-01-07,98,12\n");
  ::setenv(cli::kOutDirEnv, dir.str("env_out").c_str(), 1);
  const Outcome o = run_cli({"clean", "--input", dir.str("prices.csv"), "--threshold", "0.3"});
  ::unsetenv(cli::kOutDirEnv);
  REQUIRE(o.code == cli::kExitOk);
  const ReturnsPanel r = load_returns_csv(dir / "env_out/returns.csv");
  CHECK(r.tickers == std::vector<std::string>{"A", "B"});
  CHECK(r.rows() == 3);
  CHECK(fs::exists(dir / "env_out/cleaning.csv"));
}

TEST_CASE("the scripted pipeline runs end to end") {
  TempDir dir;
  write_small_params(dir / "truth.json");
  REQUIRE(run_cli({"simulate", "--params", dir.str("truth.json"), "--t", "1100", "--seed", "5", "--out", dir.str("sim")})
              .code == 0);
  CHECK(fs::exists(dir / "sim/prices.csv"));
  CHECK(fs::exists(dir / "sim/factors_true.csv"));

  REQUIRE(run_cli({"clean", "--input", dir.str("sim/prices.csv"), "--out", dir.str("clean")}).code == 0);
  const std::string returns = dir.str("clean/returns.csv");
  REQUIRE(run_cli({"ic", "--input", returns, "--n-max", "3", "--out", dir.str("ic")}).code == 0);
  CHECK(slurp(dir / "ic/criteria.csv").rfind("n,", 0) == 0);
  REQUIRE(run_cli({"pca", "--input", returns, "--k", "2", "--out", dir.str("pca")}).code == 0);
  CHECK(fs::exists(dir / "pca/components.csv"));

  REQUIRE(run_cli({"fit", "--n", "1", "--p", "3", "--q", "5", "--input", returns, "--out", dir.str("run1"),
                   "--max-iter", "60"})
              .code == 0);
  CHECK(io::read_params(dir / "run1/params.json").spec == DFMSpec{1, 3, 5, 4});
  CHECK(fs::exists(dir / "run1/factors_smoothed.csv"));
  CHECK(fs::exists(dir / "run1/factors_filtered.csv"));
  CHECK(fs::exists(dir / "run1/loadings.csv"));

  const Outcome both = run_cli({"fit", "--n", "1", "--p", "1", "--auto-order", "--input", returns});
  CHECK(both.code == cli::kExitUsage);

  io::write_text(dir / "market.csv", [&] {
    const auto prices = load_price_csv(dir / "sim/prices.csv");
    std::string text = "date,index\n";
    for (Eigen::Index t = 0; t < prices.rows(); ++t)
      text += format_date(prices.dates[static_cast<std::size_t>(t)]) + "," + std::to_string(prices.prices.row(t).mean()) + "\n";
    return text;
  }());
  REQUIRE(run_cli({"capm", "--input", returns, "--market", dir.str("market.csv"), "--out", dir.str("capm")}).code == 0);
  const Outcome diag = run_cli({"--json", "diagnose", "--input", returns, "--params", dir.str("run1/params.json"),
                                "--market", dir.str("market.csv"), "--out", dir.str("diag")});
  REQUIRE(diag.code == 0);
  const auto corr = nlohmann::json::parse(slurp(dir / "diag/correlations.json"));
  CHECK(corr.is_array());
  CHECK(corr.size() >= 3);

  std::string gdp = "year,quarter,growth\n";
  double g = 6.0;
  for (int year = 2015; year <= 2018; ++year)
    for (int q = 1; q <= 4; ++q) gdp += std::to_string(year) + "," + std::to_string(q) + "," + std::to_string(g = 3.0 + 0.5 * g + 0.3 * q) + "\n";
  io::write_text(dir / "gdp.csv", gdp);
  const Outcome now = run_cli({"nowcast", "--gdp", dir.str("gdp.csv"), "--params", dir.str("run1/params.json"),
                               "--input", returns, "--train", "2015Q2:2017Q4", "--test", "2018Q1:2018Q4", "--out",
                               dir.str("now")});
  INFO(now.err);
  REQUIRE(now.code == 0);
  CHECK(fs::exists(dir / "now/rmse.csv"));
  CHECK(fs::exists(dir / "now/predictions.csv"));
  CHECK(run_cli({"nowcast", "--gdp", dir.str("gdp.csv"), "--params", dir.str("run1/params.json"), "--input", returns,
                 "--train", "2015Q2-2017Q4", "--test", "2018Q1:2018Q4", "--out", dir.str("now2")})
            .code == cli::kExitUsage);
}

TEST_CASE("re-running a subcommand produces byte-identical output") {
  TempDir dir;
  write_small_params(dir / "truth.json");
  for (const char* sub : {"a", "b"}) {
    REQUIRE(run_cli({"simulate", "--params", dir.str("truth.json"), "--t", "200", "--seed", "9", "--out",
                     dir.str(std::string("sim_") + sub)})
                .code == 0);
    REQUIRE(run_cli({"ic", "--input", dir.str(std::string("sim_") + sub + "/returns.csv"), "--n-max", "2", "--out",
                     dir.str(std::string("ic_") + sub)})
                .code == 0);
  }
  CHECK(slurp(dir / "sim_a/returns.csv") == slurp(dir / "sim_b/returns.csv"));
  CHECK(slurp(dir / "ic_a/criteria.csv") == slurp(dir / "ic_b/criteria.csv"));
}
