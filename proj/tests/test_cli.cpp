#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "support.hpp"
#include "thetafay/cli.hpp"

using namespace tsupport;

namespace {

int cli(std::vector<std::string> args, std::string* errText = nullptr) {
  args.insert(args.begin(), "thetafay");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int rc = run_cli(int(argv.size()), argv.data(), out, err);
  if (errText) *errText = err.str();
  return rc;
}

std::string tmp(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("thetafay-cli-" + name)).string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

J report(const std::string& path) { return J::parse(slurp(path)); }

}  // namespace

TEST_CASE("repeated runs give byte-identical reports") {
  for (std::vector<std::string> cmd :
       {std::vector<std::string>{"check", "--identity", "new", "--surface", config_path("genus2.json"), "--samples",
                                 "30", "--seed", "11"},
        std::vector<std::string>{"solve", "nnls", "--surface", config_path("superelliptic.json")},
        std::vector<std::string>{"kp", "--surface", config_path("genus2.json"), "--za", "2.5"}}) {
    auto a = cmd, b = cmd;
    a.insert(a.end(), {"--out", tmp("rep-a.json")});
    b.insert(b.end(), {"--out", tmp("rep-b.json")});
    REQUIRE(cli(a) == 0);
    REQUIRE(cli(b) == 0);
    CHECK(slurp(tmp("rep-a.json")) == slurp(tmp("rep-b.json")));
  }
  // a different seed changes the sampled arguments
  REQUIRE(cli({"check", "--identity", "new", "--surface", config_path("genus2.json"), "--samples", "30", "--seed", "12",
               "--out", tmp("rep-c.json")}) == 0);
  CHECK(slurp(tmp("rep-a.json")) != slurp(tmp("rep-c.json")));
}

TEST_CASE("report envelope") {
  REQUIRE(cli({"check", "--identity", "degenerate", "--surface", config_path("realg1.json"), "--samples", "10",
               "--seed", "5", "--out", tmp("env.json")}) == 0);
  J r = report(tmp("env.json"));
  CHECK(r.at("tool") == "thetafay");
  CHECK(r.at("version") == kToolVersion);
  CHECK(r.at("seed") == 5);
  CHECK(r.at("status") == "pass");
  CHECK(r.at("violations").empty());
  CHECK(r.at("surfaceHash") == surf("realg1.json").hash());
  CHECK(r.at("tolerances").contains("maxResidual"));
}

TEST_CASE("exit codes") {
  std::string err;
  CHECK(cli({"check", "--identity", "bogus"}, &err) == kExitUsage);
  CHECK(cli({"frobnicate"}) == kExitUsage);
  CHECK(cli({"solve", "nls", "--surface", tmp("missing.json")}) == kExitUsage);
  // not tau-fixed: a caller error
  CHECK(cli({"solve", "nls", "--surface", config_path("realg1.json"), "--za", "1.5"}) == kExitUsage);
  CHECK(cli({"solve", "nls", "--surface", config_path("realg1.json"), "--za", "2.5", "--out", tmp("nls.json")}) ==
        kExitOk);
  CHECK(report(tmp("nls.json")).at("rho") == -1);
}

TEST_CASE("tolerance violations keep the measured values") {
  const std::string out = tmp("tol.json");
  CHECK(cli({"check", "--identity", "new", "--surface", config_path("genus2.json"), "--samples", "10", "--tol", "1e-30",
             "--out", out}) == kExitTolerance);
  J r = report(out);
  CHECK(r.at("status") == "fail");
  CHECK_FALSE(r.at("violations").empty());
  CHECK(r.at("maxResidual").get<double>() > 0.0);
  CHECK(r.at("tolerances").at("maxResidual").get<double>() == 1e-30);
}

TEST_CASE("sign mismatch is a tolerance failure with the computed sign") {
  const std::string out = tmp("ds1.json");
  CHECK(cli({"solve", "ds1", "--surface", config_path("realg1-ds1.json"), "--rho", "-1", "--out", out}) ==
        kExitTolerance);
  J r = report(out);
  CHECK(r.at("computedRho") == 1);
  CHECK(cli({"solve", "ds1", "--surface", config_path("realg1-ds1.json"), "--out", out}) == kExitOk);
}

TEST_CASE("flags override the config file") {
  const std::string cfgPath = tmp("run.json");
  {
    std::ofstream f(cfgPath);
    f << J{{"surface", config_path("genus2.json")}, {"seed", 3}, {"samples", 12}, {"identity", "new"}}.dump();
  }
  REQUIRE(cli({"check", "--config", cfgPath, "--out", tmp("ovr1.json")}) == 0);
  J r1 = report(tmp("ovr1.json"));
  CHECK(r1.at("seed") == 3);
  CHECK(r1.at("zSamples") == 12);
  REQUIRE(cli({"check", "--config", cfgPath, "--seed", "9", "--samples", "4", "--out", tmp("ovr2.json")}) == 0);
  J r2 = report(tmp("ovr2.json"));
  CHECK(r2.at("seed") == 9);
  CHECK(r2.at("zSamples") == 4);
}

TEST_CASE("run() reports through the JSON handle") {
  RunConfig cfg;
  cfg.command = "solve";
  cfg.solution = "ds2";
  cfg.merge(read_bundle("conjg1-tau2.json"), THETAFAY_CONFIG_DIR);
  std::ostringstream log;
  J rep;
  CHECK(run(cfg, log, &rep) == kExitOk);
  CHECK(rep.at("rho") == -1);
  CHECK(rep.at("residual").is_object());
}

TEST_CASE("surface command fills the cache") {
  auto dir = tmp("cache");
  std::filesystem::remove_all(dir);
  REQUIRE(cli({"surface", "--surface", config_path("realg3.json"), "--cache-dir", dir, "--out", tmp("surf.json")}) ==
          0);
  J r = report(tmp("surf.json"));
  REQUIRE(r.contains("cachePath"));
  CHECK(std::filesystem::exists(r.at("cachePath").get<std::string>()));
  CHECK(r.at("realStructure").at("ovals") == 4);
  // tori have nothing to cache but still describe themselves
  CHECK(cli({"surface", "--surface", config_path("genus1-analytic.json"), "--cache-dir", dir, "--out",
             tmp("surf1.json")}) == 0);
  std::filesystem::remove_all(dir);
}

TEST_CASE("field CSV export from the CLI") {
  auto csv = tmp("fields.csv");
  REQUIRE(cli({"solve", "nls", "--surface", config_path("realg1.json"), "--za", "2.5", "--grid-n", "4", "--csv", csv,
               "--out", tmp("csv.json")}) == 0);
  std::ifstream in(csv);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) ++n;
  CHECK(n == 17);
}
