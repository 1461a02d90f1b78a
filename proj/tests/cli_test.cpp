#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cfstat/errors.hpp"
#include "commands.hpp"
#include "json_writer.hpp"

using namespace cfstat;
using namespace cfstat::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("cfstat_cli_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::vector<std::string> data_rows(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> rows;
  std::string line;
  int header = 0;
  while (std::getline(in, line)) {
    if (line.rfind("#", 0) == 0) continue;
    if (header++ == 0) continue;
    rows.push_back(line);
  }
  return rows;
}

int run(const std::string& cmd, const ExperimentConfig& c) {
  std::ostringstream log;
  try {
    return run_command(cmd, c, log);
  } catch (const std::exception& e) {
    return exit_code_for(e);
  }
}

}  // namespace

TEST(Cli, EnumerateGaussRowsAreTotientCount) {
  ExperimentConfig c;
  c.denominator_bound = 5;
  c.targets = "1,2";
  c.out = scratch("enum").string();
  ASSERT_EQ(run("enumerate", c), kSuccess);
  const auto rows = data_rows(fs::path(c.out) / "trajectories.csv");
  EXPECT_EQ(rows.size(), 9u);
  EXPECT_EQ(rows.front(), "2,1,1,1.3862943611198906,0,1");
  EXPECT_EQ(slurp(fs::path(c.out) / "trajectories.csv").rfind("# schema: cfstat.trajectories/1\n", 0), 0u);
}

TEST(Cli, EnumerateJacobiPerronSmallBound) {
  ExperimentConfig c;
  c.algorithm = "jp2";
  c.denominator_bound = 2;
  c.out = scratch("jp").string();
  ASSERT_EQ(run("enumerate", c), kSuccess);
  const auto rows = data_rows(fs::path(c.out) / "trajectories.csv");
  std::vector<std::string> prefixes;
  for (const auto& r : rows) prefixes.push_back(r.substr(0, 5));
  for (const char* want : {"2,1,0", "2,1,1", "2,1,2"}) {
    EXPECT_NE(std::find(prefixes.begin(), prefixes.end(), want), prefixes.end()) << want;
  }
}

TEST(Cli, ConfigValidation) {
  ExperimentConfig c;
  c.denominator_bound = 10;
  c.targets = "";
  EXPECT_THROW(validate(c, true), ValidationError);
  c.out = scratch("empty").string();
  EXPECT_EQ(run("enumerate", c), kValidationError);
  EXPECT_FALSE(fs::exists(fs::path(c.out) / "trajectories.csv"));

  ExperimentConfig both;
  both.Q = 5.0;
  both.denominator_bound = 10;
  EXPECT_THROW(validate(both, true), ValidationError);
  ExperimentConfig none;
  EXPECT_THROW(validate(none, true), ValidationError);
  EXPECT_NO_THROW(validate(none, false));
  ExperimentConfig bad;
  bad.Q = -1.0;
  EXPECT_THROW(validate(bad, true), ValidationError);
  ExperimentConfig brun4;
  brun4.algorithm = "brun4";
  brun4.Q = 3.0;
  EXPECT_THROW(validate(brun4, true), ValidationError);
}

TEST(Cli, ConfigFromJson) {
  const auto c = config_from_json(nlohmann::json::parse(
      R"({"algorithm":"brun2","denominator_bound":20,"targets":[1,2],"q_grid":[3,4],"centre":"empirical"})"));
  EXPECT_EQ(c.algorithm, "brun2");
  EXPECT_EQ(*c.denominator_bound, 20);
  EXPECT_EQ(*c.targets, "1,2");
  EXPECT_EQ(c.centre, Centre::empirical);
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"algo":"gauss"})")), ValidationError);
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"Q":"x"})")), ValidationError);
}

TEST(Cli, BudgetExitCode) {
  ExperimentConfig c;
  c.denominator_bound = 100000;
  c.budget = 1000;
  c.out = scratch("budget").string();
  EXPECT_EQ(run("enumerate", c), kResourceBudget);
  EXPECT_EQ(run("stats", c), kResourceBudget);
}

TEST(Cli, CltNeedsTwoGridPoints) {
  ExperimentConfig c;
  c.denominator_bound = 50;
  c.q_grid = {7.0};
  c.centre = Centre::empirical;
  c.out = scratch("cltgrid").string();
  EXPECT_EQ(run("clt", c), kValidationError);
  ExperimentConfig l = c;
  l.q_grid = {5.0, 6.0, 7.0};
  EXPECT_EQ(run("ldp", l), kValidationError);
}

// Same config, different thread counts: byte-identical outputs.
TEST(Cli, OutputsAreDeterministic) {
  for (const std::string cmd : {"stats", "clt", "ldp"}) {
    ExperimentConfig a;
    a.denominator_bound = 300;
    a.targets = "1,2";
    a.q_grid = {7.0, 8.0, 9.0, 10.0};
    a.centre = Centre::empirical;
    a.out = scratch(cmd + "_a").string();
    ExperimentConfig b = a;
    b.threads = 3;
    b.out = scratch(cmd + "_b").string();
    ASSERT_EQ(run(cmd, a), kSuccess) << cmd;
    ASSERT_EQ(run(cmd, b), kSuccess) << cmd;
    for (const auto& f : fs::directory_iterator(a.out)) {
      EXPECT_EQ(slurp(f.path()), slurp(fs::path(b.out) / f.path().filename())) << cmd << " " << f.path();
    }
    const auto j = nlohmann::json::parse(slurp(fs::path(a.out) / "summary.json"));
    EXPECT_EQ(j["schema"], std::string("cfstat.") + cmd + "/1");
    EXPECT_EQ(j["size"], 27397u);
  }
}

TEST(Cli, StatsWithSpectralCentring) {
  ExperimentConfig c;
  c.denominator_bound = 200;
  c.targets = "1";
  c.grid = 128;
  c.jmax = 1000;
  c.q_grid = {8.0, 9.0, 10.0};
  c.out = scratch("clt_spec").string();
  ASSERT_EQ(run("clt", c), kSuccess);
  const auto j = nlohmann::json::parse(slurp(fs::path(c.out) / "summary.json"));
  EXPECT_NEAR(j["lambda_spectral"][0].get<double>(), 0.17489, 1e-4);
  EXPECT_NEAR(j["covariance_spectral"][0][0].get<double>(), 0.2076, 1e-3);
  EXPECT_EQ(j["clt"].size(), 3u);
  EXPECT_EQ(data_rows(fs::path(c.out) / "histogram.csv").size(), 3u * 101u);
}

TEST(Cli, SpectralConstants) {
  ExperimentConfig c;
  c.grid = 128;
  c.jmax = 1000;
  c.out = scratch("spectral").string();
  ASSERT_EQ(run("spectral", c), kSuccess);
  const auto j = nlohmann::json::parse(slurp(fs::path(c.out) / "constants.json"));
  EXPECT_NEAR(j["entropy"]["value"].get<double>(), 2.37314, 1e-2);
  EXPECT_NEAR(j["witnesses"]["values"][0].get<double>(), -0.9624236501192069, 1e-12);
  EXPECT_NEAR(j["witnesses"]["values"][1].get<double>(), -1.7627471740390861, 1e-12);
  EXPECT_EQ(data_rows(fs::path(c.out) / "density.csv").size(), 128u);
}

TEST(Cli, VerifyFaultInjectionFailsMarkovCriterion) {
  ExperimentConfig c;
  c.criteria = {"M"};
  c.out = scratch("verify_ok").string();
  EXPECT_EQ(run("verify", c), kSuccess);
  c.inject_fault = true;
  c.out = scratch("verify_fault").string();
  EXPECT_EQ(run("verify", c), kCriterionFailure);
  const auto report = slurp(fs::path(c.out) / "report.txt");
  EXPECT_NE(report.find("FAIL M"), std::string::npos);
  EXPECT_NE(report.find("branch"), std::string::npos);
  c.criteria = {"A99"};
  EXPECT_EQ(run("verify", c), kValidationError);
}

TEST(JsonWriter, SeventeenSignificantDigits) {
  nlohmann::json j;
  j["x"] = 0.1;
  j["n"] = 3;
  j["bad"] = std::nan("");
  j["v"] = {1.5, 2.0};
  EXPECT_EQ(dump_json(j, 0), "{\"bad\":null,\"n\":3,\"v\":[1.5,2],\"x\":0.10000000000000001}\n");
  EXPECT_EQ(nlohmann::json::parse(dump_json(j))["x"].get<double>(), 0.1);
}
