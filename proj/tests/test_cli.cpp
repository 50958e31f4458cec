#include <gtest/gtest.h>

#include <json.hpp>

#include <sys/wait.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <string>

#include "htbif/io.hpp"

namespace {

struct Invocation {
  int status = -1;
  std::string out;
};

Invocation run(const std::string& args, bool merge_stderr = false) {
  const std::string cmd =
      std::string("\"") + HTBIF_CLI_PATH + "\" " + args + (merge_stderr ? " 2>&1" : " 2>/dev/null");
  Invocation r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf{};
  std::size_t got;
  while ((got = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), got);
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST(Cli, CriticalValuesCsv) {
  const Invocation r = run("critical --b 1 --d 1");
  ASSERT_EQ(r.status, 0);
  const htbif::CsvTable t = htbif::parse_csv(r.out);
  EXPECT_EQ(t.header(), (std::vector<std::string>{"kappa", "mu_kappa", "lambda_double_root"}));
  ASSERT_GE(t.rows().size(), 3u);
  const double pi2 = std::numbers::pi * std::numbers::pi;
  EXPECT_NEAR(std::stod(t.rows()[1][1]), 4 * pi2, 1e-12 * 4 * pi2);
  EXPECT_NEAR(std::stod(t.rows()[2][2]), 8 * pi2, 1e-12 * 8 * pi2);
}

TEST(Cli, MissingMuNamesTheFlag) {
  const Invocation r = run("nodal --lambda 25", true);
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.out.find("--mu"), std::string::npos) << r.out;
}

TEST(Cli, OutOfWindowLambdaIsReported) {
  const Invocation r = run("nodal --mu 50 --lambda 10", true);
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.out.find("--lambda"), std::string::npos) << r.out;
}

TEST(Cli, BadOutputNamesTheFlag) {
  const Invocation r = run("timemap --mu 50 -o /nonexistent-dir/t.csv", true);
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.out.find("--output"), std::string::npos) << r.out;
}

TEST(Cli, TimeMapIsDeterministicAndDecreasing) {
  const Invocation a = run("timemap --mu 50 --lambda 25 --count 40");
  const Invocation b = run("timemap --mu 50 --lambda 25 --count 40");
  ASSERT_EQ(a.status, 0);
  EXPECT_EQ(a.out, b.out);
  const htbif::CsvTable t = htbif::parse_csv(a.out);
  EXPECT_EQ(t.header(), (std::vector<std::string>{"w_minus", "w_plus", "T", "energy_level"}));
  ASSERT_EQ(t.rows().size(), 40u);
  for (std::size_t i = 1; i < t.rows().size(); ++i)
    EXPECT_LT(std::stod(t.rows()[i][2]), std::stod(t.rows()[i - 1][2]));
}

TEST(Cli, NodalJson) {
  const Invocation r = run("nodal --mu 50 --lambda 25 --n-points 201 --format json");
  ASSERT_EQ(r.status, 0);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["schema"], htbif::kSchema);
  ASSERT_EQ(j["solutions"].size(), 2u);
  EXPECT_EQ(j["solutions"][0]["w"].size(), 201u);
  EXPECT_EQ(j["solutions"][0]["crossings"], 1);
}

TEST(Cli, DiagramContainsFirstLoop) {
  const Invocation r = run("diagram --mu 50 --n-lambda 10 --n-points 401");
  ASSERT_EQ(r.status, 0);
  EXPECT_NE(r.out.find("id=\"loop-1\""), std::string::npos);
  EXPECT_EQ(r.out.find("id=\"loop-2\""), std::string::npos);
}

TEST(Cli, MorseCsv) {
  const Invocation r = run("morse --mu 50 --n-lambda 6 --n-points 401");
  ASSERT_EQ(r.status, 0);
  const htbif::CsvTable t = htbif::parse_csv(r.out);
  EXPECT_EQ(t.header(),
            (std::vector<std::string>{"lambda", "branch", "morse_index", "tau_low", "tau_high"}));
  ASSERT_EQ(t.rows().size(), 18u);
  for (const auto& row : t.rows()) EXPECT_EQ(row[2], row[1] == "constant" ? "2" : "1");
}

TEST(Cli, BifurcationDirectionJson) {
  const Invocation r = run("bifdir --mu 50 --side plus --n-points 801");
  ASSERT_EQ(r.status, 0);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["side"], "plus");
  EXPECT_LT(j["eta2_estimate"].get<double>(), 0.0);
}

TEST(Cli, CensusJsonAndOutputFile) {
  const auto path = temp_file("htbif_cli_census.json");
  const Invocation r = run("census --mu 50 --lambda 25 --eps 1e-3 --n-points 401 -o " + path.string());
  ASSERT_EQ(r.status, 0);
  std::ifstream f(path);
  const auto j = nlohmann::json::parse(f);
  EXPECT_EQ(j["distinct_count"], 3);
  EXPECT_EQ(j["crossings_preserved"], true);
  std::filesystem::remove(path);
}

TEST(Cli, ConfigFileSuppliesValues) {
  const auto path = temp_file("htbif_cli_config.toml");
  {
    std::ofstream f(path);
    f << "[nodal]\nmu = 50\nlambda = 25\n";
  }
  const Invocation via_config = run("--config " + path.string() + " nodal --n-points 101");
  const Invocation via_flags = run("nodal --mu 50 --lambda 25 --n-points 101");
  std::filesystem::remove(path);
  ASSERT_EQ(via_flags.status, 0);
  EXPECT_EQ(via_config.status, 0);
  EXPECT_EQ(via_config.out, via_flags.out);
}

TEST(Cli, NoSubcommandIsAnError) {
  const Invocation r = run("", true);
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.out.find("--help"), std::string::npos);
  EXPECT_NE(run("--help").out.find("Subcommands"), std::string::npos);
}
