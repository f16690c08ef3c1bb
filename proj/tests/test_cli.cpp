#include <gtest/gtest.h>
#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <string>

#include "json.hpp"

namespace {

struct Run {
  int code = -1;
  std::string out;
  nlohmann::ordered_json json() const { return nlohmann::ordered_json::parse(out); }
};

Run run(const std::string& args) {
  std::string cmd = std::string(GCDEG_CLI_PATH) + " " + args + " 2>/dev/null";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string write_temp(const std::string& name, const std::string& body) {
  std::string path = ::testing::TempDir() + name;
  std::ofstream(path) << body;
  return path;
}

double num(const nlohmann::ordered_json& j) { return std::stod(j.get<std::string>()); }

}  // namespace

TEST(Cli, ExampleListsPresets) {
  auto r = run("example");
  ASSERT_EQ(r.code, 0);
  auto j = r.json();
  EXPECT_EQ(j["presets"].size(), 6u);
  auto one = run("example sl2");
  ASSERT_EQ(one.code, 0);
  EXPECT_TRUE(one.json().contains("root_system"));
  EXPECT_EQ(run("example nope").code, 2);
}

TEST(Cli, AnalyzeSl2) {
  auto r = run("analyze --preset sl2");
  ASSERT_EQ(r.code, 0) << r.out;
  auto j = r.json();
  EXPECT_EQ(j["ke_test"]["verdict"], "Stable");
  EXPECT_EQ(j["stability"]["verdict"], "KahlerEinstein");
  EXPECT_NEAR(num(j["minimizer"]["lambda0"][0]), 0.0, 1e-12);
  std::vector<std::string> keys;
  for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
  std::vector<std::string> want{"tool", "input", "tolerances", "root_system", "polytope", "ke_test",
                                "minimizer", "central_fibre", "stability", "h_values", "interpretations"};
  EXPECT_EQ(keys, want);
}

TEST(Cli, AnalyzeCase1) {
  auto j = run("analyze --preset so4-case1").json();
  EXPECT_EQ(j["stability"]["verdict"], "ModifiedKStable");
  EXPECT_EQ(j["central_fibre"]["aut_rank"], 1);
  EXPECT_EQ(j["central_fibre"]["active_roots"][0], "a2");
  double x = num(j["minimizer"]["lambda0"][0]), y = num(j["minimizer"]["lambda0"][1]);
  EXPECT_NEAR(x, -y, 1e-10);
  EXPECT_GT(x, 0.0);
}

TEST(Cli, InputFileMatchesPreset) {
  auto ex = run("example so4-case2");
  ASSERT_EQ(ex.code, 0);
  auto path = write_temp("case2.json", ex.out);
  auto a = run("analyze --input " + path), b = run("analyze --preset so4-case2");
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.json()["minimizer"], b.json()["minimizer"]);
}

TEST(Cli, HEvalAndFiltration) {
  auto h = run("h-eval --preset so4-case1 --lambda 0,0");
  ASSERT_EQ(h.code, 0);
  EXPECT_NEAR(num(h.json()["breakdown"]["h"]), 0.0, 1e-14);
  EXPECT_EQ(run("h-eval --preset so4-case1 --lambda 0,1").code, 3);
  auto f = run("filtration --preset sl2 --f linear:1 --k 1");
  ASSERT_EQ(f.code, 0) << f.out;
  EXPECT_NE(f.out.find("\"-3\""), std::string::npos);
  auto pl = run("h-eval --preset sl2 --f \"pl:0|0;1|1/2\"");
  EXPECT_EQ(pl.code, 0) << pl.out;
}

TEST(Cli, ApproxReportsSandwich) {
  auto r = run("approx --preset sl2 --f linear:1/2 --p 3");
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(r.json()["approximation"]["sandwich_holds"], true);
}

TEST(Cli, TextFormat) {
  auto r = run("--format text minimize --preset sl2");
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("active_set: [a1]"), std::string::npos);
}

TEST(Cli, ErrorExitCodes) {
  auto bad = run("bogus");
  EXPECT_EQ(bad.code, 2);
  EXPECT_EQ(bad.json()["error"]["kind"], "UnknownSubcommand");
  EXPECT_EQ(run("analyze --input " + write_temp("broken.json", "{")).code, 2);
  auto unbounded = write_temp("unbounded.json",
                              R"({"root_system": {"catalog_name": "A1"},
                                  "polytope": {"inequalities": [{"normal": ["-1"], "offset": "0"}]}})");
  auto u = run("analyze --input " + unbounded);
  EXPECT_EQ(u.code, 3);
  EXPECT_EQ(u.json()["error"]["kind"], "Unbounded");
  auto d = run("analyze --preset so4-case1-ineqlist");
  EXPECT_EQ(d.code, 4);
  EXPECT_EQ(d.json()["error"]["kind"], "DivergentMinimizer");
  EXPECT_EQ(d.json()["error"]["stage"], "minimize");
}

TEST(Cli, ThreadCountDoesNotChangeOutput) {
  auto one = run("analyze --preset so4-case1 --mc-check 20000").out;
  setenv("GCDEG_THREADS", "4", 1);
  auto four = run("analyze --preset so4-case1 --mc-check 20000").out;
  unsetenv("GCDEG_THREADS");
  EXPECT_EQ(one, four);
  EXPECT_NE(one.find("\"oracle\""), std::string::npos);
}
