#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

namespace {

const std::string kCli = BPERC_CLI_PATH;
const std::string kCorpus = BPERC_CORPUS_DIR;

struct Run {
  int code{-1};
  std::string out;
};

Run run(const std::string& args) {
  Run r;
  FILE* p = popen((kCli + " " + args + " 2>/dev/null").c_str(), "r");
  if (!p) return r;
  char buf[4096];
  for (std::size_t n; (n = fread(buf, 1, sizeof buf, p)) > 0;) r.out.append(buf, n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

// Output lines that are not '#' header or footer lines.
std::string body(const std::string& out) {
  std::istringstream in(out);
  std::string kept;
  for (std::string line; std::getline(in, line);) {
    if (line.rfind('#', 0) != 0) kept += line + "\n";
  }
  return kept;
}

std::filesystem::path temp_file(const std::string& name, const std::string& text) {
  const auto path = std::filesystem::temp_directory_path() / ("bperc_test_" + name);
  std::ofstream(path) << text;
  return path;
}

}  // namespace

TEST(Cli, ClosureDiagonalPair) {
  const auto r = run("closure --model square --box 2 --infected \"(0,0),(1,1)\"");
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(body(r.out), ".....\n..##.\n..##.\n.....\n.....\n");
  EXPECT_NE(r.out.find("# closure_size: 4"), std::string::npos);
  EXPECT_NE(r.out.find("# config: "), std::string::npos);
}

TEST(Cli, ClosureJsonHasTimes) {
  const auto r = run("closure --model square --box 2 --infected \"(0,0),(1,1)\" --format json");
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["configuration"]["infected"].size(), 4u);
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run("closure --model square --box 2 --infected \"(0,0),(9,1)\"").code, 2);
  EXPECT_EQ(run("closure --model hexagon --box 2 --infected \"(0,0)\"").code, 2);
  EXPECT_EQ(run("tau --model square --n 2 --seed 1").code, 2);
  EXPECT_EQ(run("frobnicate").code, 2);
  EXPECT_EQ(run("verify /nonexistent/file.json").code, 2);
}

TEST(Cli, VerifyCorpusPasses) {
  const auto r = run("verify " + kCorpus);
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("failed: 0"), std::string::npos);
}

TEST(Cli, VerifyReportsFailure) {
  const auto path = temp_file("failing.json", R"({"schema_version": 1, "name": "lonely", "domain": {"kind": "box", "d": 2},
    "neighbourhood": "square", "infected": [[0, 0]], "assertions": [{"type": "closure_equals_domain"}]})");
  const auto r = run("verify " + path.string());
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("FAIL lonely"), std::string::npos) << r.out;
  std::filesystem::remove(path);
}

TEST(Cli, TauIsReproducible) {
  const std::string args = "tau --model square --n 32 --seed 1,2,3,4,5";
  const auto a = run(args + " --threads 1");
  const auto b = run(args + " --threads 4");
  const auto c = run(args);
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(a.out, c.out);
  EXPECT_NE(a.out.find("schema_version,model,n,seed,tau,closure_before,jump_ratio,tau_scaled,wall_ms"),
            std::string::npos);
  EXPECT_EQ(run(args + " --audit").code, 0);
}

TEST(Cli, SweepIsReproducible) {
  const std::string args = "sweep --model square,diamond --n 16,17 --runs 6 --master-seed 5";
  const auto a = run(args + " --threads 1");
  const auto b = run(args + " --threads 8");
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  std::istringstream in(a.out);
  std::size_t rows = 0;
  for (std::string line; std::getline(in, line);) rows += line.rfind("1,", 0) == 0 ? 1 : 0;
  EXPECT_EQ(rows, 24u);
}

TEST(Cli, DropletsUnionMatchesClosure) {
  const std::string sites = "--box 12 --infected \"(0,0),(1,1),(3,2),(4,4),(-5,-5),(-4,-6),(7,-3),(8,-2),(9,-3)\"";
  for (const char* m : {"square", "triangular"}) {
    const auto d = run(std::string("droplets --model ") + m + " " + sites + " --format grid");
    const auto c = run(std::string("closure --model ") + m + " " + sites);
    ASSERT_EQ(d.code, 0);
    EXPECT_EQ(body(d.out), body(c.out)) << m;
    EXPECT_EQ(run(std::string("droplets --check --strategy seeded_random --seed 3 --model ") + m + " " + sites).code, 0);
  }
}

TEST(Cli, ThresholdNamedAndLp) {
  const auto sq4 = nlohmann::json::parse(run("threshold --model square4").out);
  EXPECT_EQ(sq4["threshold"], 17);
  EXPECT_EQ(sq4["offsets"], 41);
  EXPECT_EQ(sq4["stable_set"], "S_square");
  const auto lp = run("threshold --lp 2 --s 8 --critical");
  ASSERT_EQ(lp.code, 0);
  const auto j = nlohmann::json::parse(lp.out);
  const int r = j["threshold"];
  EXPECT_GE(r, 32);
  EXPECT_LE(r, 128);
}

TEST(Cli, ExtendTrace) {
  const auto r = run("extend --model square --q 2 --random 1 --max-steps 5");
  ASSERT_EQ(r.code, 0);
  std::istringstream in(r.out);
  std::string line, last;
  std::size_t count = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    last = line;
    ++count;
  }
  EXPECT_GE(count, 2u);
  EXPECT_TRUE(nlohmann::json::parse(last).contains("termination"));
}

TEST(Cli, GeneratedRectangleFillVerifies) {
  const auto g = run("generate lemma31 --n 64 --eps 0.9");
  ASSERT_EQ(g.code, 0);
  const auto path = temp_file("lemma31.json", g.out);
  EXPECT_EQ(run("verify " + path.string()).code, 0);
  std::filesystem::remove(path);
}
