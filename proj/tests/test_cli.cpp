// Copyright 2026 The composite-forge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(CF_CLI_PATH) + " " + args + " 2>/dev/null";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = fs::temp_directory_path() /
          ("cf_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }
  std::string path(const std::string& name) const { return (dir / name).string(); }
  fs::path dir;
};

}  // namespace

TEST_F(Cli, ConstructIsReproducible) {
  const std::string base = "construct --poly 'poly:[0,1]' --x 300 --two-sided --seed 3";
  ASSERT_EQ(run(base + " --out " + path("a.json") + " --stats " + path("a.csv")).code, 0);
  ASSERT_EQ(run(base + " --out " + path("b.json")).code, 0);
  EXPECT_EQ(slurp(path("a.json")), slurp(path("b.json")));
  const auto j = nlohmann::json::parse(slurp(path("a.json")));
  EXPECT_EQ(j.at("version"), 1);
  EXPECT_EQ(j.at("poly"), "binom:[0,1]");
  const std::string csv = slurp(path("a.csv"));
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "stage,side,primes_used,survivors_before,survivors_after,capacity,seed");
  const auto stdout_run = run(base);
  EXPECT_EQ(stdout_run.code, 0);
  EXPECT_EQ(nlohmann::json::parse(stdout_run.out), j);
}

TEST_F(Cli, ConstructExitCodes) {
  EXPECT_EQ(run("construct --poly 'poly:[0,1]' --x 10 --two-sided").code, 2);
  EXPECT_EQ(run("construct --poly 'poly:[-1,0,1]' --x 300").code, 64);
  EXPECT_EQ(run("construct --poly 'poly:[0,1' --x 300").code, 64);
  EXPECT_EQ(run("construct --poly 'poly:[0,1]' --x 300 --two-sided --n-mode explicit --N 1000").code, 64);
  EXPECT_EQ(run("construct --poly 'poly:[0,1]' --x 300 --n-mode explicit").code, 64);
  EXPECT_EQ(run("construct --poly 'poly:[0,1]' --x 300 --delta 0.9").code, 64);
  EXPECT_EQ(run("construct --poly 'poly:[0,1]' --x 1e3 --two-sided --out " + path("c.json")).code, 0);
  EXPECT_EQ(nlohmann::json::parse(slurp(path("c.json"))).at("params").at("x"), 1000);
}

TEST_F(Cli, VerifyExitCodes) {
  ASSERT_EQ(run("construct --poly 'poly:[1,0,1]' --x 300 --two-sided --out " + path("c.json")).code, 0);
  const auto ok = run("verify " + path("c.json") + " --deep");
  EXPECT_EQ(ok.code, 0);
  EXPECT_TRUE(nlohmann::json::parse(ok.out).at("valid").get<bool>());
  EXPECT_EQ(run("verify " + path("c.json")).code, 0);

  auto j = nlohmann::json::parse(slurp(path("c.json")));
  auto& row = j["stages"][0]["assignments"][0];
  row[1] = (row[1].get<std::uint64_t>() + 1) % row[0].get<std::uint64_t>();
  std::ofstream(path("bad.json")) << j.dump();
  const auto bad = run("verify " + path("bad.json") + " --deep");
  EXPECT_EQ(bad.code, 1);
  EXPECT_FALSE(nlohmann::json::parse(bad.out).at("valid").get<bool>());

  std::ofstream(path("junk.json")) << "{not json";
  EXPECT_EQ(run("verify " + path("junk.json")).code, 1);
  EXPECT_EQ(run("verify " + path("missing.json")).code, 64);
}

TEST_F(Cli, Oracle) {
  const auto r = run("oracle --poly 'poly:[0,1]' --n 100");
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j.at("length"), 7);
  EXPECT_EQ(j.at("start"), 90);
  EXPECT_EQ(run("oracle --poly 'poly:[0,1]' --n 1000000000").code, 64);
}

TEST_F(Cli, Stats) {
  const auto r = run("stats --poly 'poly:[1,0,1]' --x 100,1000,10000");
  ASSERT_EQ(r.code, 0);
  std::istringstream in(r.out);
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  ASSERT_EQ(lines.size(), 4u);
  EXPECT_EQ(lines[0].rfind("x,prime_count,usable_count,", 0), 0u);
  EXPECT_EQ(lines[1].rfind("100,25,", 0), 0u);
  EXPECT_EQ(run("stats --poly 'poly:[1,0,1]' --x ''").code, 64);
  EXPECT_EQ(run("stats --poly 'poly:[1,0,1]' --x 100,abc").code, 64);
}

TEST_F(Cli, SimulateAndUsage) {
  const auto r = run("simulate --trials 2 --seed 5 --out " + path("sim.csv"));
  EXPECT_EQ(r.code, 0);
  const std::string csv = slurp(path("sim.csv"));
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "trial,residual,fraction,ratio");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
  EXPECT_EQ(run("simulate --C1 500").code, 64);
  EXPECT_EQ(run("frobnicate").code, 64);
  EXPECT_EQ(run("construct --bogus").code, 64);
  EXPECT_EQ(run("").code, 64);
}
