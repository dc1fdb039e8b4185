/*
 Copyright 2026 The ddrc Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace {

namespace fs = std::filesystem;

int run(const std::string& args) {
    const std::string cmd = std::string(DDRC_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("ddrc_cli_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

TEST(Cli, StabilizationConfigExitsZeroAndWritesGain) {
    const fs::path dir = scratch("stab");
    std::ofstream(dir / "cfg.json") << R"({"design": "stabilize", "audit_samples": 50})";
    EXPECT_EQ(run("synth --quiet --config " + (dir / "cfg.json").string() + " --out " + dir.string()), 0);
    EXPECT_NE(slurp(dir / "result.json").find("\"K\""), std::string::npos);
    EXPECT_TRUE(fs::exists(dir / "report.txt"));
}

TEST(Cli, MixedShortDataExitsTwo) {
    const fs::path dir = scratch("mixed");
    std::ofstream(dir / "cfg.json") << R"({
        "design": "mixed", "horizon": 2,
        "mixed": {"A1": [[0.9, 0.2], [0, 0.8]], "B1": [[0], [1]], "A2": [[0], [0]], "A3": [[1, 0]],
                  "A4": [[0.5]], "B2": [[0]], "Bw1": [[1, 0], [0, 1]], "Bw2": [[0, 0]],
                  "C1": [[1, 0]], "C2": [[1]], "Dw": [[0, 0]], "D": [[0]]}})";
    EXPECT_EQ(run("synth --quiet --config " + (dir / "cfg.json").string() + " --out " + dir.string()), 2);
}

TEST(Cli, BadConfigExitsTwo) {
    const fs::path dir = scratch("bad");
    std::ofstream(dir / "cfg.json") << "{\"horizon\": }";
    EXPECT_EQ(run("synth --quiet --config " + (dir / "cfg.json").string() + " --out " + dir.string()), 2);
    EXPECT_EQ(run("synth --quiet --config " + (dir / "missing.json").string()), 2);
    EXPECT_EQ(run("no-such-command"), 2);
}

TEST(Cli, VerifyReferenceGainExitsZero) {
    const fs::path dir = scratch("verify");
    EXPECT_EQ(run("verify --quiet --gamma 2.4 --out " + dir.string()), 0);
}

TEST(Cli, DemoLargeNoiseExitsOne) {
    const fs::path dir = scratch("demo");
    EXPECT_EQ(run("demo-paper --quiet --wbar 0.05 --out " + dir.string()), 1);
    EXPECT_NE(slurp(dir / "report.txt").find("Infeasible"), std::string::npos);
}

TEST(Cli, SweepIsByteIdenticalOnRerun) {
    const fs::path a = scratch("sweep_a"), b = scratch("sweep_b");
    std::ofstream(a / "cfg.json") << R"({"sweep": {"N_min": 6, "N_max": 8}})";
    const std::string cfg = " --config " + (a / "cfg.json").string();
    EXPECT_EQ(run("fig1-sweep --quiet --trials 1 --seed 5" + cfg + " --out " + a.string()), 0);
    EXPECT_EQ(run("fig1-sweep --quiet --trials 1 --seed 5" + cfg + " --out " + b.string()), 0);
    EXPECT_EQ(slurp(a / "sweep.csv"), slurp(b / "sweep.csv"));
    EXPECT_EQ(slurp(a / "sweep.csv").substr(0, 19), "N,trials,successes\n");
    EXPECT_TRUE(fs::exists(a / "sweep.svg"));
}

}  // namespace
