#include "hive/pipeline.hpp"
#include "hive/util.hpp"

#include "fixtures.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <sys/wait.h>

using namespace hive;
using namespace hive::testing;
namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code;
  std::string output;
};

CliResult cli(const std::string& args) {
  std::string cmd = std::string(HIVE_CLI_PATH) + " " + args + " 2>&1";
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) throw std::runtime_error("popen failed");
  std::string out;
  char buf[4096];
  while (size_t n = fread(buf, 1, sizeof buf, p)) out.append(buf, n);
  int status = pclose(p);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string tlc_args(const std::string& design, const std::string& out) {
  return "run --design " + fixture("tlc/" + design) + " --scenarios " + fixture("tlc/scenarios") + " --specs " +
         fixture("tlc/specs") + " --out " + out;
}

// Relative path -> contents for every file under `root`, skipping metadata/.
std::map<std::string, std::string> snapshot(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    std::string rel = fs::relative(e.path(), root).string();
    if (starts_with(rel, "metadata/")) continue;
    out[rel] = read_file(e.path().string());
  }
  return out;
}

}  // namespace

TEST(Config, ValidationNamesTheMissingPath) {
  PipelineConfig c;
  c.design = fixture("tlc/tlc.hnl");
  c.scenarios_dir = fixture("tlc/scenarios");
  c.specs_dir = fixture("tlc/no-such-dir");
  c.out_dir = "/tmp/unused";
  try {
    validate_config(c);
    FAIL() << "expected a config error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("no-such-dir"), std::string::npos);
  }
  c.specs_dir = fixture("tlc/specs");
  EXPECT_NO_THROW(validate_config(c));
  c.jobs = 0;
  EXPECT_THROW(validate_config(c), Error);
}

TEST(Config, ProofDepthFollowsScenarioThenDivisor) {
  Scenario sc;
  sc.run_cycles = 40;
  EXPECT_EQ(proof_depth(sc, 4, 160), 10u);
  sc.proof_depth = 30;
  EXPECT_EQ(proof_depth(sc, 4, 160), 30u);
  EXPECT_EQ(proof_depth(sc, 4, 12), 12u);  // never deeper than hint verification
  sc.proof_depth.reset();
  sc.run_cycles = 2;
  EXPECT_EQ(proof_depth(sc, 4, 160), 1u);
}

TEST(Config, SpecsAreSelectedByScenario) {
  Scenario s1 = load_scenario(fixture("tlc_soc/scenarios/s1.json"));
  auto specs = spec_files_for(s1, fixture("tlc_soc/specs"));
  ASSERT_EQ(specs.size(), 1u);
  EXPECT_TRUE(specs[0].ends_with("s1_uart.spec.json"));
}

TEST(Cli, MissingSpecDirectoryIsAToolError) {
  TempDir tmp;
  CliResult r = cli("run --design " + fixture("tlc/tlc.hnl") + " --scenarios " + fixture("tlc/scenarios") +
                    " --specs " + fixture("tlc/absent") + " --out " + tmp / "out");
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.output.find("spec directory"), std::string::npos) << r.output;
}

TEST(Cli, BadArgumentsAreAToolError) {
  EXPECT_EQ(cli("frobnicate").code, 3);
  EXPECT_EQ(cli("rank --trace").code, 3);
  EXPECT_EQ(cli("--help").code, 0);
}

TEST(Cli, ExitCodesReflectVerdicts) {
  TempDir tmp;
  CliResult ok = cli(tlc_args("tlc.hnl", tmp / "ok"));
  EXPECT_EQ(ok.code, 0) << ok.output;
  EXPECT_NE(ok.output.find("Result: 1 pass, 0 fail, 0 unknown"), std::string::npos) << ok.output;
  CliResult bad = cli(tlc_args("tlc_mutant.hnl", tmp / "bad"));
  EXPECT_EQ(bad.code, 1) << bad.output;
  EXPECT_TRUE(fs::exists(tmp / "bad/cex/t1_tlc.txt"));
  EXPECT_TRUE(fs::exists(tmp / "bad/cex/t1_tlc.scenario.json"));
  // The report stage alone reproduces the exit code.
  EXPECT_EQ(cli("report --dir " + tmp / "bad").code, 1);
  auto summary = nlohmann::json::parse(read_file(tmp / "bad/summary.json"));
  EXPECT_EQ(summary.at("exit_code").get<int>(), 1);
}

TEST(Cli, CounterexampleScenarioReplaysTheFailure) {
  TempDir tmp;
  ASSERT_EQ(cli(tlc_args("tlc_mutant.hnl", tmp / "bad")).code, 1);
  // Simulating the dumped stimulus reproduces the violating LED value.
  ASSERT_EQ(cli("sim --design " + fixture("tlc/tlc_mutant.hnl") + " --scenario " + tmp / "bad/cex/t1_tlc.scenario.json" +
                " --out " + tmp / "replay.vcd")
                .code,
            0);
  Trace t = parse_vcd_file(tmp / "replay.vcd");
  bool wrong_led = false;
  for (uint64_t c = 0; c <= t.end_time; ++c) {
    auto st = t.history("tlc.state").value_at(c), led = t.history("tlc.led").value_at(c);
    if (st && led && st->to_string() == "1000010" && led->to_string() != "1000010") wrong_led = true;
  }
  EXPECT_TRUE(wrong_led);
}

TEST(Pipeline, TwoRunsAreByteIdenticalOutsideMetadata) {
  TempDir tmp;
  ASSERT_EQ(cli(tlc_args("tlc_mutant.hnl", tmp / "a")).code, 1);
  ASSERT_EQ(cli(tlc_args("tlc_mutant.hnl", tmp / "b") + " --jobs 2").code, 1);
  auto a = snapshot(tmp.path() / "a"), b = snapshot(tmp.path() / "b");
  ASSERT_FALSE(a.empty());
  EXPECT_EQ(a.size(), b.size());
  for (auto& [rel, text] : a) {
    ASSERT_TRUE(b.count(rel)) << rel;
    EXPECT_EQ(text, b.at(rel)) << rel;
  }
  EXPECT_TRUE(fs::exists(tmp / "a/metadata/timing.txt"));
}

// Running each stage by hand yields the same hints and verdicts as `run`.
TEST(Pipeline, StagesComposeLikeTheFullRun) {
  TempDir tmp;
  std::string design = fixture("tlc/tlc.hnl"), scen = fixture("tlc/scenarios/t1.json");
  ASSERT_EQ(cli(tlc_args("tlc.hnl", tmp / "full")).code, 0);
  std::string d = tmp / "manual";
  ASSERT_EQ(cli("sim --design " + design + " --scenario " + scen + " --out " + d + "/t1.vcd").code, 0);
  ASSERT_EQ(cli("rank --trace " + d + "/t1.vcd --tau 5 --report " + d + "/t1.rank.json").code, 0);
  ASSERT_EQ(cli("extract-fsm --design " + design + " --out " + d + "/fsm").code, 0);
  ASSERT_EQ(cli("gen-hints --design " + design + " --scenario " + scen + " --trace " + d + "/t1.vcd --rank " + d +
                "/t1.rank.json --fsm-dir " + d + "/fsm --out " + d + "/cand.json")
                .code,
            0);
  ASSERT_EQ(cli("verify-hints --design " + design + " --scenario " + scen + " --hints " + d + "/cand.json --out " + d +
                "/hints/t1.json")
                .code,
            0);
  CliResult pr = cli("prove --design " + design + " --scenarios " + fixture("tlc/scenarios") + " --hints " + d +
                     "/hints --specs " + fixture("tlc/specs") + " --report " + d + "/proof");
  ASSERT_EQ(pr.code, 0) << pr.output;
  EXPECT_EQ(read_file(d + "/hints/t1.json"), read_file(tmp / "full/hints/t1.json"));
  EXPECT_EQ(read_file(d + "/hints/t1.log.json"), read_file(tmp / "full/hints/t1.log.json"));
  EXPECT_EQ(read_file(d + "/proof/verdicts/t1_tlc.json"), read_file(tmp / "full/verdicts/t1_tlc.json"));
  EXPECT_EQ(read_file(d + "/t1.rank.json"), read_file(tmp / "full/rank/t1.json"));
}

TEST(Pipeline, UnhintedRunAgreesOnTheSmallDesign) {
  TempDir tmp;
  CliResult r = cli(tlc_args("tlc.hnl", tmp / "plain") + " --no-hints");
  EXPECT_EQ(r.code, 0) << r.output;
  EXPECT_NE(r.output.find("C0 W0 O0 A0"), std::string::npos) << r.output;
}
