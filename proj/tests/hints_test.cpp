#include "hive/hint_verify.hpp"
#include "hive/hints.hpp"
#include "hive/netlist.hpp"

#include "fixtures.hpp"
#include "flow.hpp"
#include "oracles.hpp"
#include "random_design.hpp"

#include <gtest/gtest.h>

using namespace hive;
using namespace hive::testing;

namespace {

struct Soc {
  Netlist n = parse_hnl_file(fixture("tlc_soc/soc.hnl"));
  FlatDesign base = flatten(n);
};

std::set<std::string> weakened_states(const HintSet& h, const std::string& reg) {
  std::set<std::string> out;
  for (auto& x : h.hints)
    if (x.kind == HintKind::Weaken && x.signal == reg && !x.state.empty()) out.insert(x.state);
  return out;
}

const Hint* find_hint(const HintSet& h, const std::string& sig, HintKind k) {
  for (auto& x : h.hints)
    if (x.signal == sig && x.kind == k) return &x;
  return nullptr;
}

VerifyOptions verify_opts() {
  VerifyOptions o;
  o.solver.command = default_solver_command();
  o.solver.budget_seconds = 60;
  return o;
}

// Standalone TLC with req_walk left to the solver: small enough to enumerate.
Scenario tlc_partial() {
  Scenario sc = load_scenario(fixture("tlc/scenarios/t1.json"));
  std::vector<StimulusEvent> keep;
  for (auto& e : sc.stimulus)
    if (e.signal != "tlc.req_walk") keep.push_back(e);
  sc.stimulus = keep;
  sc.checks.clear();
  sc.verify_depth = 9;
  return sc;
}

}  // namespace

TEST(HintGeneration, WeakensUnvisitedUartStates) {
  Soc s;
  Scenario s1 = load_scenario(fixture("tlc_soc/scenarios/s1.json"));
  HintSet h1 = candidate_hints(with_scenario_images(s.base, s1), s1);
  EXPECT_EQ(weakened_states(h1, "soc.uart.state"), (std::set<std::string>{"G", "H", "I"}));
  Scenario s2 = load_scenario(fixture("tlc_soc/scenarios/s2.json"));
  HintSet h2 = candidate_hints(with_scenario_images(s.base, s2), s2);
  EXPECT_EQ(weakened_states(h2, "soc.uart.state"), (std::set<std::string>{"B", "C", "D", "E", "F"}));
}

TEST(HintGeneration, NeverConcretizesProtectedRegisters) {
  Soc s;
  for (const char* name : {"s1", "s2", "s3", "s4"}) {
    Scenario sc = load_scenario(fixture(std::string("tlc_soc/scenarios/") + name + ".json"));
    HintSet h = candidate_hints(with_scenario_images(s.base, sc), sc);
    std::set<std::string> prot(h.protected_registers.begin(), h.protected_registers.end());
    EXPECT_EQ(prot, (std::set<std::string>{"soc.cpu.cstate", "soc.tlc.state", "soc.uart.state"}));
    for (auto& x : h.hints)
      if (prot.count(x.signal)) EXPECT_EQ(x.kind, HintKind::Weaken) << name << " " << x.signal;
  }
}

TEST(HintGeneration, ClassifiesByChangeCount) {
  FlatDesign f = flatten(parse_hnl_file(fixture("tlc/tlc.hnl")));
  Scenario sc = load_scenario(fixture("tlc/scenarios/t1.json"));
  HintSet h = candidate_hints(f, sc);
  // Constant timing wires never change: pinned from cycle 0.
  const Hint* tm = find_hint(h, "tlc.t_main", HintKind::Concretize);
  ASSERT_NE(tm, nullptr);
  EXPECT_EQ(tm->value->to_u64(), 3u);
  EXPECT_EQ(tm->from, 0u);
  // The timer changes on most cycles.
  EXPECT_NE(find_hint(h, "tlc.timer", HintKind::Overapproximate), nullptr);
  EXPECT_EQ(find_hint(h, "tlc.req_side", HintKind::Overapproximate), nullptr);
}

TEST(HintFile, RoundTripsWithStatusAndPayload) {
  Soc s;
  Scenario sc = load_scenario(fixture("tlc_soc/scenarios/s1.json"));
  FlatDesign f = with_scenario_images(s.base, sc);
  HintSet h = candidate_hints(f, sc);
  ASSERT_FALSE(h.hints.empty());
  std::string text = write_hintfile(h, true);
  HintSet back = read_hintfile(text, &f);
  EXPECT_TRUE(same_hints(h, back));
  EXPECT_EQ(write_hintfile(back, true), text);
  EXPECT_EQ(back.protected_registers, h.protected_registers);
}

TEST(HintFile, RejectsMalformedEntries) {
  FlatDesign f = flatten(parse_hnl_file(fixture("tlc/tlc.hnl")));
  EXPECT_THROW(read_hintfile(R"({"scenario":"t","tau":5,"hints":[{"module":"tlc","signal":"tlc.t_main","kind":"Concretize","status":"candidate"}]})", &f),
               Error);
  EXPECT_THROW(read_hintfile(R"({"scenario":"t","tau":5,"hints":[{"module":"tlc","signal":"tlc.t_main","kind":"Concretize","value":"4'd3","status":"candidate"}]})", &f),
               WidthMismatch);
  EXPECT_THROW(read_hintfile(R"({"scenario":"t","tau":5,"hints":[{"module":"tlc","signal":"tlc.t_main","kind":"Shrink","status":"candidate"}]})", &f),
               Error);
}

TEST(HintVerification, RejectsOneInvalidCandidatePerKind) {
  FlatDesign f = flatten(parse_hnl_file(fixture("tlc/tlc.hnl")));
  Scenario sc = load_scenario(fixture("tlc/scenarios/t1.json"));
  HintSet c;
  c.scenario = sc.name;
  c.protected_registers = {"tlc.state"};
  Hint conc{"tlc", "tlc.timer", HintKind::Concretize};
  conc.value = BitVec(8, 0);  // the timer counts
  Hint weak{"tlc", "tlc.state", HintKind::Weaken};
  weak.state = "B";
  weak.condition = resolve(parse_expr("(eq tlc.state 7'b0101000)"), f.resolver(), 1);  // reached at cycle 4
  Hint over{"tlc", "tlc.state", HintKind::Overapproximate};
  Hint abs{"tlc", "tlc.done", HintKind::Abstract};
  abs.allowed = {"tlc.timer"};  // the limit also depends on the state
  c.hints = {conc, weak, over, abs};
  HintSet v = verify_hints(c, f, sc, verify_opts());
  for (auto& h : v.hints) EXPECT_EQ(h.status, HintStatus::Rejected) << hint_kind_name(h.kind) << " " << h.signal;
  EXPECT_EQ(v.hints[0].witness_cycle.value_or(99), 1u);
  EXPECT_EQ(v.hints[1].witness_cycle.value_or(99), 4u);
}

TEST(HintVerification, GeneratedHintsVerifyOnTheirOwnScenario) {
  FlatDesign f = flatten(parse_hnl_file(fixture("tlc/tlc.hnl")));
  Scenario sc = load_scenario(fixture("tlc/scenarios/t1.json"));
  HintSet v = verify_hints(candidate_hints(f, sc), f, sc, verify_opts());
  EXPECT_EQ(v.counts(HintStatus::Rejected).at(HintKind::Concretize), 0u);
  EXPECT_GT(v.counts(HintStatus::Verified).at(HintKind::Concretize), 0u);
  EXPECT_EQ(v.depth, 23u);  // run_cycles - 1
}

// Verification verdicts for Concretize and Weaken agree with exhaustive
// simulation over the undriven inputs.
TEST(HintVerificationProperty, AgreesWithExhaustiveSimulation) {
  Netlist n = parse_hnl_file(fixture("tlc/tlc.hnl"));
  FlatDesign f = flatten(n);
  Scenario sc = tlc_partial();
  HintSet cand = candidate_hints(f, sc);
  HintSet v = verify_hints(cand, f, sc, verify_opts());
  size_t checked = 0;
  for (auto& h : v.hints) {
    if (h.kind != HintKind::Concretize && h.kind != HintKind::Weaken) continue;
    if (h.kind == HintKind::Weaken && !h.condition) continue;
    auto holds = hint_holds_exhaustively(n, sc, h, v.depth);
    ASSERT_TRUE(holds) << "input space too large";
    EXPECT_EQ(*holds, h.status == HintStatus::Verified) << hint_kind_name(h.kind) << " " << h.signal << " " << h.state;
    ++checked;
  }
  EXPECT_GT(checked, 3u);
}

TEST(HintVerificationProperty, RandomDesignsAgreeWithExhaustiveSimulation) {
  RandomDesignOptions opt;
  opt.leave_undriven = true;
  opt.run_cycles = 6;
  size_t checked = 0, rejected = 0;
  for (uint64_t seed = 100; seed < 160; ++seed) {
    RandomCase rc = random_case(seed, opt);
    Netlist n = parse_hnl(rc.hnl);
    FlatDesign f = flatten(n);
    Scenario sc = parse_scenario(rc.scenario_json, ".");
    sc.checks.clear();
    HintSet cand = candidate_hints(f, sc);
    // Also pin every register to its reset value: often false once inputs are free.
    for (int r : f.registers()) {
      Hint h{f.origin[r].module, f.signals[r].name, HintKind::Concretize};
      h.value = f.signals[r].reset;
      cand.hints.push_back(h);
    }
    cand.canonicalize();
    HintSet v = verify_hints(cand, f, sc, verify_opts());
    for (auto& h : v.hints) {
      if (h.kind != HintKind::Concretize && !(h.kind == HintKind::Weaken && h.condition)) continue;
      auto holds = hint_holds_exhaustively(n, sc, h, v.depth);
      if (!holds) continue;
      ASSERT_EQ(*holds, h.status == HintStatus::Verified) << "seed " << seed << " " << h.signal << "\n" << rc.hnl;
      ++checked;
      rejected += h.status == HintStatus::Rejected;
    }
  }
  EXPECT_GT(checked, 50u);
  EXPECT_GT(rejected, 5u);
}
