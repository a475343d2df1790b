#include "hive/equiv.hpp"
#include "hive/hint_verify.hpp"
#include "hive/util.hpp"

#include "families.hpp"
#include "fixtures.hpp"
#include "flow.hpp"
#include "random_design.hpp"

#include <gtest/gtest.h>

using namespace hive;
using namespace hive::testing;

namespace {

ProveOptions opts() {
  ProveOptions o;
  o.solver.command = default_solver_command();
  o.solver.budget_seconds = 60;
  return o;
}

SubProblem from_family(const Family& fam, uint64_t depth = 0, std::optional<HintSet> hints = std::nullopt) {
  return make_subproblem(fam.hnl, fam.scenario_json, fam.spec_json, depth, std::move(hints));
}

}  // namespace

TEST(Prove, TogglerPasses) {
  Verdict v = prove(from_family(toggler()), opts());
  EXPECT_EQ(v.outcome, Verdict::Pass) << v.reason;
  EXPECT_FALSE(v.cex);
}

TEST(Prove, BrokenTogglerFailsWithReplayableCounterexample) {
  SubProblem sp = from_family(toggler(true));
  Verdict v = prove(sp, opts());
  ASSERT_EQ(v.outcome, Verdict::Fail) << v.reason;
  ASSERT_TRUE(v.cex);
  EXPECT_EQ(v.cex->label, "transaction:toggle");
  auto viol = replay_counterexample(sp, *v.cex);
  EXPECT_TRUE(std::any_of(viol.begin(), viol.end(),
                          [&](const SpecViolation& x) { return x.cycle == v.cex->cycle && x.label == v.cex->label; }));
  EXPECT_EQ(v.cex->inputs.at("tog.en").size(), sp.depth + 1);
  EXPECT_NE(render_counterexample(v).find("transaction:toggle"), std::string::npos);
}

TEST(Prove, MutantTrafficLightFailsOnceCIsReachable) {
  auto f = std::make_shared<FlatDesign>(flatten(parse_hnl_file(fixture("tlc/tlc_mutant.hnl"))));
  DecomposeInput d;
  d.sc = load_scenario(fixture("tlc/scenarios/t1.json"));
  d.scenario = d.sc.name;
  d.design = f;
  d.specs = {load_spec(fixture("tlc/specs/t1_tlc.spec.json"))};
  bind_spec(d.specs[0], *f);
  d.depth = 12;
  SubProblem sp = decompose({d}).at(0);
  Verdict v = prove(sp, opts());
  ASSERT_EQ(v.outcome, Verdict::Fail) << v.reason;
  EXPECT_TRUE(v.cex->label == "contract[2]" || v.cex->label == "contract[3]") << v.cex->label;
  EXPECT_GE(v.cex->cycle, 6u);  // C is first reachable at cycle 6
  // Too shallow to reach C: the mutation is invisible.
  sp.depth = 5;
  EXPECT_EQ(prove(sp, opts()).outcome, Verdict::Pass);
}

TEST(Oracle, AgreesWithTheTogglerVerdicts) {
  EXPECT_EQ(exhaustive_oracle(from_family(toggler())).outcome, Verdict::Pass);
  Verdict bad = exhaustive_oracle(from_family(toggler(true)));
  EXPECT_EQ(bad.outcome, Verdict::Fail);
}

TEST(Oracle, RefusesWideInputs) {
  SubProblem sp = from_family(counter32());
  EXPECT_THROW(exhaustive_oracle(sp), OracleRefused);
  EXPECT_EQ(prove(sp, opts()).outcome, Verdict::Pass);
}

TEST(Oracle, RefusesTooManyStates) {
  SubProblem sp = from_family(toggler());
  OracleCaps caps;
  caps.max_states = 1;
  EXPECT_THROW(exhaustive_oracle(sp, caps), OracleRefused);
}

// Reflexive specs restate a next-state function and must always pass.
TEST(ProveProperty, ReflexiveSpecsPass) {
  int n = 0;
  for (uint64_t seed = 1; n < 20 && seed < 200; ++seed) {
    RandomCase rc = random_case(seed);
    if (rc.spec_kind != "reflexive") continue;
    ++n;
    Verdict v = prove(make_subproblem(rc.hnl, rc.scenario_json, rc.spec_json), opts());
    ASSERT_EQ(v.outcome, Verdict::Pass) << "seed " << seed << " " << v.reason << "\n" << rc.hnl << rc.spec_json;
  }
  EXPECT_EQ(n, 20);
}

// Unhinted verdicts equal exhaustive exploration; failures replay.
TEST(ProveProperty, MatchesExhaustiveOracle) {
  int pass = 0, fail = 0;
  for (uint64_t seed = 1000; seed < 1040; ++seed) {
    RandomCase rc = random_case(seed);
    SubProblem sp = make_subproblem(rc.hnl, rc.scenario_json, rc.spec_json);
    Verdict o = exhaustive_oracle(sp);
    Verdict v = prove(sp, opts());
    ASSERT_EQ(v.outcome, o.outcome) << "seed " << seed << " " << v.reason << "\n" << rc.hnl << rc.spec_json;
    if (v.outcome == Verdict::Fail) {
      ++fail;
      auto viol = replay_counterexample(sp, *v.cex);
      ASSERT_FALSE(viol.empty()) << "seed " << seed;
      // Breadth-first search finds the earliest violation; the solver may report any.
      EXPECT_LE(o.cex->cycle, v.cex->cycle) << "seed " << seed;
    } else {
      ++pass;
    }
  }
  EXPECT_GT(pass, 0);
  EXPECT_GT(fail, 0);
}

TEST(Refinement, SpuriousFailureUnderOverapproximationIsRetried) {
  // a holds zero and feeds b one register later; freeing a lets b go nonzero.
  Family fam;
  fam.scenario = "pipe";
  fam.hnl = R"(module pipe
  input en:1
  output o:4
  reg a:4 reset=4'd0
  reg b:4 reset=4'd0
  next a = (mux en a a)
  next b = a
  assign o = b
endmodule
)";
  fam.scenario_json = R"j({"name": "pipe", "run_cycles": 6, "tau": 5, "stimulus": [], "proof_depth": 4})j";
  fam.spec_json = R"j({"scenario": "pipe", "module": "pipe",
    "contract": [{"when": "(eq 1'b1 1'b1)", "expect": "(eq o 4'd0)"}]})j";
  HintSet h;
  h.scenario = fam.scenario;
  h.hints.push_back(Hint{"pipe", "pipe.a", HintKind::Overapproximate, HintStatus::Verified});
  Verdict v = prove(from_family(fam, 0, h), opts());
  EXPECT_EQ(v.outcome, Verdict::Pass) << v.reason;
  EXPECT_TRUE(v.refined);
  EXPECT_EQ(v.hints_applied[HintKind::Overapproximate], 0u);
}

TEST(Refinement, CutOnObservedSignalIsNotApplied) {
  Family fam = mulk(4, 3);
  HintSet h;
  h.scenario = fam.scenario;
  h.hints.push_back(Hint{"mulk", "mulk.out_reg", HintKind::Overapproximate, HintStatus::Verified});
  Verdict v = prove(from_family(fam, 0, h), opts());
  EXPECT_EQ(v.outcome, Verdict::Pass) << v.reason;
  EXPECT_FALSE(v.refined);
  EXPECT_EQ(v.hints_applied[HintKind::Overapproximate], 0u);
}

TEST(Refinement, ConcretizedConstantShrinksTheProof) {
  Family fam = mulk(8, 5);
  SubProblem plain = from_family(fam);
  HintSet h;
  h.scenario = fam.scenario;
  Hint k{"mulk", "mulk.k_reg", HintKind::Concretize, HintStatus::Verified};
  k.value = BitVec(8, 5);
  k.from = 1;
  h.hints.push_back(k);
  SubProblem hinted = from_family(fam, 0, h);
  Verdict a = prove(plain, opts()), b = prove(hinted, opts());
  EXPECT_EQ(a.outcome, Verdict::Pass);
  EXPECT_EQ(b.outcome, Verdict::Pass);
  EXPECT_EQ(b.hints_applied[HintKind::Concretize], 1u);
  EXPECT_LT(b.peak_terms, a.peak_terms);
}

TEST(Decompose, MergesIdenticalObligations) {
  Family fam = toggler();
  auto f = std::make_shared<FlatDesign>(flatten(parse_hnl(fam.hnl)));
  SpecModel spec = parse_spec(fam.spec_json);
  bind_spec(spec, *f);
  Scenario sc = parse_scenario(fam.scenario_json, ".");
  std::vector<DecomposeInput> in;
  for (const char* name : {"a", "b", "c"}) {
    DecomposeInput d;
    d.scenario = name;
    d.design = f;
    d.sc = sc;
    d.specs = {spec};
    d.depth = std::string(name) == "c" ? 5 : 6;
    in.push_back(d);
  }
  auto sps = decompose(in);
  ASSERT_EQ(sps.size(), 2u);
  EXPECT_EQ(sps[0].scenarios, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(sps[0].id, "a/tog");
  EXPECT_EQ(sps[1].scenarios, (std::vector<std::string>{"c"}));
}

// A merged sub-problem's verdict equals each member's own verdict.
TEST(DecomposeProperty, MergingPreservesVerdicts) {
  for (uint64_t seed = 2000; seed < 2010; ++seed) {
    RandomCase rc = random_case(seed);
    SubProblem one = make_subproblem(rc.hnl, rc.scenario_json, rc.spec_json);
    std::vector<DecomposeInput> in(2);
    for (int i = 0; i < 2; ++i) {
      in[i].scenario = "m" + std::to_string(i);
      in[i].design = one.design;
      in[i].sc = one.scenario;
      in[i].specs = {one.spec};
      in[i].depth = one.depth;
    }
    auto merged = decompose(in);
    ASSERT_EQ(merged.size(), 1u);
    EXPECT_EQ(prove(merged[0], opts()).outcome, prove(one, opts()).outcome) << "seed " << seed;
  }
}

TEST(Premises, PassWithAnUnverifiedAssumptionIsDowngraded) {
  Family fam = mulk(4, 3);
  HintSet h;
  h.scenario = fam.scenario;
  Hint k{"mulk", "mulk.k_reg", HintKind::Concretize, HintStatus::Verified};
  k.value = BitVec(4, 3);
  k.from = 1;
  h.hints.push_back(k);
  SubProblem sp = from_family(fam, 0, h);
  std::vector<Verdict> vs{prove(sp, opts())};
  ASSERT_EQ(vs[0].outcome, Verdict::Pass);

  std::map<std::string, HintSet> verified{{fam.scenario, h}};
  auto ok = check_premises({sp}, vs, verified);
  EXPECT_EQ(ok.checked, 1u);
  EXPECT_EQ(ok.discharged, 1u);
  EXPECT_EQ(vs[0].outcome, Verdict::Pass);

  HintSet rejected = h;
  rejected.hints[0].status = HintStatus::Rejected;
  std::map<std::string, HintSet> none{{fam.scenario, rejected}};
  auto bad = check_premises({sp}, vs, none);
  EXPECT_EQ(bad.discharged, 0u);
  EXPECT_FALSE(bad.issues.empty());
  EXPECT_EQ(vs[0].outcome, Verdict::Unknown);
  EXPECT_FALSE(vs[0].premises_ok);
}

TEST(ExitCode, FailOutranksUnknown) {
  Verdict p, f, u;
  p.outcome = Verdict::Pass;
  f.outcome = Verdict::Fail;
  u.outcome = Verdict::Unknown;
  EXPECT_EQ(exit_code({p, p}), 0);
  EXPECT_EQ(exit_code({p, u}), 2);
  EXPECT_EQ(exit_code({u, f, p}), 1);
}

TEST(Report, IsDeterministicAndCarriesNoTimes) {
  RunSummary s;
  Verdict v = prove(from_family(toggler(true)), opts());
  v.seconds = 12.5;
  s.verdicts = {v};
  std::string a = render_report(s);
  v.seconds = 99;
  s.verdicts = {v};
  EXPECT_EQ(render_report(s), a);
  EXPECT_EQ(render_summary_json(s).find("seconds"), std::string::npos);
  EXPECT_NE(a.find("Result: 0 pass, 1 fail, 0 unknown"), std::string::npos);
}
