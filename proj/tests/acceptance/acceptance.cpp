// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "hive/equiv.hpp"
#include "hive/hint_verify.hpp"
#include "hive/pipeline.hpp"
#include "hive/util.hpp"

#include "families.hpp"
#include "fixtures.hpp"
#include "flow.hpp"
#include "oracles.hpp"
#include "random_design.hpp"

#include <fmt/format.h>

#include <filesystem>
#include <functional>
#include <iostream>

using namespace hive;
using namespace hive::testing;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool ok = true;
  std::vector<std::string> notes;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      notes.push_back("FAILED: " + what);
    }
  }
  void note(const std::string& s) { notes.push_back(s); }
};

// Shared state: the fixture runs are reused by later criteria.
struct Context {
  TempDir tmp;
  fs::path soc_run, bug_run, tlc_run, mutant_run;
  RunSummary soc_summary, bug_summary;
};

SolverConfig solver(double budget = 60) { return {default_solver_command(), budget}; }

std::string soc_design() { return fixture("tlc_soc/soc.hnl"); }

PipelineConfig pipeline(const std::string& design, const std::string& scenarios, const std::string& specs,
                        const fs::path& out) {
  PipelineConfig c;
  c.design = design;
  c.scenarios_dir = scenarios;
  c.specs_dir = specs;
  c.out_dir = out.string();
  c.solver = solver();
  return c;
}

std::vector<std::string> files_under(const fs::path& dir, const std::string& suffix) {
  std::vector<std::string> out;
  if (!fs::exists(dir)) return out;
  for (auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file() && e.path().string().ends_with(suffix)) out.push_back(e.path().string());
  std::sort(out.begin(), out.end());
  return out;
}

// Every scenario of the fixture corpus with the design it runs on.
struct FixtureScenario {
  std::string label;
  std::string hnl;  // design text
  std::string base_dir;
  Scenario sc;
};

std::vector<FixtureScenario> fixture_corpus() {
  std::vector<FixtureScenario> out;
  std::string soc = read_file(soc_design());
  for (const char* dir : {"scenarios", "scenarios_bug"})
    for (auto& p : scenario_files(fixture(std::string("tlc_soc/") + dir)))
      out.push_back({std::string("soc/") + dir + "/" + fs::path(p).stem().string(), soc, fixture("tlc_soc"), load_scenario(p)});
  for (const char* d : {"tlc.hnl", "tlc_mutant.hnl"})
    out.push_back({std::string("tlc/") + d, read_file(fixture(std::string("tlc/") + d)), fixture("tlc"),
                   load_scenario(fixture("tlc/scenarios/t1.json"))});
  for (auto& fam : {toggler(), toggler(true), counter32(), mulk(8, 5)})
    out.push_back({"family/" + fam.scenario, fam.hnl, ".", parse_scenario(fam.scenario_json, ".")});
  for (auto& fs : out) fs.sc.checks.clear();
  return out;
}

FlatDesign design_for(const FixtureScenario& fx) {
  return with_scenario_images(flatten(parse_hnl(fx.hnl, "<fixture>", fx.base_dir)), fx.sc);
}

// 1. Running example end to end.
Outcome criterion1(Context& ctx) {
  Outcome o;
  ctx.soc_run = ctx.tmp.path() / "soc";
  Stopwatch sw;
  int rc = run_pipeline(pipeline(soc_design(), fixture("tlc_soc/scenarios"), fixture("tlc_soc/specs"), ctx.soc_run),
                        &ctx.soc_summary);
  double secs = sw.seconds();
  long rss = std::max(peak_rss_self_kib(), peak_rss_children_kib());
  o.require(rc == 0, fmt::format("exit code {}", rc));
  o.require(ctx.soc_summary.verdicts.size() == 4, fmt::format("{} sub-problems", ctx.soc_summary.verdicts.size()));
  for (auto& v : ctx.soc_summary.verdicts)
    o.require(v.outcome == Verdict::Pass, v.subproblem + " is " + outcome_name(v.outcome) + " " + v.reason);
  o.require(ctx.soc_summary.premises.discharged == ctx.soc_summary.premises.checked, "premises not all discharged");
  o.require(secs < 600, fmt::format("wall time {:.1f} s", secs));
  o.require(rss < 2L * 1024 * 1024, fmt::format("peak memory {} KiB", rss));
  o.note(fmt::format("{} sub-problems Pass in {:.1f} s, peak RSS {:.0f} MB, premises {}/{}", ctx.soc_summary.verdicts.size(),
                     secs, rss / 1024.0, ctx.soc_summary.premises.discharged, ctx.soc_summary.premises.checked));
  return o;
}

// 2. Weakened UART states per scenario.
Outcome criterion2(Context& ctx) {
  Outcome o;
  std::map<std::string, std::set<std::string>> want{{"s1", {"G", "H", "I"}}, {"s2", {"B", "C", "D", "E", "F"}}};
  FlatDesign f = flatten(parse_hnl_file(soc_design()));
  for (auto& [scen, states] : want) {
    for (const char* kind : {"candidates", "hints"}) {
      HintSet h = load_hintfile((ctx.soc_run / kind / (scen + ".json")).string(), &f);
      std::set<std::string> got;
      for (auto& x : h.hints)
        if (x.kind == HintKind::Weaken && x.signal == "soc.uart.state" && !x.state.empty()) got.insert(x.state);
      o.require(got == states, fmt::format("{} {}: weakened {{{}}}", scen, kind,
                                           join(std::vector<std::string>(got.begin(), got.end()), ",")));
    }
    o.note(fmt::format("{}: {{{}}}", scen, join(std::vector<std::string>(states.begin(), states.end()), ",")));
  }
  return o;
}

// 3. Swapped configuration addresses in the s3 firmware.
Outcome criterion3(Context& ctx) {
  Outcome o;
  ctx.bug_run = ctx.tmp.path() / "bug";
  int rc = run_pipeline(pipeline(soc_design(), fixture("tlc_soc/scenarios_bug"), fixture("tlc_soc/specs"), ctx.bug_run),
                        &ctx.bug_summary);
  o.require(rc == 1, fmt::format("exit code {}", rc));
  for (auto& v : ctx.bug_summary.verdicts) {
    bool affected = v.scenarios.front() == "s3";
    o.require(v.outcome == (affected ? Verdict::Fail : Verdict::Pass), v.subproblem + " is " + outcome_name(v.outcome));
    if (!affected || !v.cex) continue;
    // Replay the dumped stimulus on the concrete simulator.
    std::string stem = v.subproblem;
    std::replace(stem.begin(), stem.end(), '/', '_');
    Scenario replay = load_scenario((ctx.bug_run / "cex" / (stem + ".scenario.json")).string());
    FlatDesign f = with_scenario_images(flatten(parse_hnl_file(soc_design())), replay);
    SpecModel spec = load_spec(fixture("tlc_soc/specs/s3_tlc.spec.json"));
    bind_spec(spec, f);
    Trace t = run_scenario(f, replay);
    auto viol = spec_violations_trace(spec, f, t, v.depth);
    bool same = std::any_of(viol.begin(), viol.end(),
                            [&](const SpecViolation& x) { return x.cycle == v.cex->cycle && x.label == v.cex->label; });
    o.require(same, "counterexample does not replay to " + v.cex->label);
    o.note(fmt::format("s3 Fail: {} at cycle {}, replays concretely", v.cex->label, v.cex->cycle));
  }
  return o;
}

// 4. prove() against breadth-first exploration on random designs.
Outcome criterion4(Context&) {
  Outcome o;
  size_t compared = 0, refused = 0, unknown = 0, pass = 0, fail = 0;
  uint64_t seed = 40000;
  while (compared < 240 && seed < 41000) {
    RandomDesignOptions opt;
    opt.hierarchy = seed % 3 == 0;
    opt.memory_chance = seed % 2 ? 0.5 : 0.2;
    RandomCase rc = random_case(seed++, opt);
    SubProblem sp = make_subproblem(rc.hnl, rc.scenario_json, rc.spec_json);
    Verdict ref;
    try {
      ref = exhaustive_oracle(sp);
    } catch (const OracleRefused&) {
      ++refused;
      continue;
    }
    ProveOptions po;
    po.solver = solver();
    Verdict v = prove(sp, po);
    if (v.outcome == Verdict::Unknown || ref.outcome == Verdict::Unknown) {
      ++unknown;
      continue;
    }
    ++compared;
    (v.outcome == Verdict::Pass ? pass : fail)++;
    o.require(v.outcome == ref.outcome, fmt::format("seed {}: prove {} oracle {}", seed - 1, outcome_name(v.outcome),
                                                    outcome_name(ref.outcome)));
  }
  o.require(compared >= 200, fmt::format("only {} designs compared", compared));
  o.note(fmt::format("{} designs agree ({} pass, {} fail); {} refused by caps, {} unknown", compared, pass, fail, refused,
                     unknown));
  return o;
}

// 5. Concretized unrolling reproduces simulation.
Outcome criterion5(Context&) {
  Outcome o;
  size_t values = 0;
  for (auto& fx : fixture_corpus()) {
    FlatDesign f = design_for(fx);
    Trace t = run_scenario(f, fx.sc);
    UnrollOptions uo;
    uo.cycles = fx.sc.run_cycles - 1;
    SymState st = unroll(f, uo);
    auto sched = stimulus_schedule(f, fx.sc, fx.sc.run_cycles);
    std::map<std::string, BitVec> assign;
    for (uint64_t k = 0; k < fx.sc.run_cycles; ++k)
      for (auto& [id, v] : sched[k])
        if (v.is_known()) assign[symbol_name(f.signals[id].name, k)] = v.known();
    TermEvaluator ev(assign);
    size_t mismatches = 0;
    for (size_t i = 0; i < f.signals.size(); ++i)
      for (uint64_t k = 0; k < fx.sc.run_cycles; ++k) {
        auto sim = t.history(f.signals[i].name).value_at(k);
        if (!sim || !sim->is_known()) {
          ++mismatches;
          continue;
        }
        ++values;
        if (ev.eval(st.at(static_cast<int>(i), k)) != sim->known()) ++mismatches;
      }
    o.require(mismatches == 0, fmt::format("{}: {} mismatching values", fx.label, mismatches));
  }
  o.note(fmt::format("{} signal values matched", values));
  return o;
}

// 6. Hinted versus unhinted proof time on the multiplier family.
Outcome criterion6(Context&) {
  Outcome o;
  const double budget = 60;
  const uint64_t k = 0x5;
  struct Run {
    Verdict::Outcome outcome;
    double seconds;
  };
  auto run = [&](uint32_t w, bool hinted) {
    Family fam = mulk(w, k);
    SubProblem sp = make_subproblem(fam.hnl, fam.scenario_json, fam.spec_json);
    if (hinted) {
      VerifyOptions vo;
      vo.solver = solver(budget);
      FlatDesign f = flatten(parse_hnl(fam.hnl));
      Scenario sc = parse_scenario(fam.scenario_json, ".");
      sp.hints = verify_hints(candidate_hints(f, sc), f, sc, vo).verified_only();
    }
    ProveOptions po;
    po.solver = solver(budget);
    po.use_hints = hinted;
    // Best of two runs damps scheduler noise on the sub-second widths.
    Run best{Verdict::Unknown, 1e9};
    for (int rep = 0; rep < (w < 10 ? 2 : 1); ++rep) {
      Verdict v = prove(sp, po);
      if (v.seconds < best.seconds) best = {v.outcome, v.seconds};
    }
    return best;
  };
  std::optional<uint32_t> wstar;
  std::vector<std::string> table;
  for (uint32_t w = 4; w <= 16 && !wstar; ++w) {
    Run plain = run(w, false), hinted = run(w, true);
    table.push_back(fmt::format("W={} unhinted {} {:.2f}s hinted {} {:.2f}s", w, outcome_name(plain.outcome), plain.seconds,
                                outcome_name(hinted.outcome), hinted.seconds));
    if (plain.outcome == Verdict::Unknown) {
      wstar = w;
      o.require(hinted.outcome == Verdict::Pass, fmt::format("hinted proof at W*={} is {}", w, outcome_name(hinted.outcome)));
      break;
    }
    o.require(plain.outcome == Verdict::Pass && hinted.outcome == Verdict::Pass, fmt::format("W={} did not pass", w));
    o.require(hinted.seconds <= plain.seconds, fmt::format("W={}: hinted {:.3f}s > unhinted {:.3f}s", w, hinted.seconds,
                                                           plain.seconds));
  }
  o.require(wstar.has_value(), "no width up to 16 exceeded the unhinted budget");
  if (wstar) {
    Run far = run(*wstar + 4, true);
    table.push_back(fmt::format("W={} hinted {} {:.2f}s", *wstar + 4, outcome_name(far.outcome), far.seconds));
    o.require(far.outcome == Verdict::Pass, fmt::format("hinted proof at W*+4 is {}", outcome_name(far.outcome)));
    o.note(fmt::format("W* = {}", *wstar));
  }
  for (auto& line : table) o.note(line);
  return o;
}

// 7. Bucket boundaries and ranking against the recount oracle.
Outcome criterion7(Context& ctx) {
  Outcome o;
  const uint32_t tau = 5;
  Trace t;
  std::vector<std::pair<int, Bucket>> cases{
      {1, Bucket::Once}, {2, Bucket::UpToTau}, {int(tau), Bucket::UpToTau}, {int(tau) + 1, Bucket::AboveTau}, {-1, Bucket::Unknown}};
  for (size_t i = 0; i < cases.size(); ++i) {
    size_t v = t.add_var("syn.s" + std::to_string(i), 1);
    SignalHistory& h = t.histories[v];
    h.has_initial = true;
    if (cases[i].first < 0) {
      h.record(0, LogicValue::all_x(1));
      continue;
    }
    for (int c = 0; c <= cases[i].first; ++c) h.record(c, LogicValue(BitVec(1, c % 2)));
  }
  t.end_time = 10;
  RankedSignals r = signal_ranking(t, tau);
  for (size_t i = 0; i < cases.size(); ++i)
    for (auto& s : r.signals)
      if (s.name == "syn.s" + std::to_string(i))
        o.require(bucket_of(s, tau) == cases[i].second, fmt::format("count {} landed in {}", cases[i].first,
                                                                      bucket_name(bucket_of(s, tau))));
  BucketStats st = bucketize(r, tau);
  o.require(st.counts == (std::array<size_t, 4>{1, 2, 1, 1}), "bucket totals differ");

  Trace all_x;
  for (int i = 0; i < 3; ++i) all_x.histories[all_x.add_var("x.s" + std::to_string(i), 4)].record(0, LogicValue::all_x(4));
  o.require(bucketize(signal_ranking(all_x, tau), tau).counts == (std::array<size_t, 4>{0, 0, 0, 3}),
            "all-X trace not entirely unknown");

  size_t vcds = 0, signals = 0;
  for (auto& root : {ctx.soc_run, ctx.bug_run})
    for (auto& p : files_under(root / "traces", ".vcd")) {
      ++vcds;
      std::string text = read_file(p);
      auto oracle = recount_vcd(text);
      for (auto& s : signal_ranking(parse_vcd(text), tau).signals) {
        ++signals;
        const Recount& rc = oracle.at(s.name);
        o.require(s.count == rc.count && s.unknown == rc.unknown && s.highz == rc.highz, p + ": " + s.name);
      }
    }
  o.require(vcds >= 8, fmt::format("only {} fixture traces", vcds));
  o.note(fmt::format("boundaries 1,2,tau,tau+1,X exact; {} signals over {} VCDs match the recount", signals, vcds));
  return o;
}

// 8. Verified hints survive exhaustive simulation; bad candidates are rejected.
Outcome criterion8(Context&) {
  Outcome o;
  VerifyOptions vo;
  vo.solver = solver();
  size_t checked = 0, verified = 0;
  std::vector<FixtureScenario> corpus = fixture_corpus();
  // A variant that leaves one TLC request to the solver exercises free inputs.
  FixtureScenario partial = *std::find_if(corpus.begin(), corpus.end(), [](auto& fx) { return fx.label == "tlc/tlc.hnl"; });
  partial.label = "tlc/partial";
  std::erase_if(partial.sc.stimulus, [](const StimulusEvent& e) { return e.signal == "tlc.req_walk"; });
  partial.sc.verify_depth = 9;
  corpus.push_back(partial);
  for (auto& fx : corpus) {
    Netlist n = parse_hnl(fx.hnl, "<fixture>", fx.base_dir);
    FlatDesign f = with_scenario_images(flatten(n), fx.sc);
    HintSet h = verify_hints(candidate_hints(f, fx.sc), f, fx.sc, vo);
    for (auto& x : h.hints) {
      if (x.status != HintStatus::Verified) continue;
      if (x.kind != HintKind::Concretize && !(x.kind == HintKind::Weaken && x.condition)) continue;
      ++verified;
      auto holds = hint_holds_exhaustively(n, fx.sc, x, h.depth, 16);
      if (!holds) {
        o.note(fx.label + ": input space too large for " + x.signal);
        continue;
      }
      ++checked;
      o.require(*holds, fmt::format("{}: verified {} on {} {} is violated", fx.label, hint_kind_name(x.kind), x.signal, x.state));
    }
  }
  o.require(checked == verified, fmt::format("{} of {} verified hints checked", checked, verified));

  FlatDesign f = flatten(parse_hnl_file(fixture("tlc/tlc.hnl")));
  Scenario sc = load_scenario(fixture("tlc/scenarios/t1.json"));
  HintSet bad;
  bad.scenario = sc.name;
  bad.protected_registers = {"tlc.state"};
  Hint conc{"tlc", "tlc.timer", HintKind::Concretize};
  conc.value = BitVec(8, 0);
  Hint weak{"tlc", "tlc.state", HintKind::Weaken};
  weak.state = "B";
  weak.condition = resolve(parse_expr("(eq tlc.state 7'b0101000)"), f.resolver(), 1);
  Hint over{"tlc", "tlc.state", HintKind::Overapproximate};
  Hint abs{"tlc", "tlc.done", HintKind::Abstract};
  abs.allowed = {"tlc.timer"};
  bad.hints = {conc, weak, over, abs};
  HintSet v = verify_hints(bad, f, sc, vo);
  for (auto& x : v.hints)
    o.require(x.status == HintStatus::Rejected, std::string("invalid ") + hint_kind_name(x.kind) + " accepted");
  o.note(fmt::format("{} verified Concretize/Weaken hints hold exhaustively; 4/4 invalid candidates rejected", checked));
  return o;
}

// 9. Lossless formats and two-solver agreement.
Outcome criterion9(Context& ctx) {
  Outcome o;
  ctx.tlc_run = ctx.tmp.path() / "tlc";
  ctx.mutant_run = ctx.tmp.path() / "mutant";
  run_pipeline(pipeline(fixture("tlc/tlc.hnl"), fixture("tlc/scenarios"), fixture("tlc/specs"), ctx.tlc_run));
  run_pipeline(pipeline(fixture("tlc/tlc_mutant.hnl"), fixture("tlc/scenarios"), fixture("tlc/specs"), ctx.mutant_run));
  std::vector<fs::path> runs{ctx.soc_run, ctx.bug_run, ctx.tlc_run, ctx.mutant_run};

  size_t n_vcd = 0, n_kiss = 0, n_hint = 0, n_spec = 0;
  for (auto& r : runs)
    for (auto& p : files_under(r / "traces", ".vcd")) {
      Trace t = parse_vcd_file(p);
      std::string again = write_vcd(t);
      o.require(parse_vcd(again).equivalent(t) && write_vcd(parse_vcd(again)) == again, "VCD " + p);
      ++n_vcd;
    }

  std::vector<std::pair<std::string, std::string>> designs{{soc_design(), ""}, {fixture("tlc/tlc.hnl"), ""}};
  for (auto& [design, _] : designs) {
    FlatDesign f = flatten(parse_hnl_file(design));
    for (auto& m : extract_fsms(f)) {
      Fsm back = parse_kiss2(write_kiss2(m), write_guard_table(m));
      resolve_fsm(back, f);
      o.require(fsm_equal(back, m) && write_kiss2(back) == write_kiss2(m), "KISS2 " + m.state_register);
      ++n_kiss;
    }
  }
  for (auto& dir : {fixture("tlc_soc/specs"), fixture("tlc/specs")})
    for (auto& p : files_under(dir, ".kiss2")) {
      std::string text = read_file(p);
      o.require(write_kiss2(load_fsm(p)) == text, "stored KISS2 " + p);
      ++n_kiss;
    }

  for (auto& r : runs) {
    FlatDesign f = flatten(parse_hnl_file(r == ctx.tlc_run || r == ctx.mutant_run
                                              ? fixture(r == ctx.tlc_run ? "tlc/tlc.hnl" : "tlc/tlc_mutant.hnl")
                                              : soc_design()));
    for (const char* sub : {"candidates", "hints"})
      for (auto& p : files_under(r / sub, ".json")) {
        std::string text = read_file(p);
        HintSet h = read_hintfile(text, &f, p);
        bool with_rejected = p.ends_with(".log.json") || std::string(sub) == "candidates";
        o.require(write_hintfile(h, with_rejected) == text, "hint file " + p);
        ++n_hint;
      }
  }

  for (auto& dir : {fixture("tlc_soc/specs"), fixture("tlc/specs")})
    for (auto& p : files_under(dir, ".spec.json")) {
      SpecModel s = load_spec(p);
      std::string text = write_spec(s);
      o.require(write_spec(parse_spec(text, fs::path(p).parent_path().string(), p)) == text, "spec " + p);
      ++n_spec;
    }

  size_t scripts = 0, sat = 0;
  bool yices = have_program("yices-smt2");
  o.require(yices, "yices-smt2 not installed");
  for (auto& r : runs)
    for (auto& p : files_under(r / "smt", ".smt2")) {
      std::string script = read_file(p);
      SolverVerdict a = run_solver(script, {"z3 -in", 120});
      SolverVerdict b = yices ? run_solver(script, {"yices-smt2", 120}) : a;
      o.require(a.result != SolverVerdict::Unknown, p + ": z3 " + a.reason);
      o.require(a.result == b.result, fmt::format("{}: z3 {} yices {} {}", p, verdict_name(a.result), verdict_name(b.result), b.reason));
      ++scripts;
      sat += a.result == SolverVerdict::Sat;
    }
  o.require(scripts > 0 && sat > 0, "no satisfiable scripts in the corpus");
  o.note(fmt::format("{} VCD, {} KISS2, {} hint, {} spec files lossless; {} SMT-LIB scripts agree ({} sat)", n_vcd, n_kiss,
                     n_hint, n_spec, scripts, sat));
  return o;
}

}  // namespace

int main() {
  Context ctx;
  std::vector<std::pair<std::string, std::function<Outcome(Context&)>>> criteria{
      {"running example passes end to end", criterion1},
      {"unvisited UART states are weakened", criterion2},
      {"firmware bug flips only its scenario", criterion3},
      {"prove agrees with exhaustive exploration", criterion4},
      {"unrolling reproduces simulation", criterion5},
      {"hints keep wide multipliers provable", criterion6},
      {"ranking buckets and recount agree", criterion7},
      {"hint verification is sound", criterion8},
      {"formats round-trip and solvers agree", criterion9},
  };
  int failed = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    Stopwatch sw;
    try {
      o = criteria[i].second(ctx);
    } catch (const std::exception& e) {
      o.ok = false;
      o.notes.push_back(std::string("exception: ") + e.what());
    }
    std::cout << fmt::format("criterion {}: {} - {} ({:.1f} s)\n", i + 1, o.ok ? "PASS" : "FAIL", criteria[i].first,
                             sw.seconds());
    for (auto& n : o.notes) std::cout << "    " << n << "\n";
    std::cout.flush();
    failed += !o.ok;
  }
  return failed ? 1 : 0;
}
