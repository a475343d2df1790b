#include "hive/equiv.hpp"

#include "hive/error.hpp"
#include "hive/util.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <set>

namespace hive {

const char* outcome_name(Verdict::Outcome o) {
  switch (o) {
    case Verdict::Pass: return "Pass";
    case Verdict::Fail: return "Fail";
    case Verdict::Unknown: return "Unknown";
  }
  return "?";
}

namespace {

std::string images_digest(const FlatDesign& f) {
  std::string all;
  for (auto& m : f.memories) {
    all += m.name + ":";
    for (auto& w : m.init) all += w.to_hex() + ",";
    all += ";";
  }
  return sha256_hex(all);
}

std::string hints_digest(const HintSet& h) {
  HintSet copy = h;
  copy.scenario.clear();
  copy.depth = 0;
  copy.canonicalize();
  for (auto& x : copy.hints) {
    x.count = 0;
    x.note.clear();
    x.witness_cycle.reset();
  }
  return sha256_hex(write_hintfile(copy, true));
}

}  // namespace

std::vector<SubProblem> decompose(const std::vector<DecomposeInput>& in) {
  std::vector<SubProblem> out;
  std::map<std::string, size_t> by_key;
  for (auto& d : in) {
    for (auto& spec : d.specs) {
      if (!spec.bound) throw Error(fmt::format("spec '{}' is not bound", spec.path));
      SpecModel anon = spec;
      anon.scenario.clear();
      HintSet hs = d.hints ? d.hints->verified_only() : HintSet{};
      std::string key = fmt::format("{}|{}|{}|{}|{}", spec.instance, sha256_hex(write_spec(anon)), hints_digest(hs),
                                    images_digest(*d.design), d.depth);
      if (auto it = by_key.find(key); it != by_key.end()) {
        out[it->second].scenarios.push_back(d.scenario);
        continue;
      }
      SubProblem sp;
      sp.id = d.scenario + "/" + spec.instance;
      sp.scenarios = {d.scenario};
      sp.module = spec.module;
      sp.instance = spec.instance;
      sp.design = d.design;
      sp.scenario = d.sc;
      sp.hints = hs;
      sp.hints.scenario = d.scenario;
      sp.spec = spec;
      sp.depth = std::max<uint64_t>(d.depth, 1);
      sp.unhinted = !d.hints;
      by_key[key] = out.size();
      out.push_back(std::move(sp));
    }
  }
  return out;
}

std::vector<SpecViolation> replay_counterexample(const SubProblem& sp, const Counterexample& cex) {
  Trace t = run_scenario(*sp.design, cex.replay);
  return spec_violations_trace(sp.spec, *sp.design, t, sp.depth);
}

namespace {

std::string row_text(const SpecModel& s, const std::string& label) {
  for (size_t i = 0; i < s.contract.size(); ++i)
    if (label == fmt::format("contract[{}]", i)) {
      auto& r = s.contract[i];
      std::string pre = r.state.empty() ? to_string(r.when.source) : "state " + r.state;
      return pre + " => " + to_string(r.expect.source);
    }
  for (auto& t : s.transactions)
    if (label == "transaction:" + t.name) return "transaction " + t.name + " on " + to_string(t.trigger.source);
  if (label == "fsm" && s.fsm) return "state register follows the transitions of " + s.kiss2;
  return label;
}

Counterexample build_cex(const SubProblem& sp, const SymState& st, const SolverVerdict& v,
                         const std::vector<Obligation>& obs) {
  const FlatDesign& f = *sp.design;
  Counterexample c;
  TermEvaluator ev(v.model);
  for (auto& o : obs)
    if (ev.eval(o.violated).bit(0)) {
      c.cycle = o.cycle;
      c.label = o.label;
      break;
    }
  c.replay = sp.scenario;
  c.replay.name = sp.scenario.name + "-cex";
  c.replay.stimulus.clear();
  c.replay.checks.clear();
  c.replay.run_cycles = sp.depth + 1;
  for (int i : f.primary_inputs()) {
    const FlatSignal& s = f.signals[i];
    auto& vals = c.inputs[s.name];
    for (uint64_t t = 0; t <= sp.depth; ++t) {
      Term term = st.at(i, t);
      BitVec val = term->is_const() ? term->value : BitVec(s.width);
      if (auto it = v.model.find(symbol_name(s.name, t)); it != v.model.end()) val = it->second.resize(s.width);
      vals.push_back(val);
      if (t == 0 || vals[t] != vals[t - 1]) c.replay.stimulus.push_back({t, s.name, LogicValue(val)});
    }
  }
  std::stable_sort(c.replay.stimulus.begin(), c.replay.stimulus.end(),
                   [](const StimulusEvent& a, const StimulusEvent& b) { return a.cycle < b.cycle; });
  c.expected = row_text(sp.spec, c.label);
  return c;
}

// Spec signals plus their combinational fan-in up to the first register or
// input. A cut anywhere in this set frees a value the property observes
// directly, so it could only add spurious counterexamples.
std::set<std::string> observed_exactly(const FlatDesign& f, const std::vector<std::string>& refs) {
  std::set<std::string> out;
  std::vector<int> work;
  for (auto& r : refs)
    if (auto id = f.find(r)) work.push_back(*id);
  while (!work.empty()) {
    int id = work.back();
    work.pop_back();
    const FlatSignal& s = f.signals[id];
    if (!out.insert(s.name).second) continue;
    if ((s.kind == SigKind::Wire || s.kind == SigKind::Output) && s.driver)
      for (int d : referenced_signals(s.driver)) work.push_back(d);
  }
  return out;
}

bool has_cut_hints(const HintSet& h) {
  return std::any_of(h.hints.begin(), h.hints.end(), [](const Hint& x) {
    return x.kind == HintKind::Overapproximate || x.kind == HintKind::Abstract;
  });
}

}  // namespace

Verdict prove(const SubProblem& sp, const ProveOptions& opt) {
  Stopwatch sw;
  const FlatDesign& f = *sp.design;
  Verdict v;
  v.subproblem = sp.id;
  v.scenarios = sp.scenarios;
  v.module = sp.module;
  v.instance = sp.instance;
  v.depth = sp.depth;

  SymState base;
  base.design = &f;
  base.opts.cycles = sp.depth;
  base.opts.init = InitMode::Reset;
  auto refs = sp.spec.referenced_signals();
  std::set<std::string> keep = observed_exactly(f, refs);
  HintSet hs = opt.use_hints ? sp.hints.verified_only() : HintSet{};

  for (int round = 0; round < 2; ++round) {
    SymState st;
    std::vector<Obligation> obs;
    Term goal;
    try {
      st = apply_hints(base, hs, keep);
      obs = spec_obligations(sp.spec, st);
      std::vector<Term> d;
      for (auto& o : obs) d.push_back(o.violated);
      goal = st.tm->mk_or_all(d);
    } catch (const ResourceExceeded& e) {
      v.outcome = Verdict::Unknown;
      v.reason = e.what();
      break;
    }
    v.peak_terms = std::max(v.peak_terms, st.tm->size());
    v.assumptions = st.assumptions.size();
    v.hints_applied.clear();
    for (auto& a : st.log)
      if (a.note.empty() || a.note == "no condition") ++v.hints_applied[a.kind];
    std::string script;
    SolverVerdict sv;
    try {
      sv = check(st.assumptions, goal, opt.solver, &script);
    } catch (const Error& e) {
      v.outcome = Verdict::Unknown;
      v.reason = e.what();
      break;
    }
    if (!opt.script_path.empty()) write_file(opt.script_path, script);
    if (sv.result == SolverVerdict::Unsat) {
      v.outcome = Verdict::Pass;
      break;
    }
    if (sv.result == SolverVerdict::Unknown) {
      v.outcome = Verdict::Unknown;
      v.reason = sv.reason;
      break;
    }
    Counterexample cex = build_cex(sp, st, sv, obs);
    auto viol = replay_counterexample(sp, cex);
    bool replays = std::any_of(viol.begin(), viol.end(), [&](const SpecViolation& x) {
      return x.cycle == cex.cycle && x.label == cex.label;
    });
    if (replays) {
      Trace t = run_scenario(f, cex.replay);
      for (auto& name : refs) {
        auto val = t.history(name).value_at(cex.cycle);
        if (val) cex.observed[name] = val->to_string();
        if (cex.observed.size() >= 24) break;
      }
      v.outcome = Verdict::Fail;
      v.cex = std::move(cex);
      break;
    }
    if (round == 0 && has_cut_hints(hs)) {
      HintSet exact = hs;
      exact.hints.clear();
      for (auto& h : hs.hints)
        if (h.kind != HintKind::Overapproximate && h.kind != HintKind::Abstract) exact.hints.push_back(h);
      hs = std::move(exact);
      v.refined = true;
      continue;
    }
    v.outcome = Verdict::Unknown;
    v.reason = fmt::format("counterexample ({} at cycle {}) does not replay concretely", cex.label, cex.cycle);
    break;
  }
  v.seconds = sw.seconds();
  return v;
}

PremiseReport check_premises(const std::vector<SubProblem>& sps, std::vector<Verdict>& verdicts,
                             const std::map<std::string, HintSet>& verified_by_scenario) {
  PremiseReport r;
  std::map<std::string, const SubProblem*> by_id;
  for (auto& sp : sps) by_id[sp.id] = &sp;
  for (auto& v : verdicts) {
    if (v.outcome != Verdict::Pass) continue;
    auto it = by_id.find(v.subproblem);
    if (it == by_id.end()) continue;
    const SubProblem& sp = *it->second;
    for (auto& scen : sp.scenarios) {
      auto hs = verified_by_scenario.find(scen);
      for (auto& h : sp.hints.hints) {
        ++r.checked;
        bool ok = false;
        if (hs != verified_by_scenario.end())
          for (auto& g : hs->second.hints)
            if (g.key() == h.key() && g.status == HintStatus::Verified) {
              ok = true;
              break;
            }
        if (ok) {
          ++r.discharged;
          continue;
        }
        r.issues.push_back(fmt::format("{}: {} hint on {}{} is not verified on the system model for scenario {}",
                                       sp.id, hint_kind_name(h.kind), h.signal, h.state.empty() ? "" : " (" + h.state + ")",
                                       scen));
        v.premises_ok = false;
      }
    }
    if (!v.premises_ok) {
      v.outcome = Verdict::Unknown;
      v.reason = "assumption premise not discharged";
    }
  }
  return r;
}

int exit_code(const std::vector<Verdict>& vs) {
  bool fail = false, unknown = false;
  for (auto& v : vs) {
    fail |= v.outcome == Verdict::Fail;
    unknown |= v.outcome == Verdict::Unknown;
  }
  return fail ? 1 : unknown ? 2 : 0;
}

}  // namespace hive
