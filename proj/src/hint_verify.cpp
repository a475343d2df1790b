#include "hive/hint_verify.hpp"

#include "hive/error.hpp"
#include "hive/util.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <thread>

namespace hive {

uint64_t verification_depth(const Scenario& sc, uint64_t cap) {
  uint64_t d = sc.verify_depth ? *sc.verify_depth : cap;
  if (sc.run_cycles > 0) d = std::min(d, sc.run_cycles - 1);
  return std::max<uint64_t>(d, 1);
}

UnrollOptions system_model_options(const FlatDesign& f, const Scenario& sc, uint64_t depth) {
  auto sched = std::make_shared<std::vector<std::map<int, LogicValue>>>(stimulus_schedule(f, sc, depth + 1));
  UnrollOptions o;
  o.cycles = depth;
  o.init = InitMode::Reset;
  o.inputs = [sched](int id, uint64_t t) -> std::optional<BitVec> {
    if (t >= sched->size()) return std::nullopt;
    auto it = (*sched)[t].find(id);
    if (it == (*sched)[t].end() || !it->second.is_known()) return std::nullopt;
    return it->second.known();
  };
  return o;
}

namespace {

struct Query {
  size_t hint;
  std::vector<std::pair<uint64_t, Term>> per_cycle;  // disjuncts of the goal
  Term goal = nullptr;
  std::string script;
  SolverVerdict verdict;
};

void reject(Hint& h, std::string note, std::optional<uint64_t> witness = std::nullopt) {
  h.status = HintStatus::Rejected;
  h.note = std::move(note);
  h.witness_cycle = witness;
}

}  // namespace

HintSet verify_hints(const HintSet& candidates, const FlatDesign& f, const Scenario& sc, const VerifyOptions& opt) {
  HintSet out = candidates;
  uint64_t depth = verification_depth(sc, opt.depth_cap);
  out.depth = depth;
  SymState st = unroll(f, system_model_options(f, sc, depth));
  TermManager& tm = *st.tm;
  std::set<std::string> protected_regs(out.protected_registers.begin(), out.protected_registers.end());

  std::vector<Query> queries;
  for (size_t i = 0; i < out.hints.size(); ++i) {
    Hint& h = out.hints[i];
    h.witness_cycle.reset();
    auto id = f.find(h.signal);
    if (!id) {
      reject(h, "signal not in design");
      continue;
    }
    const FlatSignal& s = f.signals[*id];
    switch (h.kind) {
      case HintKind::Overapproximate:
        if (protected_regs.count(h.signal))
          reject(h, "FSM state register is protected");
        else if (s.kind == SigKind::Input)
          reject(h, "primary input is already free");
        else
          h.status = HintStatus::Verified;
        continue;
      case HintKind::Abstract:
        if (protected_regs.count(h.signal))
          reject(h, "FSM state register is protected");
        else if (!abstract_cone_ok(f, *id, h.allowed))
          reject(h, "cone of influence leaves the allowed set");
        else
          h.status = HintStatus::Verified;
        continue;
      case HintKind::Weaken:
        if (!h.condition) {
          h.status = HintStatus::Verified;
          continue;
        }
        break;
      case HintKind::Concretize:
        if (protected_regs.count(h.signal)) {
          reject(h, "FSM state register is protected");
          continue;
        }
        if (!h.value || h.value->width() != s.width) {
          reject(h, "value width does not match the signal");
          continue;
        }
        break;
    }
    Query q;
    q.hint = i;
    if (h.kind == HintKind::Concretize) {
      Term k = tm.mk_const(*h.value);
      uint64_t last = h.to ? std::min(*h.to, depth) : depth;
      for (uint64_t t = h.from; t <= last; ++t) q.per_cycle.push_back({t, tm.mk_neq(st.at(*id, t), k)});
    } else {
      ExprPtr c = h.condition;
      bool resolved = true;
      for_each_node(c, [&](const Expr& n) {
        if (n.op == Op::Ref && n.id < 0) resolved = false;
      });
      if (!resolved) c = resolve(c, f.resolver(), 1);
      for (uint64_t t = 0; t <= depth; ++t) q.per_cycle.push_back({t, term_of_expr(st, c, t)});
    }
    std::vector<Term> disj;
    for (auto& [t, g] : q.per_cycle) disj.push_back(g);
    q.goal = tm.mk_or_all(disj);
    q.script = to_smtlib(st.assumptions, q.goal);
    queries.push_back(std::move(q));
  }

  // Constant goals settle without a solver; the rest run in parallel.
  std::vector<Query*> pending;
  for (auto& q : queries) {
    if (q.goal->is_const())
      q.verdict.result = q.goal->value.bit(0) ? SolverVerdict::Sat : SolverVerdict::Unsat;
    else
      pending.push_back(&q);
  }
  if (!opt.script_dir.empty()) {
    std::filesystem::create_directories(opt.script_dir);
    for (auto* q : pending) {
      const Hint& h = out.hints[q->hint];
      std::string stem = h.signal + "." + hint_kind_name(h.kind) + (h.state.empty() ? "" : "." + h.state);
      write_file(opt.script_dir + "/" + stem + ".smt2", q->script);
    }
  }
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t i = next++; i < pending.size(); i = next++) {
      try {
        pending[i]->verdict = run_solver(pending[i]->script, opt.solver);
      } catch (const Error& e) {
        pending[i]->verdict.result = SolverVerdict::Unknown;
        pending[i]->verdict.reason = e.what();
      }
    }
  };
  int jobs = std::max(1, std::min<int>(opt.jobs, static_cast<int>(pending.size())));
  std::vector<std::thread> pool;
  for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  for (auto& q : queries) {
    Hint& h = out.hints[q.hint];
    switch (q.verdict.result) {
      case SolverVerdict::Unsat: h.status = HintStatus::Verified; break;
      case SolverVerdict::Unknown: reject(h, "solver: " + q.verdict.reason); break;
      case SolverVerdict::Sat: {
        TermEvaluator ev(q.verdict.model);
        std::optional<uint64_t> witness;
        for (auto& [t, g] : q.per_cycle)
          if (ev.eval(g).bit(0)) {
            witness = t;
            break;
          }
        reject(h, h.kind == HintKind::Concretize ? "signal takes another value" : "path condition reachable", witness);
        break;
      }
    }
  }
  return out;
}

}  // namespace hive
