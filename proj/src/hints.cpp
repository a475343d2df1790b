#include "hive/hints.hpp"

#include "hive/error.hpp"
#include "hive/util.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <deque>

namespace hive {

using json = nlohmann::json;

const char* hint_kind_name(HintKind k) {
  switch (k) {
    case HintKind::Concretize: return "Concretize";
    case HintKind::Weaken: return "Weaken";
    case HintKind::Overapproximate: return "Overapproximate";
    case HintKind::Abstract: return "Abstract";
  }
  return "?";
}

const char* hint_status_name(HintStatus s) {
  switch (s) {
    case HintStatus::Candidate: return "candidate";
    case HintStatus::Verified: return "verified";
    case HintStatus::Rejected: return "rejected";
  }
  return "?";
}

HintKind parse_hint_kind(const std::string& s) {
  for (auto k : {HintKind::Concretize, HintKind::Weaken, HintKind::Overapproximate, HintKind::Abstract})
    if (s == hint_kind_name(k)) return k;
  throw Error(fmt::format("unknown hint kind '{}'", s));
}

HintStatus parse_hint_status(const std::string& s) {
  for (auto k : {HintStatus::Candidate, HintStatus::Verified, HintStatus::Rejected})
    if (s == hint_status_name(k)) return k;
  throw Error(fmt::format("unknown hint status '{}'", s));
}

std::map<HintKind, size_t> HintSet::counts(std::optional<HintStatus> status) const {
  std::map<HintKind, size_t> out;
  for (auto k : {HintKind::Concretize, HintKind::Weaken, HintKind::Overapproximate, HintKind::Abstract}) out[k] = 0;
  for (auto& h : hints)
    if (!status || h.status == *status) ++out[h.kind];
  return out;
}

void HintSet::canonicalize() {
  std::stable_sort(hints.begin(), hints.end(), [](const Hint& a, const Hint& b) { return a.key() < b.key(); });
  hints.erase(std::unique(hints.begin(), hints.end(), [](const Hint& a, const Hint& b) { return a.key() == b.key(); }),
              hints.end());
  std::sort(protected_registers.begin(), protected_registers.end());
  protected_registers.erase(std::unique(protected_registers.begin(), protected_registers.end()),
                            protected_registers.end());
}

HintSet HintSet::verified_only() const {
  HintSet out = *this;
  out.hints.clear();
  for (auto& h : hints)
    if (h.status == HintStatus::Verified) out.hints.push_back(h);
  return out;
}

namespace {

std::string payload(const Hint& h) {
  std::string p = fmt::format("{}|{}|{}|{}", h.module, h.signal, hint_kind_name(h.kind), h.state);
  if (h.value) p += "|" + h.value->to_literal() + fmt::format("@{}", h.from) + (h.to ? fmt::format("-{}", *h.to) : "");
  if (h.condition) p += "|" + to_string(h.condition);
  for (auto& a : h.allowed) p += "|" + a;
  return p;
}

}  // namespace

bool same_hints(const HintSet& a, const HintSet& b) {
  std::set<std::string> x, y;
  for (auto& h : a.hints) x.insert(payload(h));
  for (auto& h : b.hints) y.insert(payload(h));
  return x == y;
}

Alignment align_signals(const RankedSignals& ranked, const FlatDesign& f) {
  Alignment out;
  for (auto& r : ranked.signals) {
    auto id = f.find(r.name);
    if (!id) throw UndeclaredSignal(r.name, " (trace signal not in the flattened design)");
    const Origin& o = f.origin[*id];
    out[o.module][o.local].push_back({r.name, *id, r.count, r.unknown, r.highz});
  }
  return out;
}

std::vector<WeakenTarget> path_prioritization(const Trace& t, const std::vector<Fsm>& fsms) {
  std::vector<WeakenTarget> out;
  for (auto& m : fsms) {
    VisitedStates v = visited_states(m, t);
    auto pcs = state_path_conditions(m);
    for (auto& [s, _] : m.states)
      if (!v.states.count(s)) out.push_back({m.state_register, s, pcs.at(s).condition});
  }
  return out;
}

std::set<std::string> assigning_states(const FlatDesign& f, const std::vector<Fsm>& fsms, int sig) {
  std::map<int, const Fsm*> by_reg;
  for (auto& m : fsms) by_reg[m.reg_id >= 0 ? m.reg_id : f.id(m.state_register)] = &m;
  std::set<std::string> out;
  std::set<int> seen{sig};
  std::deque<int> work{sig};
  // Follow combinational wires; stop at registers other than `sig` itself.
  while (!work.empty()) {
    int s = work.front();
    work.pop_front();
    const auto& fs = f.signals[s];
    if (!fs.driver) continue;
    for_each_node(fs.driver, [&](const Expr& n) {
      if (n.op == Op::Eq || n.op == Op::Neq) {
        const Expr& a = *n.args[0];
        const Expr& b = *n.args[1];
        const Expr* ref = a.op == Op::Ref ? &a : b.op == Op::Ref ? &b : nullptr;
        const Expr* cst = a.is_const() ? &a : b.is_const() ? &b : nullptr;
        if (ref && cst)
          if (auto it = by_reg.find(ref->id); it != by_reg.end())
            if (auto st = it->second->state_of(cst->value)) out.insert(*st);
      }
      if (n.op == Op::Ref && !seen.count(n.id)) {
        auto k = f.signals[n.id].kind;
        if (k == SigKind::Wire || k == SigKind::Output) {
          seen.insert(n.id);
          work.push_back(n.id);
        }
      }
    });
  }
  return out;
}

namespace {

// Inputs of the instance that owns `sig` (top-level: primary inputs).
std::set<int> instance_inputs(const FlatDesign& f, int sig) {
  const Origin& o = f.origin[sig];
  std::string path = join(o.instance_path, ".");
  std::set<int> out;
  if (const FlatInstance* inst = f.find_instance(path)) out.insert(inst->inputs.begin(), inst->inputs.end());
  if (o.instance_path.size() <= 1)
    for (int i : f.primary_inputs()) out.insert(i);
  return out;
}

// Fan-in of `sig` that stops at allowed signals; true if it never leaves them.
bool cone_within(const FlatDesign& f, const DepGraph& g, int sig, const std::set<int>& allowed) {
  std::set<int> seen{sig};
  std::deque<int> work{sig};
  while (!work.empty()) {
    int s = work.front();
    work.pop_front();
    if (!g.sig_mems[s].empty()) return false;
    for (int d : g.sig_deps[s]) {
      if (allowed.count(d) || d == sig || seen.count(d)) continue;
      auto k = f.signals[d].kind;
      if (k == SigKind::Reg || k == SigKind::Input) return false;
      seen.insert(d);
      work.push_back(d);
    }
  }
  return true;
}

}  // namespace

bool abstract_cone_ok(const FlatDesign& f, int sig, const std::vector<std::string>& allowed) {
  std::set<int> ids;
  for (auto& a : allowed)
    if (auto id = f.find(a)) ids.insert(*id);
  return cone_within(f, dependency_graph(f), sig, ids);
}

HintSet hint_generation(const HintGenInput& in) {
  const FlatDesign& f = *in.design;
  HintSet hs;
  hs.scenario = in.scenario;
  hs.tau = in.tau;
  std::set<int> protected_regs;
  std::set<std::string> visited;
  for (auto& m : *in.fsms) {
    int reg = m.reg_id >= 0 ? m.reg_id : f.id(m.state_register);
    protected_regs.insert(reg);
    hs.protected_registers.push_back(m.state_register);
    for (auto& s : visited_states(m, *in.trace).states) visited.insert(s);
  }
  DepGraph g = dependency_graph(f);
  std::set<int> abstracted;
  Alignment al = align_signals(*in.ranked, f);
  (void)al;  // resolves every ranked name up front

  for (auto& r : in.ranked->signals) {
    int id = f.id(r.name);
    const FlatSignal& sig = f.signals[id];
    Hint h;
    h.module = f.origin[id].module;
    h.signal = r.name;
    h.count = r.count;
    if (r.unknown) {
      h.kind = HintKind::Weaken;
      h.note = "unknown value in trace";
      hs.hints.push_back(std::move(h));
      continue;
    }
    if (protected_regs.count(id)) continue;
    auto tidx = in.trace->find(r.name);
    const SignalHistory* hist = tidx ? &in.trace->histories[*tidx] : nullptr;
    if (r.count <= 1) {
      auto sv = assigning_states(f, *in.fsms, id);
      bool disjoint = std::none_of(sv.begin(), sv.end(), [&](const std::string& s) { return visited.count(s); });
      if (!disjoint || !hist || hist->changes.empty() || !hist->changes.back().value.is_known()) continue;
      h.kind = HintKind::Concretize;
      h.value = hist->changes.back().value.known();
      h.from = r.count == 0 ? 0 : hist->changes.back().time;
      hs.hints.push_back(std::move(h));
      continue;
    }
    if (r.count >= in.tau) {
      if (sig.kind == SigKind::Input) continue;  // already free in every proof model
      h.kind = HintKind::Overapproximate;
      hs.hints.push_back(std::move(h));
      continue;
    }
    if (sig.kind == SigKind::Input) continue;
    std::set<int> allowed = instance_inputs(f, id);
    allowed.insert(abstracted.begin(), abstracted.end());
    if (!cone_within(f, g, id, allowed)) continue;
    h.kind = HintKind::Abstract;
    for (int a : allowed) h.allowed.push_back(f.signals[a].name);
    std::sort(h.allowed.begin(), h.allowed.end());
    abstracted.insert(id);
    hs.hints.push_back(std::move(h));
  }

  for (auto& w : path_prioritization(*in.trace, *in.fsms)) {
    Hint h;
    int reg = f.id(w.fsm_register);
    h.module = f.origin[reg].module;
    h.signal = w.fsm_register;
    h.kind = HintKind::Weaken;
    h.state = w.state;
    h.condition = w.condition;
    hs.hints.push_back(std::move(h));
  }
  hs.canonicalize();
  return hs;
}

std::string write_hintfile(const HintSet& hs, bool include_rejected) {
  json j;
  j["scenario"] = hs.scenario;
  j["tau"] = hs.tau;
  j["depth"] = hs.depth;
  j["protected"] = hs.protected_registers;
  json arr = json::array();
  for (auto& h : hs.hints) {
    if (!include_rejected && h.status != HintStatus::Verified) continue;
    json e;
    e["module"] = h.module;
    e["signal"] = h.signal;
    e["kind"] = hint_kind_name(h.kind);
    e["status"] = hint_status_name(h.status);
    e["count"] = h.count;
    if (h.value) {
      e["value"] = h.value->to_literal();
      e["from"] = h.from;
      if (h.to) e["to"] = *h.to;
    }
    if (!h.state.empty()) e["state"] = h.state;
    if (h.condition) e["condition"] = to_string(h.condition);
    if (h.kind == HintKind::Abstract) e["allowed"] = h.allowed;
    if (h.witness_cycle) e["witness_cycle"] = *h.witness_cycle;
    if (!h.note.empty()) e["note"] = h.note;
    arr.push_back(std::move(e));
  }
  j["hints"] = std::move(arr);
  return j.dump(2) + "\n";
}

HintSet read_hintfile(const std::string& text, const FlatDesign* f, const std::string& file) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(fmt::format("{}: {}", file, e.what()));
  }
  auto need = [&](const json& o, const char* k) -> const json& {
    if (!o.contains(k)) throw Error(fmt::format("{}: missing field '{}'", file, k));
    return o[k];
  };
  HintSet hs;
  try {
    hs.scenario = need(j, "scenario").get<std::string>();
    if (j.contains("tau")) hs.tau = j["tau"].get<uint32_t>();
    if (j.contains("depth")) hs.depth = j["depth"].get<uint64_t>();
    if (j.contains("protected")) hs.protected_registers = j["protected"].get<std::vector<std::string>>();
    for (auto& e : need(j, "hints")) {
      Hint h;
      h.module = need(e, "module").get<std::string>();
      h.signal = need(e, "signal").get<std::string>();
      h.kind = parse_hint_kind(need(e, "kind").get<std::string>());
      h.status = e.contains("status") ? parse_hint_status(e["status"].get<std::string>()) : HintStatus::Verified;
      if (e.contains("count")) h.count = e["count"].get<uint64_t>();
      if (e.contains("value")) {
        h.value = BitVec::parse_sized(e["value"].get<std::string>());
        if (e.contains("from")) h.from = e["from"].get<uint64_t>();
        if (e.contains("to")) h.to = e["to"].get<uint64_t>();
      }
      if (h.kind == HintKind::Concretize && !h.value)
        throw Error(fmt::format("{}: Concretize hint on '{}' has no value", file, h.signal));
      if (e.contains("state")) h.state = e["state"].get<std::string>();
      if (e.contains("condition")) h.condition = parse_expr(e["condition"].get<std::string>(), file);
      if (e.contains("allowed")) h.allowed = e["allowed"].get<std::vector<std::string>>();
      if (e.contains("witness_cycle")) h.witness_cycle = e["witness_cycle"].get<uint64_t>();
      if (e.contains("note")) h.note = e["note"].get<std::string>();
      if (f) {
        int id = f->id(h.signal);
        if (h.value && h.value->width() != f->signals[id].width)
          throw WidthMismatch(fmt::format("{}: Concretize value for '{}' has width {}, signal has {}", file, h.signal,
                                          h.value->width(), f->signals[id].width));
        if (h.condition) h.condition = resolve(h.condition, f->resolver(), 1);
      }
      hs.hints.push_back(std::move(h));
    }
  } catch (const json::exception& e) {
    throw Error(fmt::format("{}: {}", file, e.what()));
  }
  return hs;
}

HintSet load_hintfile(const std::string& path, const FlatDesign* f) { return read_hintfile(read_file(path), f, path); }

}  // namespace hive
