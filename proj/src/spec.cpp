#include "hive/spec.hpp"

#include "hive/error.hpp"
#include "hive/util.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <set>

namespace hive {

using json = nlohmann::json;

namespace {

SpecExpr src_expr(const json& j, const char* key, const std::string& file) {
  if (!j.contains(key) || !j[key].is_string()) throw Error(fmt::format("{}: missing string field '{}'", file, key));
  return {parse_expr(j[key].get<std::string>(), file), nullptr};
}

uint64_t get_u64(const json& j, const char* key, const std::string& file) {
  if (!j.contains(key) || !j[key].is_number_integer() || j[key].get<int64_t>() < 0)
    throw Error(fmt::format("{}: field '{}' must be a non-negative integer", file, key));
  return j[key].get<uint64_t>();
}

}  // namespace

SpecModel parse_spec(const std::string& text, const std::string& base_dir, const std::string& file) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(fmt::format("{}: {}", file, e.what()));
  }
  SpecModel s;
  s.path = file;
  try {
    if (!j.contains("module") || !j["module"].is_string()) throw Error(fmt::format("{}: missing string field 'module'", file));
    s.module = j["module"];
    if (j.contains("scenario")) s.scenario = j["scenario"].get<std::string>();
    if (j.contains("instance")) s.instance = j["instance"].get<std::string>();
    if (j.contains("kiss2")) {
      s.kiss2 = j["kiss2"].get<std::string>();
      std::filesystem::path p(s.kiss2);
      if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
      s.fsm = load_fsm(p.lexically_normal().string());
    }
    if (j.contains("contract"))
      for (auto& r : j["contract"]) {
        ContractRow row;
        if (r.contains("state")) {
          row.state = r["state"].get<std::string>();
          if (!s.fsm) throw Error(fmt::format("{}: contract row names state '{}' but the spec has no kiss2", file, row.state));
          if (!s.fsm->has_state(row.state)) throw Error(fmt::format("{}: undeclared state '{}'", file, row.state));
        } else {
          row.when = src_expr(r, "when", file);
        }
        row.expect = src_expr(r, "expect", file);
        s.contract.push_back(std::move(row));
      }
    if (j.contains("transactions"))
      for (auto& t : j["transactions"]) {
        Transaction tr;
        tr.name = t.at("name").get<std::string>();
        tr.trigger = src_expr(t, "trigger", file);
        for (auto& st : t.at("steps")) {
          TransactionStep step;
          std::string mode = st.value("mode", "at");
          if (mode == "at")
            step.mode = TransactionStep::At;
          else if (mode == "within")
            step.mode = TransactionStep::Within;
          else
            throw Error(fmt::format("{}: step mode must be 'at' or 'within', got '{}'", file, mode));
          step.from = get_u64(st, "from", file);
          step.to = st.contains("to") ? get_u64(st, "to", file) : step.from;
          if (step.to < step.from) throw Error(fmt::format("{}: step window [{}, {}] is empty", file, step.from, step.to));
          step.expect = src_expr(st, "expect", file);
          tr.steps.push_back(std::move(step));
        }
        s.transactions.push_back(std::move(tr));
      }
  } catch (const json::exception& e) {
    throw Error(fmt::format("{}: {}", file, e.what()));
  }
  return s;
}

SpecModel load_spec(const std::string& path) {
  auto base = std::filesystem::path(path).parent_path().string();
  return parse_spec(read_file(path), base.empty() ? "." : base, path);
}

std::string write_spec(const SpecModel& s) {
  json j;
  if (!s.scenario.empty()) j["scenario"] = s.scenario;
  j["module"] = s.module;
  if (!s.instance.empty()) j["instance"] = s.instance;
  if (!s.kiss2.empty()) j["kiss2"] = s.kiss2;
  json c = json::array();
  for (auto& r : s.contract) {
    json row;
    if (!r.state.empty())
      row["state"] = r.state;
    else
      row["when"] = to_string(r.when.source);
    row["expect"] = to_string(r.expect.source);
    c.push_back(std::move(row));
  }
  j["contract"] = std::move(c);
  json ts = json::array();
  for (auto& t : s.transactions) {
    json steps = json::array();
    for (auto& st : t.steps)
      steps.push_back({{"mode", st.mode == TransactionStep::At ? "at" : "within"},
                       {"from", st.from},
                       {"to", st.to},
                       {"expect", to_string(st.expect.source)}});
    ts.push_back({{"name", t.name}, {"trigger", to_string(t.trigger.source)}, {"steps", std::move(steps)}});
  }
  j["transactions"] = std::move(ts);
  return j.dump(2) + "\n";
}

void bind_spec(SpecModel& s, const FlatDesign& f) {
  if (s.instance.empty()) {
    auto insts = f.instances_of(s.module);
    if (s.module == f.top) {
      s.instance = f.top;
    } else {
      if (insts.size() != 1)
        throw Error(fmt::format("{}: module '{}' has {} instances; name one with 'instance'", s.path, s.module, insts.size()));
      s.instance = insts.front()->path;
    }
  }
  const FlatInstance* inst = f.find_instance(s.instance);
  if (!inst) throw Error(fmt::format("{}: no instance '{}'", s.path, s.instance));
  if (inst->module != s.module)
    throw Error(fmt::format("{}: instance '{}' is a '{}', not a '{}'", s.path, s.instance, inst->module, s.module));
  Resolver base = f.resolver();
  Resolver r;
  r.allow_temporal = true;
  std::string prefix = s.instance + ".";
  r.signal = [base, prefix](const std::string& n) -> std::optional<RefInfo> {
    if (auto local = base.signal(prefix + n)) return local;
    return base.signal(n);
  };
  auto bind = [&](SpecExpr& e, uint32_t w) { e.bound = resolve(e.source, r, w); };
  if (s.fsm) resolve_fsm(*s.fsm, f);
  for (auto& row : s.contract) {
    if (row.state.empty()) bind(row.when, 1);
    bind(row.expect, 1);
  }
  for (auto& t : s.transactions) {
    bind(t.trigger, 1);
    for (auto& st : t.steps) bind(st.expect, 1);
  }
  bool bad_trigger = false;
  for (auto& row : s.contract)
    for (auto* e : {&row.when, &row.expect})
      if (e->bound) for_each_node(e->bound, [&](const Expr& n) { bad_trigger |= n.op == Op::AtTrigger; });
  if (bad_trigger) throw Error(fmt::format("{}: at_trigger is only meaningful inside a transaction step", s.path));
  s.bound = true;
}

std::vector<std::string> SpecModel::referenced_signals() const {
  std::set<std::string> names;
  auto add = [&](const SpecExpr& e) {
    if (e.bound) for_each_node(e.bound, [&](const Expr& n) { if (n.op == Op::Ref) names.insert(n.name); });
  };
  for (auto& row : contract) {
    add(row.when);
    add(row.expect);
  }
  for (auto& t : transactions) {
    add(t.trigger);
    for (auto& st : t.steps) add(st.expect);
  }
  if (fsm) {
    names.insert(fsm->state_register);
    for (auto& tr : fsm->transitions)
      for_each_node(tr.guard, [&](const Expr& n) { if (n.op == Op::Ref) names.insert(n.name); });
  }
  return {names.begin(), names.end()};
}

namespace {

uint64_t prev_depth(const ExprPtr& e) {
  if (!e) return 0;
  uint64_t d = 0;
  for (auto& a : e->args) d = std::max(d, prev_depth(a));
  return d + (e->op == Op::Prev ? 1 : 0);
}

uint64_t max_to(const Transaction& t) {
  uint64_t m = 0;
  for (auto& s : t.steps) m = std::max(m, s.to);
  return m;
}

uint64_t trans_prev(const Transaction& t) {
  uint64_t d = prev_depth(t.trigger.bound);
  for (auto& s : t.steps) d = std::max(d, prev_depth(s.expect.bound));
  return d;
}

void need_bound(const SpecModel& s) {
  if (!s.bound) throw Error(fmt::format("spec '{}' is not bound to a design", s.path));
}

}  // namespace

std::vector<Obligation> spec_obligations(const SpecModel& s, const SymState& st) {
  need_bound(s);
  TermManager& tm = *st.tm;
  const uint64_t last = st.last_cycle();
  std::vector<Obligation> out;
  std::function<Term(const Expr&, uint64_t)> temporal;
  uint64_t trigger_cycle = 0;
  temporal = [&](const Expr& e, uint64_t t) -> Term {
    if (e.op == Op::Prev) return term_of_expr(st, e.args[0], t - 1, temporal);
    return term_of_expr(st, e.args[0], trigger_cycle, temporal);
  };
  auto T = [&](const ExprPtr& e, uint64_t t) { return term_of_expr(st, e, t, temporal); };

  for (uint64_t t = 0; t <= last; ++t) {
    for (size_t i = 0; i < s.contract.size(); ++i) {
      auto& row = s.contract[i];
      if (t < std::max(prev_depth(row.when.bound), prev_depth(row.expect.bound))) continue;
      Term pre = row.state.empty() ? T(row.when.bound, t)
                                   : tm.mk_eq(st.at(s.fsm->reg_id, t), tm.mk_const(s.fsm->encoding(row.state)));
      Term v = tm.mk_and(pre, tm.mk_not(T(row.expect.bound, t)));
      out.push_back({t, fmt::format("contract[{}]", i), v});
    }
    for (auto& tr : s.transactions) {
      if (t < trans_prev(tr) || t + max_to(tr) > last) continue;
      trigger_cycle = t;
      std::vector<Term> bad;
      for (auto& step : tr.steps) {
        std::vector<Term> holds;
        for (uint64_t k = step.from; k <= step.to; ++k) holds.push_back(T(step.expect.bound, t + k));
        if (step.mode == TransactionStep::At) {
          for (Term h : holds) bad.push_back(tm.mk_not(h));
        } else {
          bad.push_back(tm.mk_not(tm.mk_or_all(holds)));
        }
      }
      out.push_back({t, "transaction:" + tr.name, tm.mk_and(T(tr.trigger.bound, t), tm.mk_or_all(bad))});
    }
    if (s.fsm && t < last) {
      const Fsm& m = *s.fsm;
      Term cur = st.at(m.reg_id, t), nxt = st.at(m.reg_id, t + 1);
      std::vector<Term> ok;
      for (auto& tr : m.transitions)
        ok.push_back(tm.mk_and(tm.mk_and(tm.mk_eq(cur, tm.mk_const(m.encoding(tr.from))), T(tr.guard, t)),
                               tm.mk_eq(nxt, tm.mk_const(m.encoding(tr.to)))));
      out.push_back({t, "fsm", tm.mk_not(tm.mk_or_all(ok))});
    }
  }
  return out;
}

Term spec_as_terms(const SpecModel& s, const SymState& st) {
  std::vector<Term> v;
  for (auto& o : spec_obligations(s, st)) v.push_back(o.violated);
  return st.tm->mk_or_all(v);
}

namespace {

struct Unknown {};

class FrameEval {
 public:
  explicit FrameEval(const FrameAccess& a) : a_(a) {}
  uint64_t trigger = 0;

  BitVec value(int id, uint64_t cyc) {
    auto v = a_(id, cyc);
    if (!v) throw Unknown{};
    return *v;
  }

  BitVec eval(const Expr& e, uint64_t cyc) {
    auto a = [&](int i) { return eval(*e.args[i], cyc); };
    switch (e.op) {
      case Op::Const: return e.value;
      case Op::Ref: return value(e.id, cyc);
      case Op::Not: return ~a(0);
      case Op::And: return a(0) & a(1);
      case Op::Or: return a(0) | a(1);
      case Op::Xor: return a(0) ^ a(1);
      case Op::Add: return a(0) + a(1);
      case Op::Sub: return a(0) - a(1);
      case Op::Mul: return a(0) * a(1);
      case Op::Eq: return BitVec(1, a(0) == a(1));
      case Op::Neq: return BitVec(1, a(0) != a(1));
      case Op::Ult: return BitVec(1, a(0).ult(a(1)));
      case Op::Concat: return a(0).concat(a(1));
      case Op::Extract: return a(0).extract(e.hi, e.lo);
      case Op::Mux: return eval(*e.args[a(0).bit(0) ? 1 : 2], cyc);
      case Op::Prev: return eval(*e.args[0], cyc - 1);
      case Op::AtTrigger: return eval(*e.args[0], trigger);
      case Op::Read: break;
    }
    throw Error("spec expressions cannot read memories");
  }
  bool holds(const ExprPtr& e, uint64_t cyc) { return eval(*e, cyc).bit(0); }

 private:
  const FrameAccess& a_;
};

// Label order within one cycle, matching spec_obligations.
int label_rank(const SpecModel& s, const std::string& label) {
  for (size_t i = 0; i < s.contract.size(); ++i)
    if (label == fmt::format("contract[{}]", i)) return static_cast<int>(i);
  for (size_t i = 0; i < s.transactions.size(); ++i)
    if (label == "transaction:" + s.transactions[i].name) return static_cast<int>(s.contract.size() + i);
  return static_cast<int>(s.contract.size() + s.transactions.size());
}

}  // namespace

uint64_t spec_lookback(const SpecModel& s) {
  uint64_t w = s.fsm ? 1 : 0;
  for (auto& row : s.contract) w = std::max({w, prev_depth(row.when.bound), prev_depth(row.expect.bound)});
  for (auto& t : s.transactions) w = std::max(w, max_to(t) + trans_prev(t));
  return w;
}

std::vector<SpecViolation> spec_violations_completing(const SpecModel& s, const FrameAccess& access, uint64_t now) {
  need_bound(s);
  FrameEval ev(access);
  std::vector<SpecViolation> out;
  for (size_t i = 0; i < s.contract.size(); ++i) {
    auto& row = s.contract[i];
    if (now < std::max(prev_depth(row.when.bound), prev_depth(row.expect.bound))) continue;
    try {
      bool pre = row.state.empty() ? ev.holds(row.when.bound, now)
                                   : ev.value(s.fsm->reg_id, now) == s.fsm->encoding(row.state);
      if (pre && !ev.holds(row.expect.bound, now)) out.push_back({now, fmt::format("contract[{}]", i)});
    } catch (const Unknown&) {
    }
  }
  for (auto& x : s.transactions) {
    uint64_t span = max_to(x);
    if (now < span || now - span < trans_prev(x)) continue;
    uint64_t t = now - span;
    ev.trigger = t;
    try {
      if (!ev.holds(x.trigger.bound, t)) continue;
      bool bad = false;
      for (auto& step : x.steps) {
        bool any = false, all = true;
        for (uint64_t k = step.from; k <= step.to; ++k) {
          bool h = ev.holds(step.expect.bound, t + k);
          any |= h;
          all &= h;
        }
        bad |= step.mode == TransactionStep::At ? !all : !any;
      }
      if (bad) out.push_back({t, "transaction:" + x.name});
    } catch (const Unknown&) {
    }
  }
  if (s.fsm && now >= 1) {
    const Fsm& m = *s.fsm;
    uint64_t t = now - 1;
    try {
      BitVec cur = ev.value(m.reg_id, t), nxt = ev.value(m.reg_id, now);
      bool ok = false;
      for (auto& x : m.transitions)
        if (cur == m.encoding(x.from) && nxt == m.encoding(x.to) && ev.holds(x.guard, t)) ok = true;
      if (!ok) out.push_back({t, "fsm"});
    } catch (const Unknown&) {
    }
  }
  return out;
}

std::vector<SpecViolation> spec_violations_trace(const SpecModel& s, const FlatDesign& f, const Trace& tr,
                                                 uint64_t last) {
  std::vector<const SignalHistory*> hist(f.signals.size(), nullptr);
  for (size_t i = 0; i < f.signals.size(); ++i)
    if (auto k = tr.find(f.signals[i].name)) hist[i] = &tr.histories[*k];
  FrameAccess access = [&](int id, uint64_t t) -> std::optional<BitVec> {
    if (id < 0 || !hist[id]) return std::nullopt;
    auto v = hist[id]->value_at(t);
    if (!v || !v->is_known()) return std::nullopt;
    return v->known();
  };
  std::vector<SpecViolation> all;
  for (uint64_t now = 0; now <= last; ++now)
    for (auto& v : spec_violations_completing(s, access, now)) all.push_back(v);
  std::stable_sort(all.begin(), all.end(), [&](const SpecViolation& a, const SpecViolation& b) {
    if (a.cycle != b.cycle) return a.cycle < b.cycle;
    return label_rank(s, a.label) < label_rank(s, b.label);
  });
  return all;
}

std::optional<SpecViolation> check_spec_trace(const SpecModel& s, const FlatDesign& f, const Trace& tr, uint64_t last) {
  auto all = spec_violations_trace(s, f, tr, last);
  if (all.empty()) return std::nullopt;
  return all.front();
}

}  // namespace hive
