#include "hive/error.hpp"
#include "hive/smt.hpp"

#include <fmt/format.h>

namespace hive {

std::string symbol_name(const std::string& signal, uint64_t t) { return fmt::format("{}@{}", signal, t); }

Term term_of_expr(const SymState& st, const ExprPtr& e, uint64_t t,
                  const std::function<Term(const Expr&, uint64_t)>& temporal) {
  TermManager& tm = *st.tm;
  auto rec = [&](const ExprPtr& x) { return term_of_expr(st, x, t, temporal); };
  switch (e->op) {
    case Op::Const: return tm.mk_const(e->value);
    case Op::Ref:
      if (e->id < 0) return st.at(e->name, t);
      return st.at(e->id, t);
    case Op::Not: return tm.mk_not(rec(e->args[0]));
    case Op::And: return tm.mk_and(rec(e->args[0]), rec(e->args[1]));
    case Op::Or: return tm.mk_or(rec(e->args[0]), rec(e->args[1]));
    case Op::Xor: return tm.mk_xor(rec(e->args[0]), rec(e->args[1]));
    case Op::Add: return tm.mk_add(rec(e->args[0]), rec(e->args[1]));
    case Op::Sub: return tm.mk_sub(rec(e->args[0]), rec(e->args[1]));
    case Op::Mul: return tm.mk_mul(rec(e->args[0]), rec(e->args[1]));
    case Op::Eq: return tm.mk_eq(rec(e->args[0]), rec(e->args[1]));
    case Op::Neq: return tm.mk_neq(rec(e->args[0]), rec(e->args[1]));
    case Op::Ult: return tm.mk_ult(rec(e->args[0]), rec(e->args[1]));
    case Op::Concat: return tm.mk_concat(rec(e->args[0]), rec(e->args[1]));
    case Op::Extract: return tm.mk_extract(rec(e->args[0]), e->hi, e->lo);
    case Op::Mux: {
      Term c = rec(e->args[0]);
      if (c->is_const()) return rec(e->args[c->value.bit(0) ? 1 : 2]);
      return tm.mk_ite(c, rec(e->args[1]), rec(e->args[2]));
    }
    case Op::Read: return tm.mk_select(st.mem.at(t).at(e->id), rec(e->args[0]));
    case Op::Prev:
    case Op::AtTrigger:
      if (!temporal) throw Error(fmt::format("temporal operator '{}' outside a spec", op_name(e->op)));
      return temporal(*e, t);
  }
  throw Error("term_of_expr: unknown operator");
}

namespace {

// Sets signal `id` at cycle t: the natural term, or its override.
// Cut signals never build their natural term.
template <typename F>
void assign(SymState& st, int id, uint64_t t, F&& natural) {
  Term& slot = st.sig[t][id];
  auto it = st.opts.overrides.find(id);
  if (it == st.opts.overrides.end() || !it->second.covers(t)) {
    slot = natural();
    return;
  }
  const SignalOverride& o = it->second;
  TermManager& tm = *st.tm;
  const FlatSignal& s = st.design->signals[id];
  switch (o.kind) {
    case SignalOverride::Constant: {
      Term k = tm.mk_const(o.value);
      if (o.pin) st.assumptions.push_back(tm.mk_eq(natural(), k));
      slot = k;
      break;
    }
    case SignalOverride::Fresh: slot = tm.mk_sym(symbol_name("ovr:" + s.name, t), s.width); break;
    case SignalOverride::Named: slot = tm.mk_sym(symbol_name("abs:" + s.name, t), s.width); break;
  }
}

}  // namespace

SymState unroll(const FlatDesign& f, const UnrollOptions& o) {
  SymState st;
  st.tm = std::make_shared<TermManager>(o.max_terms);
  st.design = &f;
  st.opts = o;
  TermManager& tm = *st.tm;
  const size_t n = f.signals.size();
  std::vector<int> regs = f.registers();
  std::vector<int> inputs = f.primary_inputs();

  for (uint64_t t = 0; t <= o.cycles; ++t) {
    st.sig.emplace_back(n, nullptr);
    // Memories at cycle t.
    std::vector<Term> mems;
    for (size_t m = 0; m < f.memories.size(); ++m) {
      const FlatMemory& fm = f.memories[m];
      if (t == 0) {
        const std::vector<BitVec>* init = o.init == InitMode::Reset ? tm.intern_contents(fm.init) : nullptr;
        mems.push_back(tm.mk_array_sym(symbol_name(fm.name, 0), fm.addr_width, fm.width, init));
        continue;
      }
      Term prev = st.mem[t - 1][m];
      if (!fm.we) {
        mems.push_back(prev);
        continue;
      }
      Term we = term_of_expr(st, fm.we, t - 1);
      Term wr = tm.mk_store(prev, term_of_expr(st, fm.waddr, t - 1), term_of_expr(st, fm.wdata, t - 1));
      mems.push_back(tm.mk_ite(we, wr, prev));
    }
    st.mem.push_back(std::move(mems));

    for (int i : inputs) {
      assign(st, i, t, [&] {
        std::optional<BitVec> v = o.inputs ? o.inputs(i, t) : std::nullopt;
        return v ? tm.mk_const(v->resize(f.signals[i].width))
                 : tm.mk_sym(symbol_name(f.signals[i].name, t), f.signals[i].width);
      });
    }
    for (int r : regs) {
      const FlatSignal& s = f.signals[r];
      assign(st, r, t, [&] {
        if (t == 0) return o.init == InitMode::Reset ? tm.mk_const(s.reset) : tm.mk_sym(symbol_name(s.name, 0), s.width);
        Term next = term_of_expr(st, s.driver, t - 1);
        if (f.reset_input >= 0) next = tm.mk_ite(st.sig[t - 1][f.reset_input], tm.mk_const(s.reset), next);
        return next;
      });
    }
    for (int c : f.comb_order) {
      assign(st, c, t, [&] { return term_of_expr(st, f.signals[c].driver, t); });
    }
    for (auto& w : o.weaken) st.assumptions.push_back(tm.mk_not(term_of_expr(st, w.condition, t)));
    st.terms_per_cycle.push_back(tm.size());
  }
  // Trivially true assumptions carry no information.
  std::vector<Term> kept;
  for (Term a : st.assumptions)
    if (!(a->is_const() && a->value.bit(0))) kept.push_back(a);
  st.assumptions = std::move(kept);
  return st;
}

SymState apply_hints(const SymState& st, const HintSet& h, const std::set<std::string>& keep_exact) {
  const FlatDesign& f = *st.design;
  UnrollOptions o = st.opts;
  std::vector<AppliedHint> log = st.log;
  for (auto& hint : h.hints) {
    if (hint.status != HintStatus::Verified)
      throw Error(fmt::format("hint {} on '{}' is {}, only verified hints can be applied", hint_kind_name(hint.kind),
                              hint.signal, hint_status_name(hint.status)));
    int id = f.id(hint.signal);
    const FlatSignal& s = f.signals[id];
    AppliedHint a{hint.signal, hint.kind, hint.state, ""};
    switch (hint.kind) {
      case HintKind::Concretize: {
        if (!hint.value || hint.value->width() != s.width)
          throw WidthMismatch(fmt::format("Concretize value for '{}' does not match width {}", hint.signal, s.width));
        SignalOverride ov;
        ov.kind = SignalOverride::Constant;
        ov.value = *hint.value;
        ov.from = hint.from;
        ov.to = hint.to;
        o.overrides[id] = ov;
        break;
      }
      case HintKind::Weaken:
        if (hint.condition) {
          ExprPtr c = hint.condition;
          bool resolved = true;
          for_each_node(c, [&](const Expr& n) {
            if (n.op == Op::Ref && n.id < 0) resolved = false;
          });
          if (!resolved) c = resolve(c, f.resolver(), 1);
          o.weaken.push_back({hint.signal + ":" + hint.state, c});
        } else {
          a.note = "no condition";
        }
        break;
      case HintKind::Overapproximate:
      case HintKind::Abstract:
        if (keep_exact.count(hint.signal)) {
          a.note = "skipped: referenced by the property";
          break;
        }
        if (o.overrides.count(id)) {
          a.note = "skipped: signal already overridden";
          break;
        }
        o.overrides[id] = {hint.kind == HintKind::Abstract ? SignalOverride::Named : SignalOverride::Fresh, BitVec(1),
                           0, std::nullopt, false};
        break;
    }
    log.push_back(std::move(a));
  }
  SymState out = unroll(f, o);
  out.log = std::move(log);
  return out;
}

}  // namespace hive
