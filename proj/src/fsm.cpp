#include "hive/fsm.hpp"

#include "fsm_internal.hpp"

#include "hive/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <functional>
#include <map>
#include <set>

namespace hive {

const BitVec& Fsm::encoding(const std::string& state) const {
  for (auto& [n, v] : states)
    if (n == state) return v;
  throw Error(fmt::format("FSM '{}' has no state '{}'", state_register, state));
}

std::optional<std::string> Fsm::state_of(const BitVec& v) const {
  for (auto& [n, e] : states)
    if (e == v) return n;
  return std::nullopt;
}

bool Fsm::has_state(const std::string& s) const {
  return std::any_of(states.begin(), states.end(), [&](auto& p) { return p.first == s; });
}

namespace {

struct PathLeaf {
  std::vector<std::pair<ExprPtr, bool>> conds;
  ExprPtr leaf;
};

void enumerate_paths(const ExprPtr& e, std::vector<std::pair<ExprPtr, bool>>& conds, std::vector<PathLeaf>& out) {
  if (e->op == Op::Mux) {
    conds.push_back({e->args[0], true});
    enumerate_paths(e->args[1], conds, out);
    conds.back().second = false;
    enumerate_paths(e->args[2], conds, out);
    conds.pop_back();
    return;
  }
  out.push_back({conds, e});
}

// Constants the register is compared against (eq/neq with a constant).
void compared_constants(const ExprPtr& cond, int reg, std::vector<BitVec>& out) {
  for_each_node(cond, [&](const Expr& n) {
    if (n.op != Op::Eq && n.op != Op::Neq) return;
    const Expr& a = *n.args[0];
    const Expr& b = *n.args[1];
    if (a.op == Op::Ref && a.id == reg && b.is_const()) out.push_back(b.value);
    if (b.op == Op::Ref && b.id == reg && a.is_const()) out.push_back(a.value);
  });
}

}  // namespace

// Literals of a conjunction of 1-bit signals, or nullopt.
std::optional<std::vector<std::pair<ExprPtr, bool>>> cube_literals(const ExprPtr& g) {
  std::vector<std::pair<ExprPtr, bool>> lits;
  std::function<bool(const ExprPtr&)> rec = [&](const ExprPtr& e) -> bool {
    if (is_true(e)) return true;
    if (e->op == Op::Ref && e->width == 1) {
      lits.push_back({e, true});
      return true;
    }
    if (e->op == Op::Not && e->args[0]->op == Op::Ref && e->args[0]->width == 1) {
      lits.push_back({e->args[0], false});
      return true;
    }
    if (e->op == Op::And && e->width == 1) return rec(e->args[0]) && rec(e->args[1]);
    return false;
  };
  if (!rec(g)) return std::nullopt;
  std::map<std::string, bool> seen;
  for (auto& [r, pol] : lits) {
    auto it = seen.find(r->name);
    if (it != seen.end() && it->second != pol) return std::nullopt;  // contradictory literal
    seen[r->name] = pol;
  }
  return lits;
}

// Sorted input names over all cube-expressible guards.
std::vector<std::string> cube_inputs(const Fsm& m) {
  std::set<std::string> names;
  for (auto& t : m.transitions)
    if (auto lits = cube_literals(t.guard))
      for (auto& [r, _] : *lits) names.insert(r->name);
  return {names.begin(), names.end()};
}

// Canonical cube form: literals in input order, duplicates removed.
ExprPtr canonical_cube(const std::vector<std::pair<ExprPtr, bool>>& lits, const std::vector<std::string>& inputs) {
  ExprPtr g = bool_const(true);
  for (auto& name : inputs)
    for (auto& [r, pol] : lits)
      if (r->name == name) {
        g = mk_and(g, pol ? r : mk_not(r));
        break;
      }
  return g;
}

void canonicalize_guards(Fsm& m) {
  auto inputs = cube_inputs(m);
  for (auto& t : m.transitions)
    if (auto lits = cube_literals(t.guard)) t.guard = canonical_cube(*lits, inputs);
}

std::vector<Fsm> extract_fsms(const FlatDesign& f) {
  std::map<int, const FlatFsmAnnotation*> ann;
  for (auto& a : f.fsm_annotations) ann[a.reg] = &a;
  std::vector<Fsm> out;
  for (int reg : f.registers()) {
    const FlatSignal& sig = f.signals[reg];
    std::vector<PathLeaf> paths;
    std::vector<std::pair<ExprPtr, bool>> conds;
    enumerate_paths(sig.driver, conds, paths);
    bool leaves_ok = true;
    std::vector<BitVec> encs{sig.reset};
    for (auto& p : paths) {
      if (p.leaf->is_const())
        encs.push_back(p.leaf->value);
      else if (!(p.leaf->op == Op::Ref && p.leaf->id == reg))
        leaves_ok = false;
    }
    std::vector<BitVec> cmp;
    for (auto& p : paths)
      for (auto& [c, _] : p.conds) compared_constants(c, reg, cmp);
    bool qualifies = leaves_ok && !cmp.empty();
    auto a = ann.find(reg);
    if (!qualifies) {
      if (a != ann.end())
        throw Error(fmt::format("fsm annotation on '{}': next-state logic is not a constant-leaf mux tree over state tests",
                                sig.name));
      continue;
    }
    encs.insert(encs.end(), cmp.begin(), cmp.end());
    std::sort(encs.begin(), encs.end());
    encs.erase(std::unique(encs.begin(), encs.end()), encs.end());

    Fsm m;
    m.state_register = sig.name;
    m.reg_id = reg;
    m.width = sig.width;
    if (a != ann.end()) {
      std::set<BitVec> seen;
      for (auto& [name, v] : a->second->states) {
        if (!seen.insert(v).second)
          throw Error(fmt::format("fsm annotation on '{}': duplicate encoding {}", sig.name, v.to_binary()));
        m.states.push_back({name, v});
      }
      for (auto& e : encs)
        if (!seen.count(e))
          throw Error(fmt::format("fsm annotation on '{}' disagrees with extraction: encoding {} is not annotated",
                                  sig.name, e.to_binary()));
    } else {
      for (auto& e : encs) m.states.push_back({"S" + e.to_binary(), e});
    }
    m.initial = *m.state_of(sig.reset);

    for (auto& [sname, enc] : m.states) {
      auto subst = [&, enc = enc](int id) -> std::optional<BitVec> {
        if (id == reg) return enc;
        return std::nullopt;
      };
      std::vector<std::pair<std::string, ExprPtr>> by_target;  // first-seen order
      for (auto& p : paths) {
        ExprPtr g = bool_const(true);
        bool feasible = true;
        for (auto& [c, pol] : p.conds) {
          ExprPtr fc = fold(c, subst);
          if (fc->is_const()) {
            if (fc->value.bit(0) != pol) {
              feasible = false;
              break;
            }
            continue;
          }
          g = mk_and(g, pol ? fc : mk_not(fc));
        }
        if (!feasible) continue;
        std::string to = p.leaf->is_const() ? *m.state_of(p.leaf->value) : sname;
        auto it = std::find_if(by_target.begin(), by_target.end(), [&](auto& x) { return x.first == to; });
        if (it == by_target.end())
          by_target.push_back({to, g});
        else
          it->second = mk_or(it->second, g);
      }
      for (auto& [to, g] : by_target)
        if (!is_false(g)) m.transitions.push_back({sname, g, to});
    }
    canonicalize_guards(m);
    out.push_back(std::move(m));
  }
  std::sort(out.begin(), out.end(), [](const Fsm& x, const Fsm& y) { return x.state_register < y.state_register; });
  return out;
}

void resolve_fsm(Fsm& m, const FlatDesign& f) {
  m.reg_id = f.id(m.state_register);
  if (f.signals[m.reg_id].width != m.width)
    throw WidthMismatch(fmt::format("FSM register '{}' has width {}, KISS2 encodings have {}", m.state_register,
                                    f.signals[m.reg_id].width, m.width));
  Resolver r = f.resolver();
  for (auto& t : m.transitions) t.guard = resolve(t.guard, r, 1);
}

bool fsm_equal(const Fsm& a, const Fsm& b) {
  if (a.state_register != b.state_register || a.width != b.width || a.initial != b.initial || a.states != b.states ||
      a.transitions.size() != b.transitions.size())
    return false;
  for (size_t i = 0; i < a.transitions.size(); ++i) {
    auto &x = a.transitions[i], &y = b.transitions[i];
    if (x.from != y.from || x.to != y.to || to_string(x.guard) != to_string(y.guard)) return false;
  }
  return true;
}

std::map<std::string, PathCondition> state_path_conditions(const Fsm& m) {
  std::map<std::string, PathCondition> out;
  ExprPtr reg = make_ref(m.state_register, m.width, m.reg_id);
  for (auto& [s, _] : m.states) out[s] = {s, bool_const(false)};
  for (auto& t : m.transitions) {
    ExprPtr occ = mk_and(mk_eq(reg, make_const(m.encoding(t.from))), t.guard);
    auto& pc = out[t.to];
    pc.condition = mk_or(pc.condition, occ);
  }
  return out;
}

VisitedStates visited_states(const Fsm& m, const Trace& t) {
  auto idx = t.find(m.state_register);
  if (!idx) throw Error(fmt::format("state register '{}' is not in the trace", m.state_register));
  VisitedStates v;
  for (auto& c : t.histories[*idx].changes) {
    if (!c.value.is_known()) {
      v.unknown_encodings.insert(c.value.to_string());
      continue;
    }
    if (auto s = m.state_of(c.value.known()))
      v.states.insert(*s);
    else
      v.unknown_encodings.insert(c.value.to_string());
  }
  return v;
}

}  // namespace hive
