#include "hive/sim.hpp"

#include "hive/error.hpp"

#include <fmt/format.h>

namespace hive {

ScenarioCheckFailed::ScenarioCheckFailed(uint64_t c, std::string sig, const LogicValue& g, const LogicValue& w)
    : Error(fmt::format("expected-trace check failed at cycle {}: {} = {}, want {}", c, sig, g.to_string(), w.to_string())),
      cycle(c),
      signal(std::move(sig)),
      got(g.to_string()),
      want(w.to_string()) {}

Simulator::Simulator(const FlatDesign& f) : f_(f) {}

SimState Simulator::reset() const {
  SimState s;
  s.values.reserve(f_.signals.size());
  for (auto& sig : f_.signals) {
    if (sig.kind == SigKind::Reg)
      s.values.emplace_back(sig.reset);
    else
      s.values.emplace_back(LogicValue::all_x(sig.width));
  }
  for (auto& m : f_.memories) {
    std::vector<LogicValue> words;
    words.reserve(m.depth);
    for (auto& w : m.init) words.emplace_back(w);
    s.mems.push_back(std::move(words));
  }
  evaluate(s);
  return s;
}

void Simulator::set_input(SimState& s, int id, const LogicValue& v) const {
  const auto& sig = f_.signals.at(id);
  if (sig.kind != SigKind::Input) throw Error(fmt::format("'{}' is not a primary input", sig.name));
  if (v.width() != sig.width)
    throw WidthMismatch(fmt::format("stimulus for '{}' has width {}, expected {}", sig.name, v.width(), sig.width));
  s.values[id] = v;
}

void Simulator::evaluate(SimState& s) const {
  for (int i : f_.comb_order) s.values[i] = eval(*f_.signals[i].driver, s);
}

namespace {

LogicValue all_x(uint32_t w) { return LogicValue::all_x(w); }

}  // namespace

LogicValue Simulator::eval(const Expr& e, const SimState& s) const {
  switch (e.op) {
    case Op::Const: return LogicValue(e.value);
    case Op::Ref: return s.values[e.id];
    case Op::Mux: {
      LogicValue c = eval(*e.args[0], s);
      if (!c.is_known()) return all_x(e.width);
      return eval(*e.args[c.known().bit(0) ? 1 : 2], s);
    }
    case Op::And:
    case Op::Or: {
      LogicValue a = eval(*e.args[0], s), b = eval(*e.args[1], s);
      if (a.is_known() && b.is_known()) return LogicValue(e.op == Op::And ? a.known() & b.known() : a.known() | b.known());
      LogicValue r(e.width);
      for (uint32_t i = 0; i < e.width; ++i) {
        char x = a.bit_char(i), y = b.bit_char(i);
        bool xk = x == '0' || x == '1', yk = y == '0' || y == '1';
        char dom = e.op == Op::And ? '0' : '1';
        if ((xk && x == dom) || (yk && y == dom))
          r.set_bit(i, dom);
        else if (xk && yk)
          r.set_bit(i, dom == '0' ? '1' : '0');
        else
          r.set_bit(i, 'x');
      }
      return r;
    }
    case Op::Read: {
      LogicValue a = eval(*e.args[0], s);
      if (!a.is_known()) {
        if (warnings_.size() < 100)
          warnings_.push_back(fmt::format("cycle {}: X address reading memory '{}'", s.cycle, e.name));
        return all_x(e.width);
      }
      return s.mems[e.id][a.known().to_u64()];
    }
    default: break;
  }
  LogicValue a = eval(*e.args[0], s);
  if (!a.is_known()) return all_x(e.width);
  if (e.op == Op::Not) return LogicValue(~a.known());
  if (e.op == Op::Extract) return LogicValue(a.known().extract(e.hi, e.lo));
  LogicValue b = eval(*e.args[1], s);
  if (!b.is_known()) return all_x(e.width);
  const BitVec &x = a.known(), &y = b.known();
  switch (e.op) {
    case Op::Xor: return LogicValue(x ^ y);
    case Op::Add: return LogicValue(x + y);
    case Op::Sub: return LogicValue(x - y);
    case Op::Mul: return LogicValue(x * y);
    case Op::Eq: return LogicValue(BitVec(1, x == y));
    case Op::Neq: return LogicValue(BitVec(1, x != y));
    case Op::Ult: return LogicValue(BitVec(1, x.ult(y)));
    case Op::Concat: return LogicValue(x.concat(y));
    default: break;
  }
  throw Error(fmt::format("simulator: operator '{}' not evaluable here", op_name(e.op)));
}

void Simulator::commit(const SimState& s, SimState& out) const {
  bool rst = f_.reset_input >= 0 && s.values[f_.reset_input].is_known() && s.values[f_.reset_input].known().bit(0);
  for (size_t i = 0; i < f_.signals.size(); ++i) {
    const auto& sig = f_.signals[i];
    if (sig.kind != SigKind::Reg) continue;
    out.values[i] = rst ? LogicValue(sig.reset) : eval(*sig.driver, s);
  }
  for (size_t m = 0; m < f_.memories.size(); ++m) {
    const auto& mem = f_.memories[m];
    if (!mem.we) continue;
    LogicValue we = eval(*mem.we, s);
    if (we.is_known() && !we.known().bit(0)) continue;
    LogicValue addr = eval(*mem.waddr, s);
    if (!we.is_known() || !addr.is_known()) {
      if (warnings_.size() < 100)
        warnings_.push_back(fmt::format("cycle {}: X enable/address on write to '{}' (skipped)", s.cycle, mem.name));
      continue;
    }
    out.mems[m][addr.known().to_u64()] = eval(*mem.wdata, s);
  }
}

SimState Simulator::step(const SimState& s) const {
  SimState out = s;
  commit(s, out);
  out.cycle = s.cycle + 1;
  evaluate(out);
  return out;
}

Trace trace_skeleton(const FlatDesign& f) {
  Trace t;
  for (auto& sig : f.signals) t.add_var(sig.name, sig.width, sig.kind == SigKind::Reg ? "reg" : "wire");
  return t;
}

Trace run_scenario(const FlatDesign& f, const Scenario& sc, std::vector<std::string>* warnings) {
  Trace t = trace_skeleton(f);
  Simulator sim(f);
  auto sched = stimulus_schedule(f, sc, sc.run_cycles);
  std::map<uint64_t, std::vector<const TraceCheck*>> checks;
  for (auto& c : sc.checks) {
    if (c.cycle >= sc.run_cycles)
      throw Error(fmt::format("expected-trace check at cycle {} is beyond run_cycles {}", c.cycle, sc.run_cycles));
    checks[c.cycle].push_back(&c);
  }
  for (auto& c : sc.checks) f.id(c.signal);
  if (sc.run_cycles == 0) return t;
  SimState s = sim.reset();
  for (uint64_t k = 0; k < sc.run_cycles; ++k) {
    if (k > 0) {
      // Commit from the settled previous cycle, then apply this cycle's inputs.
      SimState n = sim.step(s);
      for (auto& [id, v] : sched[k]) sim.set_input(n, id, v);
      sim.evaluate(n);
      s = std::move(n);
    } else {
      for (auto& [id, v] : sched[0]) sim.set_input(s, id, v);
      sim.evaluate(s);
    }
    for (size_t i = 0; i < f.signals.size(); ++i) {
      auto& h = t.histories[i];
      if (h.changes.empty()) h.has_initial = true;
      h.record(k, s.values[i]);
    }
    if (auto it = checks.find(k); it != checks.end())
      for (auto* c : it->second) {
        const LogicValue& got = s.values[f.id(c->signal)];
        if (got != c->value) throw ScenarioCheckFailed(k, c->signal, got, c->value);
      }
  }
  t.end_time = sc.run_cycles - 1;
  if (warnings) *warnings = sim.warnings();
  return t;
}

}  // namespace hive
