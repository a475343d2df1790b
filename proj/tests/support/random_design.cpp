#include "random_design.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <functional>
#include <random>
#include <vector>

namespace hive::testing {

namespace {

struct Node {
  Node() = default;
  Node(std::string o, uint32_t w) : op(std::move(o)), width(w) {}
  std::string op;  // ref, const, read, or an HNL operator
  uint32_t width = 1;
  std::string name;
  uint64_t value = 0;
  uint32_t hi = 0, lo = 0;
  std::vector<Node> kids;
};

std::string print(const Node& n, bool prev) {
  if (n.op == "ref") return prev ? "(prev " + n.name + ")" : n.name;
  if (n.op == "const") return fmt::format("{}'d{}", n.width, n.value);
  std::string s = "(" + n.op;
  if (n.op == "extract") s += fmt::format(" {} {}", n.hi, n.lo);
  if (n.op == "read") s += " " + n.name;
  for (auto& k : n.kids) s += " " + print(k, prev);
  return s + ")";
}

bool reads_memory(const Node& n) {
  if (n.op == "read") return true;
  for (auto& k : n.kids)
    if (reads_memory(k)) return true;
  return false;
}

uint64_t mask(uint32_t w) { return w >= 64 ? ~0ull : (1ull << w) - 1; }

struct Sig {
  std::string name;
  uint32_t width;
};

struct Mem {
  std::string name;
  uint32_t width, addr_width;
};

class Gen {
 public:
  explicit Gen(uint64_t seed) : rng_(seed) {}

  uint64_t below(uint64_t n) { return std::uniform_int_distribution<uint64_t>(0, n - 1)(rng_); }
  bool chance(double p) { return std::bernoulli_distribution(p)(rng_); }

  std::vector<Sig> scope;
  std::vector<Mem> mems;
  bool allow_read = true;

  Node leaf(uint32_t w) {
    std::vector<const Sig*> same, any;
    for (auto& s : scope) {
      any.push_back(&s);
      if (s.width == w) same.push_back(&s);
    }
    if (!same.empty() && chance(0.75)) return ref(*same[below(same.size())]);
    if (!any.empty() && chance(0.6)) {
      const Sig& s = *any[below(any.size())];
      if (s.width > w) {
        uint32_t lo = static_cast<uint32_t>(below(s.width - w + 1));
        Node e{"extract", w};
        e.hi = lo + w - 1;
        e.lo = lo;
        e.kids.push_back(ref(s));
        return e;
      }
      if (s.width < w) {
        Node c{"concat", w};
        c.kids.push_back(constant(w - s.width));
        c.kids.push_back(ref(s));
        return c;
      }
    }
    return constant(w);
  }

  Node constant(uint32_t w) {
    Node c{"const", w};
    c.value = below(mask(w) + 1);
    return c;
  }

  Node ref(const Sig& s) {
    Node r{"ref", s.width};
    r.name = s.name;
    return r;
  }

  Node expr(uint32_t w, int depth) {
    if (depth <= 0 || chance(0.25)) return leaf(w);
    int pick = static_cast<int>(below(w == 1 ? 9 : 8));
    switch (pick) {
      case 0: case 1: {
        static const char* ops[] = {"and", "or", "xor", "add", "sub", "mul"};
        Node n{ops[below(6)], w};
        n.kids = {expr(w, depth - 1), expr(w, depth - 1)};
        return n;
      }
      case 2: {
        Node n{"not", w};
        n.kids = {expr(w, depth - 1)};
        return n;
      }
      case 3: case 4: {
        Node n{"mux", w};
        n.kids = {expr(1, depth - 1), expr(w, depth - 1), expr(w, depth - 1)};
        return n;
      }
      case 5: {
        std::vector<const Mem*> fit;
        for (auto& m : mems)
          if (m.width == w) fit.push_back(&m);
        if (!allow_read || fit.empty()) return leaf(w);
        const Mem& m = *fit[below(fit.size())];
        Node n{"read", w};
        n.name = m.name;
        n.kids = {expr(m.addr_width, depth - 1)};
        return n;
      }
      case 6: {
        uint32_t wider = w + 1 + static_cast<uint32_t>(below(2));
        uint32_t lo = static_cast<uint32_t>(below(wider - w + 1));
        Node n{"extract", w};
        n.hi = lo + w - 1;
        n.lo = lo;
        n.kids = {expr(wider, depth - 1)};
        return n;
      }
      case 7: {
        if (w < 2) return leaf(w);
        uint32_t a = 1 + static_cast<uint32_t>(below(w - 1));
        Node n{"concat", w};
        n.kids = {expr(a, depth - 1), expr(w - a, depth - 1)};
        return n;
      }
      default: {
        static const char* ops[] = {"eq", "neq", "ult"};
        uint32_t cw = 1 + static_cast<uint32_t>(below(3));
        Node n{ops[below(3)], 1};
        n.kids = {expr(cw, depth - 1), expr(cw, depth - 1)};
        return n;
      }
    }
  }

  // Small structural change: a constant, an operator, or a leaf.
  Node mutate(Node n) {
    std::vector<Node*> all;
    std::function<void(Node&)> walk = [&](Node& x) {
      all.push_back(&x);
      for (auto& k : x.kids) walk(k);
    };
    walk(n);
    Node& t = *all[below(all.size())];
    if (t.op == "const") {
      t.value = (t.value + 1 + below(mask(t.width))) & mask(t.width);
    } else if (t.op == "and" || t.op == "or" || t.op == "xor") {
      t.op = t.op == "and" ? "or" : t.op == "or" ? "xor" : "and";
    } else {
      Node c = constant(t.width);
      if (c.value == 0) c.value = 1;
      Node x{"xor", t.width};
      x.kids = {t, c};
      t = x;
    }
    return n;
  }

 private:
  std::mt19937_64 rng_;
};

struct Body {
  std::vector<std::string> lines;
  std::vector<std::pair<Sig, Node>> reg_drivers;
};

// Declares regs, wires, an optional memory and outputs inside a module whose
// ports are already in g.scope.
Body random_body(Gen& g, const RandomDesignOptions& opt, const std::vector<Sig>& outputs, const std::string& prefix) {
  Body b;
  std::vector<Sig> regs;
  int nregs = 1 + static_cast<int>(g.below(opt.max_regs));
  for (int i = 0; i < nregs; ++i) {
    Sig r{fmt::format("{}r{}", prefix, i), 1 + static_cast<uint32_t>(g.below(opt.max_reg_width))};
    b.lines.push_back(fmt::format("  reg {}:{} reset={}'d{}", r.name, r.width, r.width, g.below(mask(r.width) + 1)));
    regs.push_back(r);
  }
  for (auto& r : regs) g.scope.push_back(r);
  if (g.chance(opt.memory_chance)) {
    Mem m{prefix + "m", 1 + static_cast<uint32_t>(g.below(2)), 1 + static_cast<uint32_t>(g.below(2))};
    b.lines.push_back(fmt::format("  mem {} width={} depth={}", m.name, m.width, 1u << m.addr_width));
    g.mems.push_back(m);
  }
  for (int i = 0; i < opt.wires; ++i) {
    Sig w{fmt::format("{}w{}", prefix, i), 1 + static_cast<uint32_t>(g.below(3))};
    Node e = g.expr(w.width, 3);
    b.lines.push_back(fmt::format("  wire {}:{}", w.name, w.width));
    b.lines.push_back(fmt::format("  assign {} = {}", w.name, print(e, false)));
    g.scope.push_back(w);
  }
  for (auto& r : regs) {
    Node e = g.expr(r.width, 3);
    b.lines.push_back(fmt::format("  next {} = {}", r.name, print(e, false)));
    b.reg_drivers.push_back({r, e});
  }
  for (auto& m : g.mems) {
    if (m.name.rfind(prefix, 0) != 0) continue;
    b.lines.push_back(fmt::format("  write {} {} {} {}", m.name, print(g.expr(1, 2), false),
                                  print(g.expr(m.addr_width, 2), false), print(g.expr(m.width, 2), false)));
  }
  for (auto& o : outputs) b.lines.push_back(fmt::format("  assign {} = {}", o.name, print(g.expr(o.width, 3), false)));
  return b;
}

}  // namespace

RandomCase random_case(uint64_t seed, const RandomDesignOptions& opt) {
  using json = nlohmann::json;
  Gen g(seed * 0x9e3779b97f4a7c15ull + 17);
  RandomCase rc;
  rc.seed = seed;
  rc.depth = opt.depth;
  std::string text;
  std::vector<Sig> inputs;
  Body top;

  if (opt.hierarchy) {
    uint32_t w = 1 + static_cast<uint32_t>(g.below(opt.max_input_width));
    Gen child(seed * 31 + 7);
    child.scope = {{"x", w}, {"y", w}};
    Body cb = random_body(child, opt, {{"z", w}}, "");
    text += "module cell\n";
    text += fmt::format("  input x:{}\n  input y:{}\n  output z:{}\n", w, w, w);
    for (auto& l : cb.lines) text += l + "\n";
    text += "endmodule\n\n";
    inputs = {{"a", w}, {"b", w}};
    g.scope = {{"a", w}, {"b", w}, {"p", w}, {"q", w}};
    top = random_body(g, opt, {{"o", w}}, "t");
    text += "module rnd\n";
    text += fmt::format("  input a:{}\n  input b:{}\n  output o:{}\n  wire p:{}\n  wire q:{}\n", w, w, w, w, w);
    text += "  inst c0 of cell (x=a, y=b, z=p)\n  inst c1 of cell (x=p, y=a, z=q)\n";
  } else {
    int nin = 1 + static_cast<int>(g.below(opt.max_inputs));
    for (int i = 0; i < nin; ++i) inputs.push_back({fmt::format("i{}", i), 1 + static_cast<uint32_t>(g.below(opt.max_input_width))});
    g.scope = inputs;
    uint32_t ow = 1 + static_cast<uint32_t>(g.below(3));
    top = random_body(g, opt, {{"o", ow}}, "");
    text += "module rnd\n";
    for (auto& in : inputs) text += fmt::format("  input {}:{}\n", in.name, in.width);
    text += fmt::format("  output o:{}\n", ow);
  }
  for (auto& l : top.lines) text += l + "\n";
  text += "endmodule\n";
  rc.hnl = text;

  // Stimulus: every input every cycle, except possibly one left free.
  json sc;
  sc["name"] = "rand";
  sc["run_cycles"] = opt.run_cycles;
  json stim = json::array();
  size_t skip = opt.leave_undriven && inputs.size() > 1 ? g.below(inputs.size()) : inputs.size();
  for (uint64_t c = 0; c < opt.run_cycles; ++c)
    for (size_t i = 0; i < inputs.size(); ++i) {
      if (i == skip) continue;
      stim.push_back({{"cycle", c},
                      {"signal", "rnd." + inputs[i].name},
                      {"value", fmt::format("{}'d{}", inputs[i].width, g.below(mask(inputs[i].width) + 1))}});
    }
  sc["stimulus"] = stim;
  sc["proof_depth"] = opt.depth;
  sc["verify_depth"] = opt.depth;
  rc.scenario_json = sc.dump(2) + "\n";

  // Spec: reflexive restatement of a memory-free next-state function,
  // a mutation of one, or an arbitrary implication.
  std::vector<const std::pair<Sig, Node>*> candidates;
  for (auto& rd : top.reg_drivers)
    if (!reads_memory(rd.second)) candidates.push_back(&rd);
  json spec;
  spec["scenario"] = "rand";
  spec["module"] = "rnd";
  json rows = json::array();
  uint64_t kind = g.below(3);
  if (!candidates.empty() && kind < 2) {
    auto& [reg, drv] = *candidates[g.below(candidates.size())];
    Node d = kind == 0 ? drv : g.mutate(drv);
    rc.spec_kind = kind == 0 ? "reflexive" : "mutated";
    rows.push_back({{"when", "(eq 1'b1 1'b1)"}, {"expect", fmt::format("(eq {} {})", reg.name, print(d, true))}});
  } else {
    g.allow_read = false;
    rc.spec_kind = "random";
    rows.push_back({{"when", print(g.expr(1, 2), false)}, {"expect", print(g.expr(1, 2), false)}});
  }
  spec["contract"] = rows;
  rc.spec_json = spec.dump(2) + "\n";
  return rc;
}

}  // namespace hive::testing
