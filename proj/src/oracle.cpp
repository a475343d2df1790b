#include "hive/equiv.hpp"

#include "hive/error.hpp"
#include "hive/util.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <deque>
#include <unordered_set>

namespace hive {

namespace {

using Frame = std::vector<LogicValue>;

struct Node {
  SimState st;
  std::deque<Frame> window;  // newest last
};

std::string node_key(const Node& n) {
  std::string k;
  for (auto& fr : n.window) {
    for (auto& v : fr) k += v.to_string();
    k += '|';
  }
  for (auto& m : n.st.mems)
    for (auto& w : m) k += w.to_string();
  return k;
}

}  // namespace

Verdict exhaustive_oracle(const SubProblem& sp, const OracleCaps& caps) {
  Stopwatch sw;
  const FlatDesign& f = *sp.design;
  std::vector<int> inputs = f.primary_inputs();
  uint32_t bits = 0;
  for (int i : inputs) bits += f.signals[i].width;
  if (bits > caps.max_input_bits)
    throw OracleRefused(fmt::format("oracle refused: {} input bits per cycle exceed the cap of {}", bits,
                                    caps.max_input_bits));
  const uint64_t combos = uint64_t{1} << bits;
  const uint64_t lookback = spec_lookback(sp.spec);
  Simulator sim(f);

  auto apply_inputs = [&](SimState& s, uint64_t a) {
    uint32_t shift = 0;
    for (int i : inputs) {
      uint32_t w = f.signals[i].width;
      BitVec v(w);
      for (uint32_t b = 0; b < w; ++b) v.set_bit(b, (a >> (shift + b)) & 1);
      shift += w;
      sim.set_input(s, i, LogicValue(v));
    }
    sim.evaluate(s);
  };

  Verdict v;
  v.subproblem = sp.id;
  v.scenarios = sp.scenarios;
  v.module = sp.module;
  v.instance = sp.instance;
  v.depth = sp.depth;
  std::optional<SpecViolation> best;
  auto consider = [&](const std::vector<SpecViolation>& found) {
    for (auto& x : found)
      if (!best || x.cycle < best->cycle) best = x;
  };

  std::vector<Node> level;
  SimState root = sim.reset();
  for (uint64_t now = 0; now <= sp.depth; ++now) {
    std::vector<Node> next;
    std::unordered_set<std::string> seen;
    auto expand = [&](const SimState& from, const std::deque<Frame>* hist) {
      for (uint64_t a = 0; a < combos; ++a) {
        Node n;
        n.st = from;
        n.st.cycle = now;
        apply_inputs(n.st, a);
        if (hist) n.window = *hist;
        n.window.push_back(n.st.values);
        while (n.window.size() > lookback + 1) n.window.pop_front();
        FrameAccess access = [&](int id, uint64_t t) -> std::optional<BitVec> {
          uint64_t oldest = now + 1 - n.window.size();
          if (t < oldest || t > now || id < 0) return std::nullopt;
          const LogicValue& lv = n.window[t - oldest][id];
          if (!lv.is_known()) return std::nullopt;
          return lv.known();
        };
        consider(spec_violations_completing(sp.spec, access, now));
        if (seen.insert(node_key(n)).second) {
          if (next.size() >= caps.max_states)
            throw OracleRefused(fmt::format("oracle refused: more than {} distinct states at cycle {}", caps.max_states, now));
          next.push_back(std::move(n));
        }
      }
    };
    if (now == 0) {
      expand(root, nullptr);
    } else {
      for (auto& n : level) expand(sim.step(n.st), &n.window);
    }
    level = std::move(next);
    // Every obligation at or before best->cycle has completed by best->cycle + lookback.
    if (best && now >= best->cycle + lookback) break;
  }
  if (best) {
    v.outcome = Verdict::Fail;
    Counterexample c;
    c.cycle = best->cycle;
    c.label = best->label;
    v.cex = c;
  } else {
    v.outcome = Verdict::Pass;
  }
  v.seconds = sw.seconds();
  return v;
}

}  // namespace hive
