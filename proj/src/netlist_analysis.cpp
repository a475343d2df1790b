#include "hive/error.hpp"
#include "hive/netlist.hpp"

#include <algorithm>
#include <deque>

namespace hive {

DepGraph dependency_graph(const FlatDesign& f) {
  DepGraph g;
  g.sig_deps.resize(f.signals.size());
  g.sig_mems.resize(f.signals.size());
  g.mem_deps.resize(f.memories.size());
  for (size_t i = 0; i < f.signals.size(); ++i) {
    if (!f.signals[i].driver) continue;
    g.sig_deps[i] = referenced_signals(f.signals[i].driver);
    g.sig_mems[i] = referenced_memories(f.signals[i].driver);
  }
  for (size_t m = 0; m < f.memories.size(); ++m) {
    const auto& mem = f.memories[m];
    if (!mem.we) continue;
    std::vector<int> d;
    for (auto* e : {&mem.we, &mem.waddr, &mem.wdata}) {
      auto r = referenced_signals(*e);
      d.insert(d.end(), r.begin(), r.end());
    }
    std::sort(d.begin(), d.end());
    d.erase(std::unique(d.begin(), d.end()), d.end());
    g.mem_deps[m] = d;
  }
  return g;
}

bool Cone::contains(int sig) const { return std::binary_search(signals.begin(), signals.end(), sig); }

Cone cone_of_influence(const FlatDesign& f, const DepGraph& g, const std::vector<int>& roots) {
  std::vector<char> seen(f.signals.size(), 0), mseen(f.memories.size(), 0);
  std::deque<int> work;
  for (int r : roots) {
    if (r < 0 || r >= static_cast<int>(f.signals.size())) throw Error("cone_of_influence: bad signal id");
    if (!seen[r]) {
      seen[r] = 1;
      work.push_back(r);
    }
  }
  auto push = [&](int s) {
    if (!seen[s]) {
      seen[s] = 1;
      work.push_back(s);
    }
  };
  while (!work.empty()) {
    int s = work.front();
    work.pop_front();
    for (int d : g.sig_deps[s]) push(d);
    for (int m : g.sig_mems[s]) {
      if (mseen[m]) continue;
      mseen[m] = 1;
      for (int d : g.mem_deps[m]) push(d);
    }
  }
  Cone c;
  for (size_t i = 0; i < seen.size(); ++i)
    if (seen[i]) c.signals.push_back(static_cast<int>(i));
  for (size_t i = 0; i < mseen.size(); ++i)
    if (mseen[i]) c.memories.push_back(static_cast<int>(i));
  return c;
}

Cone cone_of_influence(const FlatDesign& f, int sig) { return cone_of_influence(f, dependency_graph(f), {sig}); }

Cone cone_of_influence(const FlatDesign& f, const std::string& name) { return cone_of_influence(f, f.id(name)); }

}  // namespace hive
