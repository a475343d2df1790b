#include "hive/error.hpp"
#include "hive/netlist.hpp"
#include "hive/util.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <functional>

namespace hive {

std::string Origin::full_name() const { return join(instance_path, ".") + "." + local; }

void FlatDesign::build_index() {
  index_.clear();
  mem_index_.clear();
  for (size_t i = 0; i < signals.size(); ++i) index_[signals[i].name] = static_cast<int>(i);
  for (size_t i = 0; i < memories.size(); ++i) mem_index_[memories[i].name] = static_cast<int>(i);
}

std::optional<int> FlatDesign::find(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

int FlatDesign::id(const std::string& name) const {
  auto r = find(name);
  if (!r) throw UndeclaredSignal(name, "");
  return *r;
}

std::optional<int> FlatDesign::find_memory(const std::string& name) const {
  auto it = mem_index_.find(name);
  if (it == mem_index_.end()) return std::nullopt;
  return it->second;
}

int FlatDesign::memory_id(const std::string& name) const {
  auto r = find_memory(name);
  if (!r) throw UndeclaredSignal(name, " (memory)");
  return *r;
}

const FlatInstance* FlatDesign::find_instance(const std::string& path) const {
  for (auto& i : instances)
    if (i.path == path) return &i;
  return nullptr;
}

std::vector<const FlatInstance*> FlatDesign::instances_of(const std::string& module) const {
  std::vector<const FlatInstance*> out;
  for (auto& i : instances)
    if (i.module == module) out.push_back(&i);
  return out;
}

std::vector<int> FlatDesign::primary_inputs() const {
  std::vector<int> out;
  for (size_t i = 0; i < signals.size(); ++i)
    if (signals[i].kind == SigKind::Input) out.push_back(static_cast<int>(i));
  return out;
}

std::vector<int> FlatDesign::registers() const {
  std::vector<int> out;
  for (size_t i = 0; i < signals.size(); ++i)
    if (signals[i].kind == SigKind::Reg) out.push_back(static_cast<int>(i));
  return out;
}

Resolver FlatDesign::resolver() const {
  Resolver r;
  r.signal = [this](const std::string& n) -> std::optional<RefInfo> {
    if (auto i = find(n)) return RefInfo{signals[*i].width, *i, n};
    return std::nullopt;
  };
  r.memory = [this](const std::string& n) -> std::optional<MemInfo> {
    if (auto i = find_memory(n)) return MemInfo{memories[*i].width, memories[*i].addr_width, *i, n};
    return std::nullopt;
  };
  return r;
}

namespace {

class Flattener {
 public:
  explicit Flattener(const Netlist& n) : n_(n) {}

  FlatDesign run() {
    f_.top = n_.top;
    elaborate(n_.modules.at(n_.top), {n_.top}, {});
    f_.build_index();
    // Bind Ref/Read ids now that every flat name exists.
    Resolver r = f_.resolver();
    auto bind = [&](ExprPtr& e) {
      if (e) e = resolve(e, r, e->width);
    };
    for (auto& s : f_.signals) bind(s.driver);
    for (auto& m : f_.memories) {
      bind(m.we);
      bind(m.waddr);
      bind(m.wdata);
    }
    for (auto& inst : f_.instances) {
      for (auto& name : inst_inputs_[inst.path]) inst.inputs.push_back(f_.id(name));
      for (auto& name : inst_outputs_[inst.path]) inst.outputs.push_back(f_.id(name));
    }
    for (auto& [reg, ann] : fsm_pending_) f_.fsm_annotations.push_back({f_.id(reg), ann});
    if (auto rst = f_.find(n_.top + ".rst"); rst && f_.signals[*rst].kind == SigKind::Input) {
      if (f_.signals[*rst].width != 1) throw WidthMismatch("top-level reset 'rst' must be 1 bit");
      f_.reset_input = *rst;
    }
    order_combinational();
    return std::move(f_);
  }

 private:
  // `bindings`: child input port -> expression in flat names.
  void elaborate(const ModuleDef& m, const std::vector<std::string>& path, const std::map<std::string, ExprPtr>& bindings) {
    std::string prefix = join(path, ".");
    bool is_top = path.size() == 1;
    auto flat = [&](const std::string& local) { return prefix + "." + local; };
    auto add = [&](const std::string& local, uint32_t width, SigKind kind, ExprPtr driver, BitVec reset, bool port) {
      f_.signals.push_back({flat(local), width, kind, std::move(driver), std::move(reset), port});
      f_.origin.push_back({m.name, local, path});
    };
    auto rename = [&](const ExprPtr& e) -> ExprPtr {
      if (!e) return e;
      std::function<ExprPtr(const ExprPtr&)> rec = [&](const ExprPtr& x) -> ExprPtr {
        auto out = std::make_shared<Expr>(*x);
        if (x->op == Op::Ref || x->op == Op::Read) out->name = flat(x->name);
        for (auto& a : out->args) a = rec(a);
        return out;
      };
      return rec(e);
    };
    std::map<std::string, ExprPtr> assign;
    for (auto& [s, e] : m.assigns) assign[s] = rename(e);
    std::map<std::string, ExprPtr> next;
    for (auto& [s, e] : m.nexts) next[s] = rename(e);
    // Parent-side signals driven by child outputs.
    for (auto& inst : m.instances)
      for (auto& b : inst.bindings) {
        const Port* p = n_.modules.at(inst.module).find_port(b.port);
        if (p->dir == Dir::Out)
          assign[b.actual->name] = make_ref(prefix + "." + inst.name + "." + b.port, p->width, -1);
      }

    FlatInstance fi{prefix, m.name, {}, {}};
    f_.instances.push_back(fi);
    for (auto& p : m.ports) {
      if (p.dir == Dir::In) {
        inst_inputs_[prefix].push_back(flat(p.name));
        if (is_top)
          add(p.name, p.width, SigKind::Input, nullptr, BitVec(p.width), true);
        else
          add(p.name, p.width, SigKind::Wire, bindings.at(p.name), BitVec(p.width), true);
      } else {
        inst_outputs_[prefix].push_back(flat(p.name));
        add(p.name, p.width, is_top ? SigKind::Output : SigKind::Wire, assign.at(p.name), BitVec(p.width), true);
      }
    }
    for (auto& s : m.signals) {
      if (s.kind == SignalDecl::Reg) {
        auto it = next.find(s.name);
        // A reg without `next` holds its value.
        ExprPtr d = it != next.end() ? it->second : make_ref(flat(s.name), s.width, -1);
        add(s.name, s.width, SigKind::Reg, d, s.reset, false);
      } else {
        add(s.name, s.width, SigKind::Wire, assign.at(s.name), BitVec(s.width), false);
      }
    }
    for (auto& mem : m.memories) {
      FlatMemory fm;
      fm.name = flat(mem.name);
      fm.width = mem.width;
      fm.depth = mem.depth;
      fm.addr_width = log2_exact(mem.depth);
      fm.init.assign(mem.depth, BitVec(mem.width));
      fm.image = mem.image;
      for (auto& w : m.writes)
        if (w.mem == mem.name) {
          fm.we = rename(w.en);
          fm.waddr = rename(w.addr);
          fm.wdata = rename(w.data);
        }
      f_.memories.push_back(fm);
      f_.mem_origin.push_back({m.name, mem.name, path});
    }
    for (auto& a : m.fsms) fsm_pending_.emplace_back(flat(a.reg), a.states);
    for (auto& inst : m.instances) {
      std::map<std::string, ExprPtr> child_bind;
      for (auto& b : inst.bindings) {
        const Port* p = n_.modules.at(inst.module).find_port(b.port);
        if (p->dir == Dir::In) child_bind[b.port] = b.actual->op == Op::Const ? b.actual : rename(b.actual);
      }
      auto child_path = path;
      child_path.push_back(inst.name);
      elaborate(n_.modules.at(inst.module), child_path, child_bind);
    }
  }

  void order_combinational() {
    size_t n = f_.signals.size();
    std::vector<int> color(n, 0);
    std::vector<int> stack;
    auto is_comb = [&](int i) {
      auto k = f_.signals[i].kind;
      return k == SigKind::Wire || k == SigKind::Output;
    };
    std::function<void(int)> visit = [&](int i) {
      color[i] = 1;
      stack.push_back(i);
      for (int d : referenced_signals(f_.signals[i].driver)) {
        if (!is_comb(d)) continue;
        if (color[d] == 1) {
          std::vector<std::string> cyc;
          auto it = std::find(stack.begin(), stack.end(), d);
          for (; it != stack.end(); ++it) cyc.push_back(f_.signals[*it].name);
          cyc.push_back(f_.signals[d].name);
          throw CombinationalCycle(cyc);
        }
        if (color[d] == 0) visit(d);
      }
      stack.pop_back();
      color[i] = 2;
      f_.comb_order.push_back(i);
    };
    for (size_t i = 0; i < n; ++i)
      if (is_comb(static_cast<int>(i)) && color[i] == 0) visit(static_cast<int>(i));
  }

  const Netlist& n_;
  FlatDesign f_;
  std::map<std::string, std::vector<std::string>> inst_inputs_, inst_outputs_;
  std::vector<std::pair<std::string, std::vector<std::pair<std::string, BitVec>>>> fsm_pending_;
};

}  // namespace

FlatDesign flatten(const Netlist& n) {
  Flattener fl(n);
  FlatDesign f = fl.run();
  for (size_t i = 0; i < f.memories.size(); ++i)
    if (!f.memories[i].image.empty()) load_memory_image(f, f.memories[i].name, f.memories[i].image);
  return f;
}

}  // namespace hive
