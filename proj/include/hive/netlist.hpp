#pragma once

#include "hive/bitvec.hpp"
#include "hive/expr.hpp"

#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace hive {

enum class Dir { In, Out };

struct Port {
  std::string name;
  Dir dir;
  uint32_t width;
  int line = 0;
};

struct SignalDecl {
  enum Kind { Wire, Reg } kind;
  std::string name;
  uint32_t width;
  BitVec reset;  // Reg only
  int line = 0;
};

struct MemDecl {
  std::string name;
  uint32_t width;
  uint32_t depth;  // power of two
  std::string image;  // resolved path, may be empty
  int line = 0;
};

struct WritePort {
  std::string mem;
  ExprPtr en, addr, data;
  int line = 0;
};

struct PortBinding {
  std::string port;
  ExprPtr actual;  // Ref to a parent signal or a Const
};

struct Instance {
  std::string name;
  std::string module;
  std::vector<PortBinding> bindings;
  int line = 0;
};

struct FsmAnnotation {
  std::string reg;
  std::vector<std::pair<std::string, BitVec>> states;  // declaration order
  int line = 0;
};

// Expressions are width-resolved against module-local names (ids unused).
struct ModuleDef {
  std::string name;
  std::vector<Port> ports;
  std::vector<SignalDecl> signals;
  std::vector<MemDecl> memories;
  std::vector<std::pair<std::string, ExprPtr>> assigns;  // declaration order
  std::vector<std::pair<std::string, ExprPtr>> nexts;
  std::vector<WritePort> writes;
  std::vector<Instance> instances;
  std::vector<FsmAnnotation> fsms;
  int line = 0;

  const Port* find_port(const std::string& n) const;
  const SignalDecl* find_signal(const std::string& n) const;
  const MemDecl* find_memory(const std::string& n) const;
  std::optional<uint32_t> width_of(const std::string& n) const;
};

enum class SigKind { Input, Output, Wire, Reg };

struct FlatSignal {
  std::string name;
  uint32_t width;
  SigKind kind;
  ExprPtr driver;  // assign for Output/Wire, next-state for Reg, null for Input
  BitVec reset;    // Reg only
  bool is_port = false;
};

struct FlatMemory {
  std::string name;
  uint32_t width, depth, addr_width;
  std::vector<BitVec> init;  // size == depth
  std::string image;
  ExprPtr we, waddr, wdata;  // null when read-only
};

struct Origin {
  std::string module;
  std::string local;
  std::vector<std::string> instance_path;  // starts with the top module name
  std::string full_name() const;
};

struct FlatInstance {
  std::string path;    // e.g. "soc.uart"; the top is "soc"
  std::string module;
  std::vector<int> inputs;   // flat ids of the instance's input ports
  std::vector<int> outputs;
};

struct FlatFsmAnnotation {
  int reg;
  std::vector<std::pair<std::string, BitVec>> states;
};

class FlatDesign {
 public:
  std::string top;
  std::vector<FlatSignal> signals;
  std::vector<Origin> origin;  // parallel to signals
  std::vector<FlatMemory> memories;
  std::vector<Origin> mem_origin;
  std::vector<FlatInstance> instances;
  std::vector<FlatFsmAnnotation> fsm_annotations;
  std::vector<int> comb_order;  // Output/Wire ids in topological order
  int reset_input = -1;         // top-level `rst`, if declared

  void build_index();
  std::optional<int> find(const std::string& name) const;
  int id(const std::string& name) const;  // throws UndeclaredSignal
  std::optional<int> find_memory(const std::string& name) const;
  int memory_id(const std::string& name) const;
  const FlatInstance* find_instance(const std::string& path) const;
  std::vector<const FlatInstance*> instances_of(const std::string& module) const;
  std::vector<int> primary_inputs() const;
  std::vector<int> registers() const;
  Resolver resolver() const;  // resolves flat names

 private:
  std::unordered_map<std::string, int> index_, mem_index_;
};

struct Netlist {
  std::string top;
  std::map<std::string, ModuleDef> modules;
  std::vector<std::string> module_order;  // source order
  std::optional<FlatDesign> flattened;
};

Netlist parse_hnl(const std::string& text, const std::string& file = "<hnl>", const std::string& base_dir = ".");
Netlist parse_hnl_file(const std::string& path);

FlatDesign flatten(const Netlist& n);

struct DepGraph {
  std::vector<std::vector<int>> sig_deps;  // signal -> signals in its driver
  std::vector<std::vector<int>> sig_mems;  // signal -> memories read by its driver
  std::vector<std::vector<int>> mem_deps;  // memory -> signals of its write port
};

DepGraph dependency_graph(const FlatDesign& f);

struct Cone {
  std::vector<int> signals;   // sorted
  std::vector<int> memories;  // sorted
  bool contains(int sig) const;
};

Cone cone_of_influence(const FlatDesign& f, int sig);
Cone cone_of_influence(const FlatDesign& f, const DepGraph& g, const std::vector<int>& roots);
Cone cone_of_influence(const FlatDesign& f, const std::string& name);

// Hex image: one word per line, optional `@ADDR` origins, `//` comments.
std::vector<BitVec> parse_memory_image(const std::string& text, uint32_t width, uint32_t depth,
                                       const std::string& file = "<image>");
void load_memory_image(FlatDesign& f, const std::string& mem, const std::string& image_path);

}  // namespace hive
