#pragma once

#include "hive/bitvec.hpp"
#include "hive/error.hpp"
#include "hive/netlist.hpp"
#include "hive/trace.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace hive {

struct StimulusEvent {
  uint64_t cycle;
  std::string signal;  // flat name of a primary input
  LogicValue value;
};

struct TraceCheck {
  uint64_t cycle;
  std::string signal;
  LogicValue value;
};

struct Scenario {
  std::string name;
  std::map<std::string, std::string> firmware;  // flat memory name -> resolved image path
  std::vector<StimulusEvent> stimulus;          // sorted by cycle (stable)
  uint64_t run_cycles = 0;
  uint32_t tau = 5;
  std::vector<std::string> specs;  // resolved spec paths
  std::vector<TraceCheck> checks;
  std::optional<uint64_t> proof_depth;
  std::optional<uint64_t> verify_depth;
  std::string path;  // file it was loaded from, if any
};

// JSON scenario file; relative paths resolve against the file's directory.
Scenario load_scenario(const std::string& path);
Scenario parse_scenario(const std::string& json_text, const std::string& base_dir, const std::string& file = "<scenario>");
std::string write_scenario(const Scenario& sc, const std::string& base_dir);

// Literal with optional x/z digits: "8'h3f", "4'b10x0", "1", or bare "x".
LogicValue parse_logic_literal(const std::string& text, uint32_t width);

// Copy of `f` with the scenario's memory images loaded.
FlatDesign with_scenario_images(const FlatDesign& f, const Scenario& sc);

// Cycle-k values of each stimulus-driven input (inputs hold their last value).
// Result[cycle][input id]; undriven inputs are absent.
std::vector<std::map<int, LogicValue>> stimulus_schedule(const FlatDesign& f, const Scenario& sc, uint64_t cycles);

struct SimState {
  uint64_t cycle = 0;
  std::vector<LogicValue> values;               // every signal
  std::vector<std::vector<LogicValue>> mems;    // every memory word
};

class ScenarioCheckFailed : public Error {
 public:
  ScenarioCheckFailed(uint64_t cycle, std::string signal, const LogicValue& got, const LogicValue& want);
  uint64_t cycle;
  std::string signal;
  std::string got, want;
};

class Simulator {
 public:
  explicit Simulator(const FlatDesign& f);

  // Registers at reset values, memories at their images, inputs X; settled.
  SimState reset() const;
  void set_input(SimState& s, int id, const LogicValue& v) const;
  // Settles combinational signals from registers, inputs and memories.
  void evaluate(SimState& s) const;
  // Clock edge: registers and memory writes commit from the settled `s`;
  // inputs hold. The result is settled.
  SimState step(const SimState& s) const;

  LogicValue eval(const Expr& e, const SimState& s) const;
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  void commit(const SimState& s, SimState& out) const;
  const FlatDesign& f_;
  mutable std::vector<std::string> warnings_;
};

// Runs `run_cycles` cycles (frames 0..run_cycles-1) and checks the scenario's
// expected values. `f` must already carry the scenario images.
Trace run_scenario(const FlatDesign& f, const Scenario& sc, std::vector<std::string>* warnings = nullptr);

// Empty Trace declaring every signal of `f`.
Trace trace_skeleton(const FlatDesign& f);

}  // namespace hive
