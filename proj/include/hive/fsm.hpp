#pragma once

#include "hive/expr.hpp"
#include "hive/netlist.hpp"
#include "hive/trace.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace hive {

struct Transition {
  std::string from;
  ExprPtr guard;  // width 1, over flat signal names
  std::string to;
};

struct Fsm {
  std::string state_register;  // flat name
  int reg_id = -1;             // valid when resolved against a design
  uint32_t width = 1;
  std::vector<std::pair<std::string, BitVec>> states;  // declaration order
  std::vector<Transition> transitions;
  std::string initial;

  const BitVec& encoding(const std::string& state) const;
  std::optional<std::string> state_of(const BitVec& v) const;
  bool has_state(const std::string& s) const;
};

struct PathCondition {
  std::string state;
  ExprPtr condition;  // width 1
};

// One FSM per qualifying register, ordered by register name.
std::vector<Fsm> extract_fsms(const FlatDesign& f);
// Re-binds guard and register references to `f` (after parse_kiss2).
void resolve_fsm(Fsm& m, const FlatDesign& f);

// Guards that are conjunctions of 1-bit literals become KISS2 input cubes;
// the rest go to the sidecar (see write_guard_table).
std::string write_kiss2(const Fsm& m);
std::string write_guard_table(const Fsm& m);
Fsm parse_kiss2(const std::string& kiss2, const std::string& guard_table = "", const std::string& file = "<kiss2>");
// Writes <dir>/<stem>.kiss2 and <dir>/<stem>.guards.json; returns the stem.
std::string save_fsm(const Fsm& m, const std::string& dir);
Fsm load_fsm(const std::string& kiss2_path);
std::string fsm_file_stem(const Fsm& m);

bool fsm_equal(const Fsm& a, const Fsm& b);  // structural, guards compared as text

std::map<std::string, PathCondition> state_path_conditions(const Fsm& m);

struct VisitedStates {
  std::set<std::string> states;
  std::set<std::string> unknown_encodings;  // binary strings of undeclared values
};

VisitedStates visited_states(const Fsm& m, const Trace& t);

}  // namespace hive
