#pragma once

#include "hive/expr.hpp"
#include "hive/fsm.hpp"
#include "hive/netlist.hpp"
#include "hive/smt.hpp"
#include "hive/trace.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace hive {

// Expressions keep their source form (instance-local names) for round trips;
// the bound form uses flat ids and exists after bind_spec.
struct SpecExpr {
  ExprPtr source;
  ExprPtr bound;
};

struct ContractRow {
  std::string state;  // non-empty: precondition is "state register == encoding(state)"
  SpecExpr when;      // used when `state` is empty
  SpecExpr expect;
};

struct TransactionStep {
  enum Mode { At, Within } mode = At;  // At: every offset holds; Within: some offset holds
  uint64_t from = 0, to = 0;           // offsets from the trigger cycle
  SpecExpr expect;                     // may use (at_trigger x)
};

struct Transaction {
  std::string name;
  SpecExpr trigger;
  std::vector<TransactionStep> steps;
};

struct SpecModel {
  std::string scenario;
  std::string module;
  std::string instance;  // flat instance path; empty = the unique instance of `module`
  std::string kiss2;     // path as written in the file
  std::optional<Fsm> fsm;
  std::vector<ContractRow> contract;
  std::vector<Transaction> transactions;
  std::string path;
  bool bound = false;

  // Flat names of every signal the property reads.
  std::vector<std::string> referenced_signals() const;
};

SpecModel parse_spec(const std::string& json_text, const std::string& base_dir = ".", const std::string& file = "<spec>");
SpecModel load_spec(const std::string& path);
std::string write_spec(const SpecModel& s);

// Resolves names against `f` (instance-local first, then flat) and checks widths.
void bind_spec(SpecModel& s, const FlatDesign& f);

struct Obligation {
  uint64_t cycle;  // check cycle (trigger cycle for transactions)
  std::string label;
  Term violated;  // width 1
};

// One disjunct per (row, cycle) within the unrolling.
std::vector<Obligation> spec_obligations(const SpecModel& s, const SymState& st);
// Disjunction of all obligations; constant false for an empty spec.
Term spec_as_terms(const SpecModel& s, const SymState& st);

struct SpecViolation {
  uint64_t cycle;
  std::string label;
};

// Concrete value of signal `id` at cycle t; nullopt when unknown.
using FrameAccess = std::function<std::optional<BitVec>(int id, uint64_t t)>;

// Frames an obligation may need behind its completion cycle.
uint64_t spec_lookback(const SpecModel& s);

// Concrete check of the obligations whose last frame is `now`. Obligations
// with an unknown operand are skipped.
std::vector<SpecViolation> spec_violations_completing(const SpecModel& s, const FrameAccess& access, uint64_t now);

// Trace-level interpretation over cycles 0..last_cycle, sorted by (cycle, label order).
std::vector<SpecViolation> spec_violations_trace(const SpecModel& s, const FlatDesign& f, const Trace& t,
                                                 uint64_t last_cycle);
std::optional<SpecViolation> check_spec_trace(const SpecModel& s, const FlatDesign& f, const Trace& t,
                                              uint64_t last_cycle);

}  // namespace hive
