#pragma once

#include "hive/hints.hpp"
#include "hive/netlist.hpp"
#include "hive/term.hpp"

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace hive {

enum class InitMode { Reset, Free };

// Replacement of one signal's term over a cycle range.
struct SignalOverride {
  enum Kind { Constant, Fresh, Named } kind = Constant;
  BitVec value;  // Constant
  uint64_t from = 0;
  std::optional<uint64_t> to;
  bool pin = true;  // Constant: also assume original term == value

  bool covers(uint64_t t) const { return t >= from && (!to || t <= *to); }
};

struct WeakenConstraint {
  std::string label;
  ExprPtr condition;  // resolved, width 1; assumed false at every cycle
};

struct UnrollOptions {
  uint64_t cycles = 1;  // frames 0..cycles
  InitMode init = InitMode::Reset;
  // Fixed value of input `id` at cycle t, or nullopt for a free symbol.
  std::function<std::optional<BitVec>(int id, uint64_t t)> inputs;
  std::map<int, SignalOverride> overrides;
  std::vector<WeakenConstraint> weaken;
  size_t max_terms = 20'000'000;
};

struct AppliedHint {
  std::string signal;
  HintKind kind;
  std::string state;
  std::string note;
};

// Symbolic unrolling. Frame t holds every signal's term at cycle t and every
// memory's array term at cycle t (before that cycle's write commits).
struct SymState {
  std::shared_ptr<TermManager> tm;
  const FlatDesign* design = nullptr;
  UnrollOptions opts;
  std::vector<std::vector<Term>> sig;
  std::vector<std::vector<Term>> mem;
  std::vector<Term> assumptions;  // width-1 terms
  std::vector<AppliedHint> log;
  std::vector<size_t> terms_per_cycle;  // manager size after each frame

  uint64_t last_cycle() const { return sig.size() - 1; }
  Term at(int id, uint64_t t) const { return sig.at(t).at(id); }
  Term at(const std::string& name, uint64_t t) const { return at(design->id(name), t); }
};

std::string symbol_name(const std::string& signal, uint64_t t);  // "<signal>@<t>"

SymState unroll(const FlatDesign& f, const UnrollOptions& o);

// Re-unrolls with the hints applied. Every hint must be verified.
// Overapproximate/Abstract hints on signals in `keep_exact` are skipped (logged).
SymState apply_hints(const SymState& st, const HintSet& h, const std::set<std::string>& keep_exact = {});

// Term of a resolved expression at cycle t. `temporal` handles Prev/AtTrigger.
Term term_of_expr(const SymState& st, const ExprPtr& e, uint64_t t,
                  const std::function<Term(const Expr&, uint64_t)>& temporal = nullptr);

// SMT-LIB 2 script asserting every assumption and the goal (width 1).
std::string to_smtlib(const std::vector<Term>& assumptions, Term goal);
inline std::string to_smtlib(const SymState& st, Term goal) { return to_smtlib(st.assumptions, goal); }

struct SolverVerdict {
  enum Result { Sat, Unsat, Unknown } result = Unknown;
  std::string reason;                   // Unknown only
  std::map<std::string, BitVec> model;  // Sat only
  double seconds = 0;
};

const char* verdict_name(SolverVerdict::Result r);

struct SolverConfig {
  std::string command;  // empty = default_solver_command()
  double budget_seconds = 60;
};

// $HIVE_SOLVER if set, else "z3 -in".
std::string default_solver_command();

// Runs `command` (via /bin/sh) with the script on stdin.
SolverVerdict run_solver(const std::string& script, const SolverConfig& cfg);
SolverVerdict check(const std::vector<Term>& assumptions, Term goal, const SolverConfig& cfg,
                    std::string* script_out = nullptr);

// Parses solver stdout: first line verdict, then an optional get-value list.
SolverVerdict parse_solver_output(const std::string& out);

}  // namespace hive
