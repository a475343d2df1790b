#pragma once

#include "hive/hints.hpp"
#include "hive/sim.hpp"
#include "hive/smt.hpp"

#include <string>

namespace hive {

struct VerifyOptions {
  uint64_t depth_cap = 160;
  SolverConfig solver;
  int jobs = 1;
  std::string script_dir;  // non-empty: dump each solver script here
};

// min(run_cycles - 1, scenario verify_depth or cap); at least 1.
uint64_t verification_depth(const Scenario& sc, uint64_t cap);

// System model: reset state, scenario images (already in `f`), stimulus-driven
// inputs fixed to the schedule, undriven inputs free.
UnrollOptions system_model_options(const FlatDesign& f, const Scenario& sc, uint64_t depth);

// Checks every candidate on the unrolled system model. `f` must carry the
// scenario images. Result keeps every hint with status verified or rejected.
HintSet verify_hints(const HintSet& candidates, const FlatDesign& f, const Scenario& sc, const VerifyOptions& opt);

}  // namespace hive
