#pragma once

#include "hive/hints.hpp"
#include "hive/sim.hpp"
#include "hive/smt.hpp"
#include "hive/spec.hpp"

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace hive {

// One (scenario, module) obligation <A> C <P>.
struct SubProblem {
  std::string id;                      // "<scenario>/<instance>" (first member when merged)
  std::vector<std::string> scenarios;  // merged-from, in input order
  std::string module, instance;
  std::shared_ptr<const FlatDesign> design;  // carries the scenario images
  Scenario scenario;                         // representative member
  HintSet hints;                             // assumptions; verified hints only
  SpecModel spec;                            // bound to `design`
  uint64_t depth = 1;
  bool unhinted = false;  // scenario had no hint set
};

struct DecomposeInput {
  std::string scenario;
  std::shared_ptr<const FlatDesign> design;
  Scenario sc;
  std::optional<HintSet> hints;
  std::vector<SpecModel> specs;  // bound
  uint64_t depth = 1;
};

// One SubProblem per (scenario, spec); members with identical hints, spec,
// images and depth are merged.
std::vector<SubProblem> decompose(const std::vector<DecomposeInput>& in);

struct Counterexample {
  uint64_t cycle = 0;
  std::string label;
  std::map<std::string, std::vector<BitVec>> inputs;  // input -> value per cycle 0..depth
  std::map<std::string, std::string> observed;        // property signal -> value at `cycle`
  std::string expected;                               // violated row, source text
  Scenario replay;                                    // replayable stimulus
};

struct Verdict {
  enum Outcome { Pass, Fail, Unknown } outcome = Unknown;
  std::string subproblem;
  std::vector<std::string> scenarios;
  std::string module, instance;
  std::string reason;
  std::optional<Counterexample> cex;
  uint64_t depth = 0;
  double seconds = 0;
  size_t peak_terms = 0;
  size_t assumptions = 0;
  std::map<HintKind, size_t> hints_applied;
  bool refined = false;  // cut hints were dropped after a spurious counterexample
  bool premises_ok = true;
};

const char* outcome_name(Verdict::Outcome o);

struct ProveOptions {
  SolverConfig solver;
  bool use_hints = true;
  std::string script_path;  // non-empty: dump the (last) solver script here
};

// Proof model: reset state, images from the design, all primary inputs free,
// restricted by the applied hints.
Verdict prove(const SubProblem& sp, const ProveOptions& opt);

// Discharges the hint premise: every hint used by a Pass verdict must be verified in
// the system-level verification results. Downgrades otherwise.
struct PremiseReport {
  size_t checked = 0;
  size_t discharged = 0;
  std::vector<std::string> issues;
};
PremiseReport check_premises(const std::vector<SubProblem>& sps, std::vector<Verdict>& verdicts,
                             const std::map<std::string, HintSet>& verified_by_scenario);

struct OracleCaps {
  size_t max_states = 1u << 16;  // distinct nodes per BFS level
  uint32_t max_input_bits = 16;
};

class OracleRefused : public Error {
 public:
  using Error::Error;
};

// Breadth-first exploration of every input sequence to sp.depth from reset.
// Ignores hints. Throws OracleRefused when a cap is exceeded.
Verdict exhaustive_oracle(const SubProblem& sp, const OracleCaps& caps = {});

// Replays a counterexample on the concrete simulator; returns the violations.
std::vector<SpecViolation> replay_counterexample(const SubProblem& sp, const Counterexample& cex);

struct StageTiming {
  std::string stage;
  std::string scenario;
  double seconds = 0;
  long peak_rss_kib = 0;
};

struct RunSummary {
  std::vector<Verdict> verdicts;
  std::map<std::string, HintSet> hints;  // per scenario, after verification
  PremiseReport premises;
  std::vector<StageTiming> timings;
  std::map<std::string, std::string> image_hashes;  // image path -> sha256
};

// 0 all pass, 1 any fail, 2 any unknown (fail wins).
int exit_code(const std::vector<Verdict>& v);

// Deterministic human/machine reports (no wall times).
std::string render_report(const RunSummary& s);
std::string render_summary_json(const RunSummary& s);
// Wall time / memory table in the Hint Generation | Equivalence Checking layout.
std::string render_timing(const RunSummary& s);
std::string render_counterexample(const Verdict& v);

}  // namespace hive
