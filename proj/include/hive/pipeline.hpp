#pragma once

#include "hive/equiv.hpp"
#include "hive/hint_verify.hpp"

#include <optional>
#include <string>
#include <vector>

namespace hive {

class StageError : public Error {
 public:
  StageError(const std::string& stage, const std::string& what) : Error(stage + ": " + what), stage(stage) {}
  std::string stage;
};

struct PipelineConfig {
  std::string design;
  std::string scenarios_dir;
  std::string specs_dir;
  std::string out_dir;
  uint32_t tau = 0;  // 0 = per-scenario value
  SolverConfig solver;
  double verify_budget = 60;
  double prove_budget = 60;
  int jobs = 1;
  uint64_t depth_divisor = 4;
  uint64_t verify_depth_cap = 160;
  bool use_hints = true;
  bool keep_scripts = true;
};

// Throws Error when a path is missing or a numeric field is out of range.
void validate_config(const PipelineConfig& cfg);

// Scenario files of a directory, by file name.
std::vector<std::string> scenario_files(const std::string& dir);
// Specs for a scenario: the scenario's own list plus every spec in `specs_dir`
// naming it (or naming no scenario).
std::vector<std::string> spec_files_for(const Scenario& sc, const std::string& specs_dir);

// Proof depth: scenario proof_depth, else run_cycles / divisor; never deeper
// than the hint verification depth.
uint64_t proof_depth(const Scenario& sc, uint64_t divisor, uint64_t verify_depth_cap);

// Stage entry points. Each reads and writes files only.
Trace stage_sim(const std::string& design, const std::string& scenario, const std::string& out_vcd);
RankedSignals stage_rank(const std::string& vcd, uint32_t tau, const std::string& report);
// Writes <stem>.kiss2 / <stem>.guards.json per FSM; returns the kiss2 paths.
std::vector<std::string> stage_extract_fsm(const std::string& design, const std::string& out_dir);
HintSet stage_gen_hints(const std::string& design, const std::string& scenario, const std::string& vcd,
                        const std::string& rank_report, const std::string& fsm_dir, uint32_t tau,
                        const std::string& out_hints);
// Writes the assumption file (verified only) and the full verification log
// (<out>.log.json next to it).
HintSet stage_verify_hints(const std::string& design, const std::string& scenario, const std::string& candidates,
                           const std::string& out_hints, const VerifyOptions& opt);

struct ProveStageConfig {
  std::string design;
  std::vector<std::string> scenarios;  // scenario files
  std::string hints_dir;               // <scenario>.json and <scenario>.log.json; empty = unhinted
  std::string specs_dir;
  std::string out_dir;                 // verdicts/, cex/, smt/
  SolverConfig solver;
  int jobs = 1;
  uint64_t depth_divisor = 4;
  uint64_t verify_depth_cap = 160;
  bool keep_scripts = true;
};
RunSummary stage_prove(const ProveStageConfig& cfg);

// Reads verdicts/ and the hint logs under `out_dir`, writes report.txt and
// summary.json, returns the rendered report.
std::string stage_report(const std::string& out_dir, const std::string& hints_dir);

std::string write_verdict_json(const Verdict& v, const std::string& base_dir);
Verdict read_verdict_json(const std::string& text, const std::string& base_dir, const std::string& file = "<verdict>");

// sim, rank, extract, generate, verify, decompose, prove, report. Returns the
// exit code of the verdicts.
int run_pipeline(const PipelineConfig& cfg, RunSummary* out = nullptr);

}  // namespace hive
