#include "hive/pipeline.hpp"
#include "hive/util.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <fmt/format.h>

#include <filesystem>
#include <iostream>

namespace fs = std::filesystem;

namespace {

// "60", "60s", "2m".
double parse_budget(const std::string& s) {
  if (s.empty()) throw hive::Error("empty budget");
  double scale = 1;
  std::string num = s;
  if (num.back() == 's') {
    num.pop_back();
  } else if (num.back() == 'm') {
    num.pop_back();
    scale = 60;
  }
  size_t used = 0;
  double v = std::stod(num, &used);
  if (used != num.size() || v <= 0) throw hive::Error(fmt::format("bad budget '{}'", s));
  return v * scale;
}

constexpr int kToolError = 3;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hive: hint-guided bounded refinement checking for HNL designs"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string solver;
  app.add_option("--solver", solver, "SMT-LIB solver command (default: $HIVE_SOLVER or 'z3 -in')");

  std::string design, scenario, out, vcd, report, fsm_dir, rank_path, hints, scen_dir, hints_dir, specs_dir, budget = "60s",
      verify_budget = "60s";
  uint32_t tau = 0;
  int jobs = 1;
  uint64_t divisor = 4, depth_cap = 160;
  bool no_hints = false;

  auto* sim = app.add_subcommand("sim", "simulate a scenario and write its VCD");
  sim->add_option("--design", design)->required();
  sim->add_option("--scenario", scenario)->required();
  sim->add_option("--out", out)->required();

  auto* rank = app.add_subcommand("rank", "rank signals of a VCD by change count");
  rank->add_option("--trace", vcd)->required();
  rank->add_option("--tau", tau)->default_val(5)->check(CLI::PositiveNumber);
  rank->add_option("--report", report)->required();

  auto* xfsm = app.add_subcommand("extract-fsm", "write KISS2 files for every FSM of a design");
  xfsm->add_option("--design", design)->required();
  xfsm->add_option("--out", out)->required();

  auto* gen = app.add_subcommand("gen-hints", "generate candidate hints for a scenario");
  gen->add_option("--design", design)->required();
  gen->add_option("--scenario", scenario)->required();
  gen->add_option("--trace", vcd)->required();
  gen->add_option("--rank", rank_path)->required();
  gen->add_option("--fsm-dir", fsm_dir)->required();
  gen->add_option("--tau", tau, "0 = value from the rank report");
  gen->add_option("--out", out)->required();

  auto* ver = app.add_subcommand("verify-hints", "verify candidate hints on the system model");
  ver->add_option("--design", design)->required();
  ver->add_option("--scenario", scenario)->required();
  ver->add_option("--hints", hints)->required();
  ver->add_option("--out", out)->required();
  ver->add_option("--budget", verify_budget);
  ver->add_option("--jobs", jobs)->check(CLI::PositiveNumber);
  ver->add_option("--depth-cap", depth_cap);
  std::string script_dir;
  ver->add_option("--scripts", script_dir, "directory for the emitted SMT-LIB scripts");

  auto* prv = app.add_subcommand("prove", "check every sub-problem and write verdicts");
  prv->add_option("--design", design)->required();
  prv->add_option("--scenarios", scen_dir)->required();
  prv->add_option("--hints", hints_dir);
  prv->add_option("--specs", specs_dir)->required();
  prv->add_option("--report", out)->required();
  prv->add_option("--jobs", jobs)->check(CLI::PositiveNumber);
  prv->add_option("--budget", budget);
  prv->add_option("--depth-divisor", divisor)->check(CLI::PositiveNumber);
  prv->add_option("--depth-cap", depth_cap);

  auto* rep = app.add_subcommand("report", "render report.txt and summary.json from verdicts");
  rep->add_option("--dir", out)->required();
  rep->add_option("--hints", hints_dir);

  auto* run = app.add_subcommand("run", "run every stage end to end");
  run->add_option("--design", design)->required();
  run->add_option("--scenarios", scen_dir)->required();
  run->add_option("--specs", specs_dir)->required();
  run->add_option("--out", out)->required();
  run->add_option("--tau", tau, "0 = per-scenario value");
  run->add_option("--jobs", jobs)->check(CLI::PositiveNumber);
  run->add_option("--budget", budget, "per proof solver call");
  run->add_option("--verify-budget", verify_budget, "per hint solver call");
  run->add_option("--depth-divisor", divisor)->check(CLI::PositiveNumber);
  run->add_option("--depth-cap", depth_cap);
  run->add_flag("--no-hints", no_hints, "prove without assumptions");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kToolError;
  }

  try {
    hive::SolverConfig sc;
    sc.command = solver.empty() ? hive::default_solver_command() : solver;
    if (*sim) {
      hive::stage_sim(design, scenario, out);
      return 0;
    }
    if (*rank) {
      hive::stage_rank(vcd, tau, report);
      return 0;
    }
    if (*xfsm) {
      for (auto& p : hive::stage_extract_fsm(design, out)) std::cout << p << "\n";
      return 0;
    }
    if (*gen) {
      auto h = hive::stage_gen_hints(design, scenario, vcd, rank_path, fsm_dir, tau, out);
      std::cout << fmt::format("{} candidate hints\n", h.hints.size());
      return 0;
    }
    if (*ver) {
      hive::VerifyOptions vo;
      vo.solver = sc;
      vo.solver.budget_seconds = parse_budget(verify_budget);
      vo.jobs = jobs;
      vo.depth_cap = depth_cap;
      vo.script_dir = script_dir;
      auto h = hive::stage_verify_hints(design, scenario, hints, out, vo);
      std::cout << fmt::format("{} verified, {} rejected\n", h.verified_only().hints.size(),
                               h.hints.size() - h.verified_only().hints.size());
      return 0;
    }
    if (*prv) {
      hive::ProveStageConfig pc;
      pc.design = design;
      pc.scenarios = hive::scenario_files(scen_dir);
      if (pc.scenarios.empty()) throw hive::Error(fmt::format("no scenario files in '{}'", scen_dir));
      pc.hints_dir = hints_dir;
      pc.specs_dir = specs_dir;
      pc.out_dir = out;
      pc.solver = sc;
      pc.solver.budget_seconds = parse_budget(budget);
      pc.jobs = jobs;
      pc.depth_divisor = divisor;
      pc.verify_depth_cap = depth_cap;
      auto sum = hive::stage_prove(pc);
      std::cout << hive::stage_report(out, hints_dir);
      return hive::exit_code(sum.verdicts);
    }
    if (*rep) {
      std::cout << hive::stage_report(out, hints_dir.empty() ? (fs::path(out) / "hints").string() : hints_dir);
      auto summary = nlohmann::json::parse(hive::read_file((fs::path(out) / "summary.json").string()));
      return summary.at("exit_code").get<int>();
    }
    if (*run) {
      hive::PipelineConfig cfg;
      cfg.design = design;
      cfg.scenarios_dir = scen_dir;
      cfg.specs_dir = specs_dir;
      cfg.out_dir = out;
      cfg.tau = tau;
      cfg.solver = sc;
      cfg.prove_budget = parse_budget(budget);
      cfg.verify_budget = parse_budget(verify_budget);
      cfg.jobs = jobs;
      cfg.depth_divisor = divisor;
      cfg.verify_depth_cap = depth_cap;
      cfg.use_hints = !no_hints;
      int rc = hive::run_pipeline(cfg);
      std::cout << hive::read_file((fs::path(out) / "report.txt").string());
      return rc;
    }
  } catch (const std::exception& e) {
    std::cerr << "hive: " << e.what() << "\n";
    return kToolError;
  }
  return kToolError;
}
