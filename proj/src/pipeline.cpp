#include "hive/pipeline.hpp"

#include "hive/rank.hpp"
#include "hive/util.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <mutex>
#include <set>
#include <thread>

namespace hive {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::vector<std::string> files_with_suffix(const std::string& dir, const std::string& suffix,
                                           const std::vector<std::string>& exclude = {}) {
  std::vector<std::string> out;
  if (dir.empty() || !fs::is_directory(dir)) return out;
  for (auto& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    std::string name = e.path().filename().string();
    auto ends = [&](const std::string& s) { return name.size() >= s.size() && name.compare(name.size() - s.size(), s.size(), s) == 0; };
    if (!ends(suffix)) continue;
    if (std::any_of(exclude.begin(), exclude.end(), ends)) continue;
    out.push_back(e.path().string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string safe_id(const std::string& id) {
  std::string s = id;
  std::replace(s.begin(), s.end(), '/', '_');
  return s;
}

FlatDesign load_design(const std::string& path) {
  if (!fs::exists(path)) throw Error(fmt::format("design '{}' does not exist", path));
  return flatten(parse_hnl_file(path));
}

template <class F>
auto tagged(const std::string& stage, F&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
}

std::string log_path_for(const std::string& hints_path) {
  fs::path p(hints_path);
  return (p.parent_path() / (p.stem().string() + ".log.json")).string();
}

long peak_rss_kib() { return std::max(peak_rss_self_kib(), peak_rss_children_kib()); }

}  // namespace

void validate_config(const PipelineConfig& cfg) {
  if (!fs::is_regular_file(cfg.design)) throw Error(fmt::format("config: design '{}' does not exist", cfg.design));
  if (!fs::is_directory(cfg.scenarios_dir))
    throw Error(fmt::format("config: scenario directory '{}' does not exist", cfg.scenarios_dir));
  if (!fs::is_directory(cfg.specs_dir)) throw Error(fmt::format("config: spec directory '{}' does not exist", cfg.specs_dir));
  if (cfg.out_dir.empty()) throw Error("config: output directory is empty");
  if (cfg.jobs < 1) throw Error("config: jobs must be >= 1");
  if (cfg.depth_divisor < 1) throw Error("config: depth divisor must be >= 1");
  if (cfg.verify_budget <= 0 || cfg.prove_budget <= 0) throw Error("config: budgets must be positive");
  if (scenario_files(cfg.scenarios_dir).empty())
    throw Error(fmt::format("config: no scenario files in '{}'", cfg.scenarios_dir));
}

std::vector<std::string> scenario_files(const std::string& dir) { return files_with_suffix(dir, ".json"); }

std::vector<std::string> spec_files_for(const Scenario& sc, const std::string& specs_dir) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  auto add = [&](const std::string& p) {
    std::string key = fs::weakly_canonical(p).string();
    if (seen.insert(key).second) out.push_back(p);
  };
  for (auto& p : sc.specs) add(p);
  for (auto& p : files_with_suffix(specs_dir, ".spec.json")) {
    json j = json::parse(read_file(p), nullptr, false);
    if (j.is_discarded()) throw Error(fmt::format("{}: not valid JSON", p));
    std::string scen = j.value("scenario", std::string());
    if (scen.empty() || scen == sc.name) add(p);
  }
  return out;
}

uint64_t proof_depth(const Scenario& sc, uint64_t divisor, uint64_t verify_depth_cap) {
  uint64_t d = sc.proof_depth ? *sc.proof_depth : sc.run_cycles / std::max<uint64_t>(divisor, 1);
  d = std::min(d, verification_depth(sc, verify_depth_cap));
  return std::max<uint64_t>(d, 1);
}

Trace stage_sim(const std::string& design, const std::string& scenario, const std::string& out_vcd) {
  return tagged("sim", [&] {
    FlatDesign base = load_design(design);
    Scenario sc = load_scenario(scenario);
    FlatDesign f = with_scenario_images(base, sc);
    Trace t = run_scenario(f, sc);
    write_file(out_vcd, write_vcd(t));
    return t;
  });
}

RankedSignals stage_rank(const std::string& vcd, uint32_t tau, const std::string& report) {
  return tagged("rank", [&] {
    RankedSignals r = signal_ranking(parse_vcd_file(vcd), tau);
    write_file(report, write_rank_report(r));
    return r;
  });
}

std::vector<std::string> stage_extract_fsm(const std::string& design, const std::string& out_dir) {
  return tagged("extract-fsm", [&] {
    FlatDesign f = load_design(design);
    std::vector<std::string> out;
    fs::create_directories(out_dir);
    for (auto& m : extract_fsms(f)) out.push_back((fs::path(out_dir) / (save_fsm(m, out_dir) + ".kiss2")).string());
    return out;
  });
}

namespace {

std::vector<Fsm> load_fsms(const std::string& dir, const FlatDesign& f) {
  std::vector<Fsm> out;
  for (auto& p : files_with_suffix(dir, ".kiss2")) {
    Fsm m = load_fsm(p);
    resolve_fsm(m, f);
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace

HintSet stage_gen_hints(const std::string& design, const std::string& scenario, const std::string& vcd,
                        const std::string& rank_report, const std::string& fsm_dir, uint32_t tau,
                        const std::string& out_hints) {
  return tagged("gen-hints", [&] {
    Scenario sc = load_scenario(scenario);
    FlatDesign f = with_scenario_images(load_design(design), sc);
    Trace t = parse_vcd_file(vcd);
    RankedSignals r = read_rank_report(read_file(rank_report));
    std::vector<Fsm> fsms = load_fsms(fsm_dir, f);
    HintGenInput in;
    in.scenario = sc.name;
    in.tau = tau ? tau : r.tau;
    in.ranked = &r;
    in.design = &f;
    in.trace = &t;
    in.fsms = &fsms;
    HintSet h = hint_generation(in);
    write_file(out_hints, write_hintfile(h, true));
    return h;
  });
}

HintSet stage_verify_hints(const std::string& design, const std::string& scenario, const std::string& candidates,
                           const std::string& out_hints, const VerifyOptions& opt) {
  return tagged("verify-hints", [&] {
    Scenario sc = load_scenario(scenario);
    FlatDesign f = with_scenario_images(load_design(design), sc);
    HintSet cand = load_hintfile(candidates, &f);
    HintSet h = verify_hints(cand, f, sc, opt);
    write_file(out_hints, write_hintfile(h, false));
    write_file(log_path_for(out_hints), write_hintfile(h, true));
    return h;
  });
}

std::string write_verdict_json(const Verdict& v, const std::string& base_dir) {
  json j;
  j["subproblem"] = v.subproblem;
  j["scenarios"] = v.scenarios;
  j["module"] = v.module;
  j["instance"] = v.instance;
  j["outcome"] = outcome_name(v.outcome);
  j["reason"] = v.reason;
  j["depth"] = v.depth;
  j["peak_terms"] = v.peak_terms;
  j["assumptions"] = v.assumptions;
  j["refined"] = v.refined;
  j["premises_ok"] = v.premises_ok;
  json h = json::object();
  for (auto& [k, n] : v.hints_applied) h[hint_kind_name(k)] = n;
  j["hints_applied"] = h;
  if (v.cex) {
    auto& c = *v.cex;
    json cj;
    cj["cycle"] = c.cycle;
    cj["label"] = c.label;
    cj["expected"] = c.expected;
    cj["observed"] = c.observed;
    json in = json::object();
    for (auto& [name, vals] : c.inputs) {
      json a = json::array();
      for (auto& x : vals) a.push_back(x.to_literal());
      in[name] = a;
    }
    cj["inputs"] = in;
    cj["replay"] = json::parse(write_scenario(c.replay, base_dir));
    j["counterexample"] = cj;
  }
  return j.dump(2) + "\n";
}

Verdict read_verdict_json(const std::string& text, const std::string& base_dir, const std::string& file) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw Error(fmt::format("{}: not a verdict object", file));
  try {
    Verdict v;
    v.subproblem = j.at("subproblem").get<std::string>();
    v.scenarios = j.at("scenarios").get<std::vector<std::string>>();
    v.module = j.at("module").get<std::string>();
    v.instance = j.at("instance").get<std::string>();
    std::string o = j.at("outcome").get<std::string>();
    if (o == "Pass")
      v.outcome = Verdict::Pass;
    else if (o == "Fail")
      v.outcome = Verdict::Fail;
    else if (o == "Unknown")
      v.outcome = Verdict::Unknown;
    else
      throw Error(fmt::format("{}: unknown outcome '{}'", file, o));
    v.reason = j.value("reason", std::string());
    v.depth = j.at("depth").get<uint64_t>();
    v.peak_terms = j.value("peak_terms", size_t{0});
    v.assumptions = j.value("assumptions", size_t{0});
    v.refined = j.value("refined", false);
    v.premises_ok = j.value("premises_ok", true);
    if (j.contains("hints_applied"))
      for (auto& [k, n] : j["hints_applied"].items()) v.hints_applied[parse_hint_kind(k)] = n.get<size_t>();
    if (j.contains("counterexample")) {
      auto& cj = j["counterexample"];
      Counterexample c;
      c.cycle = cj.at("cycle").get<uint64_t>();
      c.label = cj.at("label").get<std::string>();
      c.expected = cj.value("expected", std::string());
      c.observed = cj.value("observed", std::map<std::string, std::string>());
      for (auto& [name, arr] : cj.at("inputs").items())
        for (auto& x : arr) c.inputs[name].push_back(BitVec::parse_sized(x.get<std::string>()));
      c.replay = parse_scenario(cj.at("replay").dump(), base_dir, file);
      v.cex = std::move(c);
    }
    return v;
  } catch (const json::exception& e) {
    throw Error(fmt::format("{}: {}", file, e.what()));
  }
}

RunSummary stage_prove(const ProveStageConfig& cfg) {
  return tagged("prove", [&] {
    RunSummary sum;
    FlatDesign base = load_design(cfg.design);
    std::vector<DecomposeInput> inputs;
    std::map<std::string, HintSet> logs;
    for (auto& path : cfg.scenarios) {
      Scenario sc = load_scenario(path);
      DecomposeInput d;
      d.scenario = sc.name;
      d.design = std::make_shared<const FlatDesign>(with_scenario_images(base, sc));
      for (auto& [mem, img] : sc.firmware) sum.image_hashes[fs::path(img).filename().string()] = sha256_hex(read_file(img));
      for (auto& sp : spec_files_for(sc, cfg.specs_dir)) {
        SpecModel s = load_spec(sp);
        bind_spec(s, *d.design);
        d.specs.push_back(std::move(s));
      }
      if (!cfg.hints_dir.empty()) {
        std::string hp = (fs::path(cfg.hints_dir) / (sc.name + ".json")).string();
        d.hints = load_hintfile(hp, d.design.get());
        std::string lp = log_path_for(hp);
        logs[sc.name] = fs::exists(lp) ? load_hintfile(lp, d.design.get()) : HintSet{};
      }
      d.depth = proof_depth(sc, cfg.depth_divisor, cfg.verify_depth_cap);
      d.sc = std::move(sc);
      inputs.push_back(std::move(d));
    }
    std::vector<SubProblem> sps = decompose(inputs);
    std::vector<Verdict> verdicts(sps.size());
    std::atomic<size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mu;
    auto worker = [&] {
      for (size_t i; (i = next++) < sps.size();) {
        try {
          ProveOptions po;
          po.solver = cfg.solver;
          po.use_hints = !cfg.hints_dir.empty();
          if (cfg.keep_scripts)
            po.script_path = (fs::path(cfg.out_dir) / "smt" / "prove" / (safe_id(sps[i].id) + ".smt2")).string();
          verdicts[i] = prove(sps[i], po);
        } catch (...) {
          std::lock_guard lk(failure_mu);
          if (!failure) failure = std::current_exception();
        }
      }
    };
    std::vector<std::thread> pool;
    for (int k = 1; k < std::min<int>(cfg.jobs, static_cast<int>(sps.size())); ++k) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);

    sum.premises = check_premises(sps, verdicts, logs);
    for (auto& [scen, h] : logs) sum.hints[scen] = h;
    fs::path vdir = fs::path(cfg.out_dir) / "verdicts";
    fs::remove_all(vdir);
    for (auto& v : verdicts) {
      write_file((vdir / (safe_id(v.subproblem) + ".json")).string(), write_verdict_json(v, vdir.string()));
      if (v.cex) {
        fs::path cdir = fs::path(cfg.out_dir) / "cex";
        write_file((cdir / (safe_id(v.subproblem) + ".txt")).string(), render_counterexample(v));
        write_file((cdir / (safe_id(v.subproblem) + ".scenario.json")).string(),
                   write_scenario(v.cex->replay, cdir.string()));
      }
    }
    json pj;
    pj["checked"] = sum.premises.checked;
    pj["discharged"] = sum.premises.discharged;
    pj["issues"] = sum.premises.issues;
    write_file((fs::path(cfg.out_dir) / "premises.json").string(), pj.dump(2) + "\n");
    write_file((fs::path(cfg.out_dir) / "images.json").string(), json(sum.image_hashes).dump(2) + "\n");
    sum.verdicts = std::move(verdicts);
    return sum;
  });
}

std::string stage_report(const std::string& out_dir, const std::string& hints_dir) {
  return tagged("report", [&] {
    RunSummary sum;
    fs::path vdir = fs::path(out_dir) / "verdicts";
    for (auto& p : files_with_suffix(vdir.string(), ".json"))
      sum.verdicts.push_back(read_verdict_json(read_file(p), vdir.string(), p));
    for (auto& p : files_with_suffix(hints_dir, ".log.json")) {
      HintSet h = load_hintfile(p);
      sum.hints[h.scenario] = std::move(h);
    }
    fs::path pp = fs::path(out_dir) / "premises.json";
    if (fs::exists(pp)) {
      json pj = json::parse(read_file(pp.string()));
      sum.premises.checked = pj.value("checked", size_t{0});
      sum.premises.discharged = pj.value("discharged", size_t{0});
      sum.premises.issues = pj.value("issues", std::vector<std::string>());
    }
    fs::path ip = fs::path(out_dir) / "images.json";
    if (fs::exists(ip)) sum.image_hashes = json::parse(read_file(ip.string())).get<std::map<std::string, std::string>>();
    std::string text = render_report(sum);
    write_file((fs::path(out_dir) / "report.txt").string(), text);
    write_file((fs::path(out_dir) / "summary.json").string(), render_summary_json(sum));
    return text;
  });
}

int run_pipeline(const PipelineConfig& cfg, RunSummary* out) {
  tagged("config", [&] {
    validate_config(cfg);
    return 0;
  });
  fs::path root(cfg.out_dir);
  std::vector<StageTiming> timings;
  auto timed = [&](const std::string& stage, const std::string& scen, auto&& fn) {
    Stopwatch sw;
    auto r = fn();
    timings.push_back({stage, scen, sw.seconds(), peak_rss_kib()});
    return r;
  };

  std::vector<std::string> scen_files = scenario_files(cfg.scenarios_dir);
  std::vector<Scenario> scens;
  for (auto& p : scen_files) {
    Scenario sc = tagged("config", [&] { return load_scenario(p); });
    tagged("config", [&] { return spec_files_for(sc, cfg.specs_dir); });
    scens.push_back(std::move(sc));
  }
  fs::path fsm_dir = root / "fsm";
  fs::remove_all(fsm_dir);
  timed("extract-fsm", "", [&] { return stage_extract_fsm(cfg.design, fsm_dir.string()); });

  fs::path hints_dir = root / "hints";
  for (size_t i = 0; i < scens.size(); ++i) {
    const std::string& name = scens[i].name;
    uint32_t tau = cfg.tau ? cfg.tau : scens[i].tau;
    std::string vcd = (root / "traces" / (name + ".vcd")).string();
    std::string rank = (root / "rank" / (name + ".json")).string();
    std::string cand = (root / "candidates" / (name + ".json")).string();
    std::string hints = (hints_dir / (name + ".json")).string();
    timed("sim", name, [&] { return stage_sim(cfg.design, scen_files[i], vcd); });
    timed("rank", name, [&] { return stage_rank(vcd, tau, rank); });
    timed("gen-hints", name,
          [&] { return stage_gen_hints(cfg.design, scen_files[i], vcd, rank, fsm_dir.string(), tau, cand); });
    VerifyOptions vo;
    vo.depth_cap = cfg.verify_depth_cap;
    vo.solver = cfg.solver;
    vo.solver.budget_seconds = cfg.verify_budget;
    vo.jobs = cfg.jobs;
    if (cfg.keep_scripts) {
      fs::path sdir = root / "smt" / "verify" / name;
      fs::remove_all(sdir);
      vo.script_dir = sdir.string();
    }
    timed("verify-hints", name, [&] { return stage_verify_hints(cfg.design, scen_files[i], cand, hints, vo); });
  }

  ProveStageConfig pc;
  pc.design = cfg.design;
  pc.scenarios = scen_files;
  pc.hints_dir = cfg.use_hints ? hints_dir.string() : "";
  pc.specs_dir = cfg.specs_dir;
  pc.out_dir = cfg.out_dir;
  pc.solver = cfg.solver;
  pc.solver.budget_seconds = cfg.prove_budget;
  pc.jobs = cfg.jobs;
  pc.depth_divisor = cfg.depth_divisor;
  pc.verify_depth_cap = cfg.verify_depth_cap;
  pc.keep_scripts = cfg.keep_scripts;
  if (cfg.keep_scripts) fs::remove_all(root / "smt" / "prove");
  Stopwatch sw;
  RunSummary sum = stage_prove(pc);
  long rss = peak_rss_kib();
  for (auto& v : sum.verdicts) timings.push_back({"prove", v.scenarios.front(), v.seconds, rss});
  timings.push_back({"prove-total", "", sw.seconds(), rss});
  stage_report(cfg.out_dir, hints_dir.string());

  sum.timings = timings;
  write_file((root / "metadata" / "timing.txt").string(), render_timing(sum));
  if (out) *out = sum;
  return exit_code(sum.verdicts);
}

}  // namespace hive
