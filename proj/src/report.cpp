#include "hive/equiv.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <map>
#include <sstream>

namespace hive {

using json = nlohmann::json;

namespace {

std::string kind_counts(const std::map<HintKind, size_t>& c) {
  auto get = [&](HintKind k) {
    auto it = c.find(k);
    return it == c.end() ? size_t{0} : it->second;
  };
  return fmt::format("C{} W{} O{} A{}", get(HintKind::Concretize), get(HintKind::Weaken),
                     get(HintKind::Overapproximate), get(HintKind::Abstract));
}

}  // namespace

std::string render_report(const RunSummary& s) {
  std::ostringstream o;
  o << "Verification report\n\n";
  o << fmt::format("{:<28} {:<14} {:<8} {:>6} {:>10} {:>6}  {:<18} {}\n", "sub-problem", "scenarios", "outcome", "depth",
                   "terms", "assume", "hints applied", "note");
  for (auto& v : s.verdicts) {
    std::string note = v.reason;
    if (v.refined) note = note.empty() ? "refined" : "refined; " + note;
    if (v.cex) note = fmt::format("{} at cycle {}", v.cex->label, v.cex->cycle);
    std::string scen;
    for (size_t i = 0; i < v.scenarios.size(); ++i) scen += (i ? "+" : "") + v.scenarios[i];
    o << fmt::format("{:<28} {:<14} {:<8} {:>6} {:>10} {:>6}  {:<18} {}\n", v.subproblem, scen,
                     outcome_name(v.outcome), v.depth, v.peak_terms, v.assumptions, kind_counts(v.hints_applied), note);
  }
  o << "\nHints per scenario (verified / rejected)\n";
  for (auto& [scen, hs] : s.hints)
    o << fmt::format("  {:<12} verified {}   rejected {}\n", scen, kind_counts(hs.counts(HintStatus::Verified)),
                     kind_counts(hs.counts(HintStatus::Rejected)));
  o << fmt::format("\nPremises: {}/{} assumption uses discharged\n", s.premises.discharged, s.premises.checked);
  for (auto& i : s.premises.issues) o << "  " << i << "\n";
  size_t pass = 0, fail = 0, unk = 0;
  for (auto& v : s.verdicts) (v.outcome == Verdict::Pass ? pass : v.outcome == Verdict::Fail ? fail : unk)++;
  o << fmt::format("\nResult: {} pass, {} fail, {} unknown\n", pass, fail, unk);
  for (auto& v : s.verdicts)
    if (v.cex) o << "\n" << render_counterexample(v);
  return o.str();
}

std::string render_counterexample(const Verdict& v) {
  if (!v.cex) return "";
  const Counterexample& c = *v.cex;
  std::ostringstream o;
  o << fmt::format("Counterexample for {} ({})\n", v.subproblem, outcome_name(v.outcome));
  o << fmt::format("  violated: {} at cycle {}\n", c.label, c.cycle);
  if (!c.expected.empty()) o << "  expected: " << c.expected << "\n";
  for (auto& [name, val] : c.observed) o << fmt::format("  observed: {} = {}\n", name, val);
  for (auto& [name, vals] : c.inputs) {
    o << "  input " << name << ":";
    for (auto& x : vals) o << " " << x.to_literal();
    o << "\n";
  }
  return o.str();
}

std::string render_summary_json(const RunSummary& s) {
  json j;
  j["exit_code"] = exit_code(s.verdicts);
  json vs = json::array();
  for (auto& v : s.verdicts) {
    json e;
    e["subproblem"] = v.subproblem;
    e["scenarios"] = v.scenarios;
    e["module"] = v.module;
    e["instance"] = v.instance;
    e["outcome"] = outcome_name(v.outcome);
    e["depth"] = v.depth;
    e["peak_terms"] = v.peak_terms;
    e["assumptions"] = v.assumptions;
    e["refined"] = v.refined;
    e["premises_ok"] = v.premises_ok;
    json h;
    for (auto& [k, n] : v.hints_applied) h[hint_kind_name(k)] = n;
    e["hints_applied"] = h;
    if (!v.reason.empty()) e["reason"] = v.reason;
    if (v.cex) e["counterexample"] = {{"cycle", v.cex->cycle}, {"label", v.cex->label}, {"expected", v.cex->expected}};
    vs.push_back(std::move(e));
  }
  j["verdicts"] = std::move(vs);
  json hs;
  for (auto& [scen, h] : s.hints) {
    json k;
    for (auto& [kind, n] : h.counts(HintStatus::Verified)) k["verified"][hint_kind_name(kind)] = n;
    for (auto& [kind, n] : h.counts(HintStatus::Rejected)) k["rejected"][hint_kind_name(kind)] = n;
    k["tau"] = h.tau;
    k["depth"] = h.depth;
    hs[scen] = std::move(k);
  }
  j["hints"] = std::move(hs);
  j["premises"] = {{"checked", s.premises.checked}, {"discharged", s.premises.discharged}, {"issues", s.premises.issues}};
  j["images"] = s.image_hashes;
  return j.dump(2) + "\n";
}

std::string render_timing(const RunSummary& s) {
  // scenario -> (hint generation seconds, peak kiB), (equivalence seconds, peak kiB)
  std::map<std::string, std::pair<std::pair<double, long>, std::pair<double, long>>> rows;
  for (auto& t : s.timings) {
    if (t.scenario.empty()) continue;
    auto& r = rows[t.scenario];
    auto& cell = t.stage == "prove" ? r.second : r.first;
    cell.first += t.seconds;
    cell.second = std::max(cell.second, t.peak_rss_kib);
  }
  std::ostringstream o;
  o << fmt::format("{:<12} | {:^23} | {:^23}\n", "", "Hint Generation", "Equivalence Checking");
  o << fmt::format("{:<12} | {:>10} {:>12} | {:>10} {:>12}\n", "Scenario", "Time (s)", "Memory (MB)", "Time (s)",
                   "Memory (MB)");
  for (auto& [scen, r] : rows)
    o << fmt::format("{:<12} | {:>10.2f} {:>12.1f} | {:>10.2f} {:>12.1f}\n", scen, r.first.first,
                     r.first.second / 1024.0, r.second.first, r.second.second / 1024.0);
  o << "\nStages\n";
  for (auto& t : s.timings)
    o << fmt::format("  {:<14} {:<10} {:>9.2f} s {:>10.1f} MB\n", t.stage, t.scenario, t.seconds, t.peak_rss_kib / 1024.0);
  return o.str();
}

}  // namespace hive
