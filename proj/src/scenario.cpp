#include "hive/error.hpp"
#include "hive/sim.hpp"
#include "hive/util.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <filesystem>

namespace hive {

using json = nlohmann::json;

LogicValue parse_logic_literal(const std::string& text, uint32_t width) {
  std::string t = trim(text);
  if (t == "x" || t == "X") return LogicValue::all_x(width);
  if (t == "z" || t == "Z") return LogicValue::all_z(width);
  auto q = t.find('\'');
  if (q != std::string::npos && q + 1 < t.size() && (t[q + 1] == 'b' || t[q + 1] == 'B') &&
      t.find_first_of("xXzZ", q + 2) != std::string::npos) {
    uint32_t w = static_cast<uint32_t>(std::stoul(t.substr(0, q)));
    if (w != width) throw WidthMismatch(fmt::format("literal '{}' has width {}, expected {}", t, w, width));
    std::string digits;
    for (char c : t.substr(q + 2))
      if (c != '_') digits.push_back(c);
    if (digits.size() > width) throw WidthMismatch(fmt::format("literal '{}' has too many digits", t));
    return LogicValue::from_string(std::string(width - digits.size(), '0') + digits);
  }
  ExprPtr e = parse_expr(t);
  if (e->op != Op::Const) throw Error(fmt::format("expected a constant, got '{}'", t));
  Resolver none;
  none.signal = [](const std::string&) { return std::nullopt; };
  return LogicValue(resolve(e, none, width)->value);
}

namespace {

std::string resolve_rel(const std::string& base, const std::string& p) {
  std::filesystem::path fp(p);
  if (fp.is_absolute()) return fp.lexically_normal().string();
  return (std::filesystem::path(base) / fp).lexically_normal().string();
}

uint64_t get_u64(const json& j, const char* key, const std::string& file) {
  if (!j.contains(key)) throw Error(fmt::format("{}: missing field '{}'", file, key));
  if (!j[key].is_number_unsigned() && !(j[key].is_number_integer() && j[key].get<int64_t>() >= 0))
    throw Error(fmt::format("{}: field '{}' must be a non-negative integer", file, key));
  return j[key].get<uint64_t>();
}

// Widths are not known until a design is attached; store literal text as
// a LogicValue of its own width (bare decimals become 64-bit and are
// resized in stimulus_schedule).
LogicValue raw_literal(const std::string& text) {
  std::string t = trim(text);
  auto q = t.find('\'');
  if (q != std::string::npos) return parse_logic_literal(t, static_cast<uint32_t>(std::stoul(t.substr(0, q))));
  if (t == "x" || t == "X" || t == "z" || t == "Z") return LogicValue::from_string(t);
  return parse_logic_literal(t, 64);
}

LogicValue fit(const LogicValue& v, uint32_t width, const std::string& what) {
  if (v.width() == width) return v;
  if (v.width() == 1 && !v.is_known()) return v.has_z() ? LogicValue::all_z(width) : LogicValue::all_x(width);
  if (v.is_known() && v.width() == 64) {
    if (width < 64 && (v.known().to_u64() >> width) != 0)
      throw WidthMismatch(fmt::format("{}: value {} does not fit in {} bits", what, v.known().to_u64(), width));
    return LogicValue(v.known().resize(width));
  }
  throw WidthMismatch(fmt::format("{}: value has width {}, expected {}", what, v.width(), width));
}

}  // namespace

Scenario parse_scenario(const std::string& json_text, const std::string& base_dir, const std::string& file) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(fmt::format("{}: {}", file, e.what()));
  }
  Scenario sc;
  sc.path = file;
  if (!j.contains("name") || !j["name"].is_string()) throw Error(fmt::format("{}: missing string field 'name'", file));
  sc.name = j["name"];
  sc.run_cycles = get_u64(j, "run_cycles", file);
  if (j.contains("tau")) sc.tau = static_cast<uint32_t>(get_u64(j, "tau", file));
  if (sc.tau < 1) throw Error(fmt::format("{}: tau must be >= 1", file));
  if (j.contains("firmware"))
    for (auto& [mem, path] : j["firmware"].items()) sc.firmware[mem] = resolve_rel(base_dir, path.get<std::string>());
  if (j.contains("spec")) {
    if (j["spec"].is_string())
      sc.specs.push_back(resolve_rel(base_dir, j["spec"]));
    else
      for (auto& s : j["spec"]) sc.specs.push_back(resolve_rel(base_dir, s.get<std::string>()));
  }
  if (j.contains("stimulus"))
    for (auto& ev : j["stimulus"]) {
      StimulusEvent e{get_u64(ev, "cycle", file), ev.at("signal").get<std::string>(),
                      raw_literal(ev.at("value").get<std::string>())};
      if (e.cycle >= sc.run_cycles && sc.run_cycles > 0)
        throw Error(fmt::format("{}: stimulus at cycle {} is not below run_cycles {}", file, e.cycle, sc.run_cycles));
      sc.stimulus.push_back(e);
    }
  std::stable_sort(sc.stimulus.begin(), sc.stimulus.end(),
                   [](const StimulusEvent& a, const StimulusEvent& b) { return a.cycle < b.cycle; });
  if (j.contains("expect"))
    for (auto& c : j["expect"])
      sc.checks.push_back({get_u64(c, "cycle", file), c.at("signal").get<std::string>(),
                           raw_literal(c.at("value").get<std::string>())});
  if (j.contains("proof_depth")) sc.proof_depth = get_u64(j, "proof_depth", file);
  if (j.contains("verify_depth")) sc.verify_depth = get_u64(j, "verify_depth", file);
  return sc;
}

Scenario load_scenario(const std::string& path) {
  auto base = std::filesystem::path(path).parent_path().string();
  return parse_scenario(read_file(path), base.empty() ? "." : base, path);
}

std::string write_scenario(const Scenario& sc, const std::string& base_dir) {
  json j;
  j["name"] = sc.name;
  j["run_cycles"] = sc.run_cycles;
  j["tau"] = sc.tau;
  auto rel = [&](const std::string& p) { return std::filesystem::path(p).lexically_relative(base_dir).string(); };
  json fw = json::object();
  for (auto& [m, p] : sc.firmware) fw[m] = rel(p);
  j["firmware"] = fw;
  json specs = json::array();
  for (auto& s : sc.specs) specs.push_back(rel(s));
  j["spec"] = specs;
  json stim = json::array();
  for (auto& e : sc.stimulus) stim.push_back({{"cycle", e.cycle}, {"signal", e.signal}, {"value", fmt::format("{}'b{}", e.value.width(), e.value.to_string())}});
  j["stimulus"] = stim;
  json ex = json::array();
  for (auto& c : sc.checks) ex.push_back({{"cycle", c.cycle}, {"signal", c.signal}, {"value", fmt::format("{}'b{}", c.value.width(), c.value.to_string())}});
  j["expect"] = ex;
  if (sc.proof_depth) j["proof_depth"] = *sc.proof_depth;
  if (sc.verify_depth) j["verify_depth"] = *sc.verify_depth;
  return j.dump(2) + "\n";
}

FlatDesign with_scenario_images(const FlatDesign& f, const Scenario& sc) {
  FlatDesign out = f;
  for (auto& [mem, path] : sc.firmware) load_memory_image(out, mem, path);
  return out;
}

std::vector<std::map<int, LogicValue>> stimulus_schedule(const FlatDesign& f, const Scenario& sc, uint64_t cycles) {
  std::vector<std::map<int, LogicValue>> out(cycles);
  std::map<int, LogicValue> held;
  size_t next = 0;
  for (auto& e : sc.stimulus) {
    auto id = f.find(e.signal);
    if (!id) throw UndeclaredSignal(e.signal, " (stimulus)");
    if (f.signals[*id].kind != SigKind::Input) throw Error(fmt::format("stimulus signal '{}' is not a primary input", e.signal));
  }
  for (uint64_t k = 0; k < cycles; ++k) {
    while (next < sc.stimulus.size() && sc.stimulus[next].cycle <= k) {
      auto& e = sc.stimulus[next++];
      int id = f.id(e.signal);
      held[id] = fit(e.value, f.signals[id].width, e.signal);
    }
    out[k] = held;
  }
  return out;
}

}  // namespace hive
