#include "fsm_internal.hpp"
#include "hive/error.hpp"
#include "hive/fsm.hpp"
#include "hive/util.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <filesystem>
#include <sstream>

namespace hive {

using json = nlohmann::json;

namespace {

// Input cube for a guard, or nullopt when the guard lives in the sidecar.
std::optional<std::string> cube_string(const ExprPtr& g, const std::vector<std::string>& inputs) {
  auto lits = cube_literals(g);
  if (!lits) return std::nullopt;
  // Only guards already in canonical form are cube-encoded; anything else
  // would not round-trip textually.
  if (to_string(canonical_cube(*lits, inputs)) != to_string(g)) return std::nullopt;
  std::string cube(inputs.size(), '-');
  for (auto& [r, pol] : *lits) {
    auto it = std::find(inputs.begin(), inputs.end(), r->name);
    cube[it - inputs.begin()] = pol ? '1' : '0';
  }
  return cube;
}

}  // namespace

std::string fsm_file_stem(const Fsm& m) { return m.state_register.empty() ? "fsm" : m.state_register; }

std::string write_kiss2(const Fsm& m) {
  if (m.transitions.empty()) throw Error(fmt::format("FSM '{}' has no transitions", m.state_register));
  auto inputs = cube_inputs(m);
  std::ostringstream out;
  out << ".i " << inputs.size() << "\n";
  out << ".o 0\n";
  if (!inputs.empty()) out << ".ilb " << join(inputs, " ") << "\n";
  out << ".p " << m.transitions.size() << "\n";
  out << ".s " << m.states.size() << "\n";
  out << ".r " << m.initial << "\n";
  for (auto& [n, v] : m.states) out << ".code " << n << " " << v.to_binary() << "\n";
  for (auto& t : m.transitions) {
    std::string cube = cube_string(t.guard, inputs).value_or(std::string(inputs.size(), '-'));
    out << (cube.empty() ? "-" : cube) << " " << t.from << " " << t.to << "\n";
  }
  out << ".e\n";
  return out.str();
}

std::string write_guard_table(const Fsm& m) {
  auto inputs = cube_inputs(m);
  json j;
  j["register"] = m.state_register;
  j["width"] = m.width;
  j["inputs"] = inputs;
  json guards = json::object();
  for (size_t i = 0; i < m.transitions.size(); ++i)
    if (!cube_string(m.transitions[i].guard, inputs)) guards[std::to_string(i)] = to_string(m.transitions[i].guard);
  j["guards"] = guards;
  return j.dump(2) + "\n";
}

Fsm parse_kiss2(const std::string& kiss2, const std::string& guard_table, const std::string& file) {
  Fsm m;
  std::istringstream in(kiss2);
  std::string line;
  int line_no = 0;
  std::optional<size_t> ni, np, ns;
  std::vector<std::string> ilb;
  struct Raw {
    std::string cube, from, to;
    int line;
  };
  std::vector<Raw> raw;
  bool have_codes = false;
  auto fail = [&](const std::string& msg) { throw ParseError(file, line_no, 0, msg); };
  auto num = [&](const std::string& s) -> size_t {
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) fail(fmt::format("expected a count, got '{}'", s));
    return std::stoul(s);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (auto c = line.find('#'); c != std::string::npos) line.resize(c);
    std::istringstream ls(line);
    std::vector<std::string> w;
    for (std::string t; ls >> t;) w.push_back(t);
    if (w.empty()) continue;
    if (w[0][0] == '.') {
      const std::string& d = w[0];
      if (d == ".e" || d == ".end") break;
      if (w.size() < 2 && d != ".ilb") fail(fmt::format("directive '{}' needs an argument", d));
      if (d == ".i") ni = num(w[1]);
      else if (d == ".o") {
        if (num(w[1]) != 0) fail("only .o 0 is supported (outputs are specified separately)");
      } else if (d == ".p") np = num(w[1]);
      else if (d == ".s") ns = num(w[1]);
      else if (d == ".r") m.initial = w[1];
      else if (d == ".ilb") ilb.assign(w.begin() + 1, w.end());
      else if (d == ".code") {
        if (w.size() != 3 || w[2].find_first_not_of("01") != std::string::npos) fail("malformed .code line");
        if (m.has_state(w[1])) fail(fmt::format("state '{}' declared twice", w[1]));
        BitVec enc = BitVec::from_binary(w[2]);
        if (have_codes && enc.width() != m.width) fail("inconsistent .code widths");
        m.width = enc.width();
        if (m.state_of(enc)) fail(fmt::format("duplicate encoding {}", w[2]));
        m.states.push_back({w[1], enc});
        have_codes = true;
      } else {
        fail(fmt::format("unknown directive '{}'", d));
      }
      continue;
    }
    if (!ni || !ns) fail("transition before .i/.s header");
    if (w.size() != 3 && w.size() != 4) fail("transition lines have the form: input from to [output]");
    raw.push_back({w[0], w[1], w[2], line_no});
  }
  if (!ni || !ns || !np) fail("missing .i/.s/.p header");
  if (!ilb.empty() && ilb.size() != *ni) fail(".ilb count does not match .i");
  if (ilb.empty())
    for (size_t i = 0; i < *ni; ++i) ilb.push_back(fmt::format("in{}", i));
  if (raw.empty()) fail("FSM has no transitions");
  if (raw.size() != *np) fail(fmt::format(".p {} but {} transition lines", *np, raw.size()));
  if (!have_codes) {
    for (auto& r : raw)
      for (auto* s : {&r.from, &r.to})
        if (!m.has_state(*s)) m.states.push_back({*s, BitVec(1)});
    m.width = bits_for(m.states.size());
    for (size_t i = 0; i < m.states.size(); ++i) m.states[i].second = BitVec(m.width, i);
  }
  if (m.states.size() != *ns) fail(fmt::format(".s {} but {} states", *ns, m.states.size()));
  if (m.initial.empty() || !m.has_state(m.initial)) fail(fmt::format("reset state '{}' is not declared", m.initial));

  json side = guard_table.empty() ? json::object() : json::parse(guard_table);
  if (side.contains("register")) m.state_register = side["register"];
  if (side.contains("width") && side["width"].get<uint32_t>() != m.width) fail("guard table width disagrees with .code");
  json guards = side.value("guards", json::object());
  for (size_t i = 0; i < raw.size(); ++i) {
    auto& r = raw[i];
    line_no = r.line;
    for (auto* s : {&r.from, &r.to})
      if (!m.has_state(*s)) fail(fmt::format("undeclared state '{}' in transition", *s));
    ExprPtr g;
    if (guards.contains(std::to_string(i))) {
      g = parse_expr(guards[std::to_string(i)].get<std::string>(), file + ".guards", static_cast<int>(i), 0);
    } else {
      std::string cube = r.cube == "-" && *ni == 0 ? "" : r.cube;
      if (cube.size() != *ni || cube.find_first_not_of("01-") != std::string::npos)
        fail(fmt::format("input field '{}' does not match .i {}", r.cube, *ni));
      std::vector<std::pair<ExprPtr, bool>> lits;
      for (size_t k = 0; k < cube.size(); ++k)
        if (cube[k] != '-') lits.push_back({make_ref(ilb[k], 1, -1), cube[k] == '1'});
      g = canonical_cube(lits, ilb);
    }
    m.transitions.push_back({r.from, g, r.to});
  }
  return m;
}

std::string save_fsm(const Fsm& m, const std::string& dir) {
  std::string stem = fsm_file_stem(m);
  write_file((std::filesystem::path(dir) / (stem + ".kiss2")).string(), write_kiss2(m));
  write_file((std::filesystem::path(dir) / (stem + ".guards.json")).string(), write_guard_table(m));
  return stem;
}

Fsm load_fsm(const std::string& kiss2_path) {
  std::string side;
  std::string gpath = kiss2_path.substr(0, kiss2_path.size() - (kiss2_path.size() >= 6 && kiss2_path.substr(kiss2_path.size() - 6) == ".kiss2" ? 6 : 0)) + ".guards.json";
  if (std::filesystem::exists(gpath)) side = read_file(gpath);
  return parse_kiss2(read_file(kiss2_path), side, kiss2_path);
}

}  // namespace hive
