#include "hive/trace.hpp"

#include "hive/error.hpp"
#include "hive/util.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace hive {

std::optional<LogicValue> SignalHistory::value_at(uint64_t t) const {
  auto it = std::upper_bound(changes.begin(), changes.end(), t, [](uint64_t x, const Change& c) { return x < c.time; });
  if (it == changes.begin()) return std::nullopt;
  return std::prev(it)->value;
}

void SignalHistory::record(uint64_t t, const LogicValue& v) {
  if (!changes.empty() && changes.back().time == t) {
    changes.back().value = v;
    if (changes.size() >= 2 && changes[changes.size() - 2].value == v) changes.pop_back();
    return;
  }
  if (!changes.empty() && changes.back().value == v) return;
  changes.push_back({t, v});
}

std::string vcd_id_code(size_t index) {
  // Printable ASCII '!'..'~', little-endian digits.
  std::string s;
  do {
    s.push_back(static_cast<char>('!' + index % 94));
    index /= 94;
  } while (index);
  return s;
}

size_t Trace::add_var(const std::string& name, uint32_t width, const std::string& type) {
  size_t i = vars.size();
  vars.push_back({name, vcd_id_code(i), width, type});
  SignalHistory h;
  h.signal = name;
  h.width = width;
  histories.push_back(std::move(h));
  index_[name] = i;
  return i;
}

std::optional<size_t> Trace::find(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const SignalHistory& Trace::history(const std::string& name) const {
  auto i = find(name);
  if (!i) throw Error(fmt::format("signal '{}' not in trace", name));
  return histories[*i];
}

void Trace::reindex() {
  index_.clear();
  for (size_t i = 0; i < vars.size(); ++i) index_[vars[i].name] = i;
}

bool Trace::equivalent(const Trace& o) const {
  if (vars.size() != o.vars.size() || end_time != o.end_time) return false;
  for (size_t i = 0; i < vars.size(); ++i) {
    if (vars[i].name != o.vars[i].name || vars[i].width != o.vars[i].width) return false;
    if (!(histories[i] == o.histories[i])) return false;
  }
  return true;
}

namespace {

class VcdReader {
 public:
  VcdReader(std::istream& in, std::string file) : in_(in), file_(std::move(file)) {}

  Trace read() {
    Trace t;
    std::vector<std::string> scope;
    std::map<std::string, std::vector<size_t>> by_id;
    std::string tok;
    bool defs_done = false;
    // Header.
    while (next(tok)) {
      if (tok == "$enddefinitions") {
        skip_to_end();
        defs_done = true;
        break;
      }
      if (tok == "$timescale") {
        std::string ts;
        for (auto& w : words_to_end()) ts += w;
        if (ts.empty()) fail("empty $timescale");
        t.timescale = ts;
      } else if (tok == "$scope") {
        auto w = words_to_end();
        if (w.size() != 2) fail("malformed $scope");
        scope.push_back(w[1]);
      } else if (tok == "$upscope") {
        skip_to_end();
        if (scope.empty()) fail("$upscope without matching $scope");
        scope.pop_back();
      } else if (tok == "$var") {
        auto w = words_to_end();
        if (w.size() < 4) fail("malformed $var");
        uint64_t width = 0;
        try {
          width = std::stoull(w[1]);
        } catch (...) {
          fail(fmt::format("bad $var width '{}'", w[1]));
        }
        if (width == 0 || width > (1u << 20)) fail("bad $var width");
        std::string name = w[3];
        // Ignore a trailing bit-range like "[7:0]".
        std::vector<std::string> parts = scope;
        parts.push_back(name);
        std::string full = join(parts, ".");
        size_t idx = t.vars.size();
        t.vars.push_back({full, w[2], static_cast<uint32_t>(width), w[0]});
        SignalHistory h;
        h.signal = full;
        h.width = static_cast<uint32_t>(width);
        t.histories.push_back(h);
        by_id[w[2]].push_back(idx);
      } else if (tok == "$date" || tok == "$version" || tok == "$comment") {
        skip_to_end();
      } else {
        fail(fmt::format("unexpected token '{}' in VCD header", tok));
      }
    }
    if (!defs_done) fail("missing $enddefinitions");
    if (!scope.empty()) fail("unterminated $scope");

    std::optional<uint64_t> first_time;
    uint64_t now = 0;
    bool any_time = false;
    auto set_value = [&](const std::string& id, LogicValue v) {
      auto it = by_id.find(id);
      if (it == by_id.end()) fail(fmt::format("undeclared id code '{}'", id));
      if (!first_time) first_time = now;
      for (size_t idx : it->second) {
        auto& h = t.histories[idx];
        if (v.width() != h.width) v = extend(v, h.width);
        if (h.changes.empty() && now == *first_time) h.has_initial = true;
        h.record(now, v);
      }
    };
    while (next(tok)) {
      char c = tok[0];
      if (c == '#') {
        uint64_t tm;
        try {
          size_t used = 0;
          tm = std::stoull(tok.substr(1), &used);
          if (used != tok.size() - 1) throw 0;
        } catch (...) {
          fail(fmt::format("bad timestamp '{}'", tok));
        }
        if (any_time && tm < now) fail(fmt::format("non-monotonic timestamp #{} after #{}", tm, now));
        now = tm;
        any_time = true;
        if (!first_time) first_time = now;
        t.end_time = std::max(t.end_time, now);
      } else if (c == '$') {
        // $dumpvars/$dumpall/$end bracket value blocks; other commands are skipped.
        if (tok == "$comment") skip_to_end();
      } else if (c == '0' || c == '1' || c == 'x' || c == 'X' || c == 'z' || c == 'Z') {
        if (tok.size() < 2) fail(fmt::format("malformed scalar change '{}'", tok));
        set_value(tok.substr(1), LogicValue::from_string(tok.substr(0, 1)));
      } else if (c == 'b' || c == 'B') {
        std::string id;
        if (!next(id)) fail("vector change missing id code");
        std::string bits = tok.substr(1);
        if (bits.empty() || bits.find_first_not_of("01xXzZ") != std::string::npos)
          fail(fmt::format("malformed vector value '{}'", tok));
        set_value(id, LogicValue::from_string(bits));
      } else if (c == 'r' || c == 'R') {
        fail("real-valued changes are not supported");
      } else {
        fail(fmt::format("unexpected token '{}' in VCD body", tok));
      }
    }
    t.reindex();
    return t;
  }

 private:
  static LogicValue extend(const LogicValue& v, uint32_t width) {
    if (v.width() > width) {
      // Only leading zeros may be dropped.
      std::string s = v.to_string();
      size_t extra = s.size() - width;
      if (s.find_first_not_of('0') < extra) throw Error("vector value wider than its $var");
      return LogicValue::from_string(s.substr(extra));
    }
    std::string s = v.to_string();
    char pad = (s[0] == 'x' || s[0] == 'z') ? s[0] : '0';
    return LogicValue::from_string(std::string(width - s.size(), pad) + s);
  }

  bool next(std::string& tok) {
    if (!(in_ >> tok)) return false;
    return true;
  }
  void skip_to_end() {
    std::string tok;
    while (next(tok))
      if (tok == "$end") return;
    fail("missing $end");
  }
  std::vector<std::string> words_to_end() {
    std::vector<std::string> w;
    std::string tok;
    while (next(tok)) {
      if (tok == "$end") return w;
      w.push_back(tok);
    }
    fail("missing $end");
  }
  [[noreturn]] void fail(const std::string& msg) { throw ParseError(file_, 0, 0, msg); }

  std::istream& in_;
  std::string file_;
};

struct ScopeNode {
  std::string name;
  std::vector<size_t> vars;
  std::vector<std::unique_ptr<ScopeNode>> children;
  std::vector<std::pair<bool, size_t>> order;  // (is_child, index) in first-appearance order
};

void emit_scope(const Trace& t, const ScopeNode& n, std::ostream& out, const std::vector<std::string>& leaf) {
  for (auto [is_child, i] : n.order) {
    if (is_child) {
      const auto& c = *n.children[i];
      out << "$scope module " << c.name << " $end\n";
      emit_scope(t, c, out, leaf);
      out << "$upscope $end\n";
    } else {
      const auto& v = t.vars[i];
      out << "$var " << v.type << " " << v.width << " " << v.id << " " << leaf[i] << " $end\n";
    }
  }
}

void emit_value(const TraceVar& v, const LogicValue& val, std::ostream& out) {
  if (v.width == 1)
    out << val.bit_char(0) << v.id << '\n';
  else
    out << 'b' << val.to_string() << ' ' << v.id << '\n';
}

}  // namespace

Trace parse_vcd(std::istream& in, const std::string& file) {
  VcdReader r(in, file);
  return r.read();
}

Trace parse_vcd(const std::string& text, const std::string& file) {
  std::istringstream in(text);
  return parse_vcd(in, file);
}

Trace parse_vcd_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(fmt::format("cannot open '{}'", path));
  return parse_vcd(in, path);
}

void write_vcd(const Trace& t, std::ostream& out) {
  out << "$version hive $end\n";
  out << "$timescale " << t.timescale << " $end\n";
  ScopeNode root;
  std::vector<std::string> leaf(t.vars.size());
  for (size_t i = 0; i < t.vars.size(); ++i) {
    auto parts = split(t.vars[i].name, '.');
    leaf[i] = parts.back();
    ScopeNode* n = &root;
    for (size_t k = 0; k + 1 < parts.size(); ++k) {
      ScopeNode* found = nullptr;
      for (size_t c = 0; c < n->children.size(); ++c)
        if (n->children[c]->name == parts[k]) found = n->children[c].get();
      if (!found) {
        n->children.push_back(std::make_unique<ScopeNode>());
        n->children.back()->name = parts[k];
        n->order.push_back({true, n->children.size() - 1});
        found = n->children.back().get();
      }
      n = found;
    }
    n->order.push_back({false, i});
  }
  emit_scope(t, root, out, leaf);
  out << "$enddefinitions $end\n";

  // Merge all changes by time, declaration order within a time.
  std::map<uint64_t, std::vector<std::pair<size_t, const LogicValue*>>> blocks;
  bool initial_block = false;
  for (size_t i = 0; i < t.histories.size(); ++i) {
    const auto& h = t.histories[i];
    for (size_t k = 0; k < h.changes.size(); ++k) {
      blocks[h.changes[k].time].push_back({i, &h.changes[k].value});
      if (k == 0 && h.has_initial) initial_block = true;
    }
  }
  uint64_t last = 0;
  bool first = true;
  for (auto& [time, vals] : blocks) {
    out << '#' << time << '\n';
    bool dump = first && initial_block;
    if (dump) out << "$dumpvars\n";
    for (auto [i, v] : vals) emit_value(t.vars[i], *v, out);
    if (dump) out << "$end\n";
    first = false;
    last = time;
  }
  if (t.end_time > last || (blocks.empty() && t.end_time > 0)) out << '#' << t.end_time << '\n';
}

std::string write_vcd(const Trace& t) {
  std::ostringstream out;
  write_vcd(t, out);
  return out.str();
}

ChangeCount change_count(const SignalHistory& h) {
  ChangeCount c;
  if (h.changes.empty()) {
    c.has_unknown = true;  // declared but never dumped
    return c;
  }
  c.count = h.changes.size() - (h.has_initial ? 1 : 0);
  for (auto& ch : h.changes) {
    c.has_unknown |= ch.value.has_x();
    c.has_highz |= ch.value.has_z();
  }
  return c;
}

ChangeCount change_count(const Trace& t, const std::string& name) { return change_count(t.history(name)); }

}  // namespace hive
