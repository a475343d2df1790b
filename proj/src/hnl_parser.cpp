#include "hive/error.hpp"
#include "hive/netlist.hpp"
#include "hive/util.hpp"

#include <fmt/format.h>

#include <cctype>
#include <cstring>
#include <filesystem>
#include <functional>
#include <set>

namespace hive {

const Port* ModuleDef::find_port(const std::string& n) const {
  for (auto& p : ports)
    if (p.name == n) return &p;
  return nullptr;
}

const SignalDecl* ModuleDef::find_signal(const std::string& n) const {
  for (auto& s : signals)
    if (s.name == n) return &s;
  return nullptr;
}

const MemDecl* ModuleDef::find_memory(const std::string& n) const {
  for (auto& m : memories)
    if (m.name == n) return &m;
  return nullptr;
}

std::optional<uint32_t> ModuleDef::width_of(const std::string& n) const {
  if (auto p = find_port(n)) return p->width;
  if (auto s = find_signal(n)) return s->width;
  return std::nullopt;
}

namespace {

struct Stmt {
  std::string text;  // comment-stripped, newlines preserved
  int line;
  int col;  // column of first non-space character
};

// Joins physical lines into statements: a statement continues while '(' or
// '{' are unbalanced.
std::vector<Stmt> split_statements(const std::string& src, const std::string& file) {
  std::vector<Stmt> out;
  std::string cur;
  int depth = 0, start_line = 0, start_col = 0, line_no = 0, open_line = 0;
  size_t pos = 0;
  while (pos <= src.size()) {
    size_t nl = src.find('\n', pos);
    std::string line = src.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos);
    ++line_no;
    bool in_str = false;
    for (char& c : line) {
      if (c == '"') in_str = !in_str;
      if (!in_str && c == ';') {
        size_t i = &c - line.data();
        line.resize(i);
        break;
      }
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    size_t first = line.find_first_not_of(" \t");
    if (first != std::string::npos) {
      if (cur.empty() && depth == 0) {
        start_line = line_no;
        start_col = static_cast<int>(first) + 1;
        cur = line.substr(first);
        open_line = line_no;
      } else {
        cur += '\n';
        cur += line;
      }
      for (char c : line) {
        if (c == '(' || c == '{') ++depth;
        if (c == ')' || c == '}') --depth;
      }
      if (depth < 0) throw ParseError(file, line_no, 0, "unbalanced closing bracket");
      if (depth == 0) {
        out.push_back({cur, start_line, start_col});
        cur.clear();
      }
    }
    if (nl == std::string::npos) break;
    pos = nl + 1;
  }
  if (depth != 0) throw ParseError(file, open_line, 0, "unterminated statement (unbalanced '(' or '{')");
  return out;
}

bool valid_local_name(const std::string& s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  for (char c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
  return true;
}

class HnlParser {
 public:
  HnlParser(std::string file, std::string base) : file_(std::move(file)), base_(std::move(base)) {}

  Netlist parse(const std::string& text) {
    Netlist n;
    ModuleDef* cur = nullptr;
    for (const Stmt& st : split_statements(text, file_)) {
      st_ = &st;
      pos_ = 0;
      std::string kw = word();
      if (kw == "module") {
        if (cur) fail("nested 'module' (missing 'endmodule')");
        std::string name = ident();
        if (n.modules.count(name)) fail(fmt::format("duplicate module '{}'", name));
        expect_end();
        cur = &n.modules[name];
        cur->name = name;
        cur->line = st.line;
        n.module_order.push_back(name);
        continue;
      }
      if (!cur) fail(fmt::format("'{}' outside of a module", kw));
      if (kw == "endmodule") {
        expect_end();
        finish_module(*cur);
        cur = nullptr;
      } else if (kw == "input" || kw == "output") {
        auto [name, w] = name_width();
        declare(*cur, name);
        cur->ports.push_back({name, kw == "input" ? Dir::In : Dir::Out, w, st.line});
        expect_end();
      } else if (kw == "wire") {
        auto [name, w] = name_width();
        declare(*cur, name);
        cur->signals.push_back({SignalDecl::Wire, name, w, BitVec(w), st.line});
        expect_end();
      } else if (kw == "reg") {
        auto [name, w] = name_width();
        declare(*cur, name);
        BitVec reset(w);
        skip_ws();
        if (!at_end()) {
          auto kv = key_value();
          if (kv.first != "reset") fail(fmt::format("unknown reg attribute '{}'", kv.first));
          reset = constant_of_width(kv.second, w);
        }
        cur->signals.push_back({SignalDecl::Reg, name, w, reset, st.line});
        expect_end();
      } else if (kw == "mem") {
        std::string name = ident();
        declare(*cur, name);
        MemDecl m{name, 0, 0, "", st.line};
        while (skip_ws(), !at_end()) {
          auto kv = key_value();
          if (kv.first == "width") m.width = positive(kv.second);
          else if (kv.first == "depth") m.depth = positive(kv.second);
          else if (kv.first == "image") m.image = kv.second.empty() ? "" : resolve_path(kv.second);
          else fail(fmt::format("unknown mem attribute '{}'", kv.first));
        }
        if (!m.width || !m.depth) fail("mem requires width= and depth=");
        if (m.depth < 2 || (m.depth & (m.depth - 1))) fail("mem depth must be a power of two >= 2");
        cur->memories.push_back(m);
      } else if (kw == "assign" || kw == "next") {
        std::string name = ident();
        skip_ws();
        if (!consume('=')) fail("expected '='");
        ExprPtr e = rest_expr();
        auto& list = kw == "assign" ? cur->assigns : cur->nexts;
        for (auto& [n2, _] : list)
          if (n2 == name) fail(fmt::format("duplicate '{}' for '{}'", kw, name));
        list.emplace_back(name, e);
        pending_lines_[cur->name + "/" + kw + "/" + name] = st.line;
      } else if (kw == "write") {
        std::string mem = ident();
        auto [l, c] = here();
        auto es = parse_expr_seq(st_->text.substr(pos_), file_, l, c);
        if (es.size() != 3) fail("write takes MEM EN ADDR DATA");
        cur->writes.push_back({mem, es[0], es[1], es[2], st.line});
      } else if (kw == "inst") {
        Instance inst;
        inst.line = st.line;
        inst.name = ident();
        declare(*cur, inst.name);
        if (word() != "of") fail("expected 'of'");
        inst.module = ident();
        skip_ws();
        if (!consume('(')) fail("expected '(' after module name");
        while (true) {
          skip_ws();
          if (consume(')')) break;
          std::string port = ident();
          skip_ws();
          if (!consume('=')) fail("expected '=' in port binding");
          skip_ws();
          auto [l, c] = here();
          size_t start = pos_;
          while (pos_ < st_->text.size() && st_->text[pos_] != ',' && st_->text[pos_] != ')') ++pos_;
          std::string actual = trim(st_->text.substr(start, pos_ - start));
          if (actual.empty()) fail(fmt::format("empty binding for port '{}'", port));
          ExprPtr a = parse_expr(actual, file_, l, c);
          if (a->op != Op::Ref && a->op != Op::Const) fail("port bindings must be a signal or a constant");
          for (auto& b : inst.bindings)
            if (b.port == port) fail(fmt::format("port '{}' bound twice", port));
          inst.bindings.push_back({port, a});
          skip_ws();
          consume(',');
        }
        expect_end();
        cur->instances.push_back(inst);
      } else if (kw == "fsm") {
        FsmAnnotation a;
        a.line = st.line;
        a.reg = ident();
        skip_ws();
        if (!consume('{')) fail("expected '{'");
        std::vector<std::pair<std::string, std::string>> raw;
        while (true) {
          skip_ws();
          if (consume('}')) break;
          std::string sname = ident();
          skip_ws();
          if (!consume('=')) fail("expected '=' in fsm state");
          skip_ws();
          std::string v = token_until(",}");
          raw.emplace_back(sname, v);
          skip_ws();
          consume(',');
        }
        expect_end();
        fsm_raw_[cur->name].push_back({a, raw});
      } else {
        fail(fmt::format("unknown statement '{}'", kw));
      }
    }
    if (cur) throw ParseError(file_, cur->line, 0, fmt::format("module '{}' missing 'endmodule'", cur->name));
    validate(n);
    return n;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) {
    auto [l, c] = here();
    throw ParseError(file_, l, c, msg);
  }

  std::pair<int, int> here() const {
    int l = st_->line, c = st_->col;
    for (size_t i = 0; i < pos_ && i < st_->text.size(); ++i) {
      if (st_->text[i] == '\n') {
        ++l;
        c = 1;
      } else {
        ++c;
      }
    }
    return {l, c};
  }

  bool at_end() const { return pos_ >= st_->text.size(); }
  void skip_ws() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(st_->text[pos_]))) ++pos_;
  }
  bool consume(char c) {
    if (!at_end() && st_->text[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect_end() {
    skip_ws();
    if (!at_end()) fail(fmt::format("unexpected text '{}'", st_->text.substr(pos_, 20)));
  }
  std::string word() {
    skip_ws();
    size_t s = pos_;
    while (!at_end() && (std::isalnum(static_cast<unsigned char>(st_->text[pos_])) || st_->text[pos_] == '_')) ++pos_;
    if (s == pos_) fail("expected identifier");
    return st_->text.substr(s, pos_ - s);
  }
  std::string ident() {
    skip_ws();
    std::string w = word();
    if (!valid_local_name(w)) fail(fmt::format("invalid identifier '{}'", w));
    return w;
  }
  std::string token_until(const char* stops) {
    size_t s = pos_;
    while (!at_end() && !std::strchr(stops, st_->text[pos_]) && !std::isspace(static_cast<unsigned char>(st_->text[pos_])))
      ++pos_;
    return st_->text.substr(s, pos_ - s);
  }
  std::pair<std::string, uint32_t> name_width() {
    std::string name = ident();
    uint32_t w = 1;
    if (consume(':')) w = positive(token_until(" \t"));
    return {name, w};
  }
  std::pair<std::string, std::string> key_value() {
    std::string k = word();
    if (!consume('=')) fail(fmt::format("expected '=' after '{}'", k));
    if (consume('"')) {
      size_t s = pos_;
      while (!at_end() && st_->text[pos_] != '"') ++pos_;
      if (at_end()) fail("unterminated string");
      std::string v = st_->text.substr(s, pos_ - s);
      ++pos_;
      return {k, v};
    }
    return {k, token_until(" \t")};
  }
  uint32_t positive(const std::string& s) {
    if (s.empty() || s.size() > 9 || !std::all_of(s.begin(), s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
      fail(fmt::format("expected positive integer, got '{}'", s));
    uint32_t v = static_cast<uint32_t>(std::stoul(s));
    if (v == 0) fail("width/depth must be >= 1");
    return v;
  }
  BitVec constant_of_width(const std::string& s, uint32_t w) {
    try {
      ExprPtr e = parse_expr(s, file_, st_->line, st_->col);
      if (e->op != Op::Const) fail(fmt::format("expected constant, got '{}'", s));
      Resolver r;
      r.signal = [](const std::string&) { return std::nullopt; };
      return resolve(e, r, w)->value;
    } catch (const WidthMismatch& err) {
      fail(err.what());
    }
  }
  ExprPtr rest_expr() {
    skip_ws();
    auto [l, c] = here();
    return parse_expr(st_->text.substr(pos_), file_, l, c);
  }
  std::string resolve_path(const std::string& p) {
    std::filesystem::path fp(p);
    if (fp.is_absolute()) return fp.lexically_normal().string();
    return (std::filesystem::path(base_) / fp).lexically_normal().string();
  }
  void declare(ModuleDef& m, const std::string& name) {
    auto& seen = names_[m.name];
    if (!seen.insert(name).second) fail(fmt::format("duplicate name '{}' in module '{}'", name, m.name));
  }

  [[noreturn]] void fail_at(int line, const std::string& msg) { throw ParseError(file_, line, 0, msg); }

  Resolver local_resolver(const ModuleDef& m) {
    Resolver r;
    r.signal = [&m](const std::string& n) -> std::optional<RefInfo> {
      if (auto w = m.width_of(n)) return RefInfo{*w, -1, n};
      return std::nullopt;
    };
    r.memory = [&m](const std::string& n) -> std::optional<MemInfo> {
      if (auto mem = m.find_memory(n)) return MemInfo{mem->width, log2_exact(mem->depth), -1, n};
      return std::nullopt;
    };
    return r;
  }

  void finish_module(ModuleDef& m) {
    Resolver r = local_resolver(m);
    auto line_of = [&](const std::string& kind, const std::string& name) {
      return pending_lines_[m.name + "/" + kind + "/" + name];
    };
    for (auto& [name, e] : m.assigns) {
      int line = line_of("assign", name);
      auto w = m.width_of(name);
      if (!w) fail_at(line, fmt::format("undeclared signal '{}' in assign", name));
      if (auto s = m.find_signal(name); s && s->kind == SignalDecl::Reg)
        fail_at(line, fmt::format("'{}' is a reg; use 'next'", name));
      if (auto p = m.find_port(name); p && p->dir == Dir::In) fail_at(line, fmt::format("cannot assign input '{}'", name));
      e = resolve(e, r, *w);
    }
    for (auto& [name, e] : m.nexts) {
      int line = line_of("next", name);
      auto s = m.find_signal(name);
      if (!s || s->kind != SignalDecl::Reg) fail_at(line, fmt::format("'next' target '{}' is not a declared reg", name));
      e = resolve(e, r, s->width);
    }
    std::set<std::string> written;
    for (auto& w : m.writes) {
      auto mem = m.find_memory(w.mem);
      if (!mem) throw UndeclaredSignal(w.mem, fmt::format(" at {}:{} (memory)", file_, w.line));
      if (!written.insert(w.mem).second) fail_at(w.line, fmt::format("memory '{}' has more than one write port", w.mem));
      w.en = resolve(w.en, r, 1);
      w.addr = resolve(w.addr, r, log2_exact(mem->depth));
      w.data = resolve(w.data, r, mem->width);
    }
    for (auto& inst : m.instances)
      for (auto& b : inst.bindings)
        if (b.actual->op == Op::Ref && !m.width_of(b.actual->name))
          throw UndeclaredSignal(b.actual->name, fmt::format(" at {}:{} (port binding)", file_, inst.line));
    for (auto& [a, raw] : fsm_raw_[m.name]) {
      auto s = m.find_signal(a.reg);
      if (!s || s->kind != SignalDecl::Reg) fail_at(a.line, fmt::format("fsm annotation names '{}', which is not a reg", a.reg));
      std::set<std::string> names;
      for (auto& [sname, text] : raw) {
        if (!names.insert(sname).second) fail_at(a.line, fmt::format("duplicate fsm state '{}'", sname));
        ExprPtr e = parse_expr(text, file_, a.line, 0);
        if (e->op != Op::Const) fail_at(a.line, fmt::format("fsm state '{}' needs a constant encoding", sname));
        Resolver none;
        none.signal = [](const std::string&) { return std::nullopt; };
        a.states.emplace_back(sname, resolve(e, none, s->width)->value);
      }
      m.fsms.push_back(a);
    }
  }

  void validate(Netlist& n) {
    // Instantiation graph: defined modules, acyclic, single top.
    std::set<std::string> instantiated;
    for (auto& [name, m] : n.modules)
      for (auto& inst : m.instances) {
        if (!n.modules.count(inst.module))
          fail_at(inst.line, fmt::format("instance '{}' references undefined module '{}'", inst.name, inst.module));
        instantiated.insert(inst.module);
      }
    std::vector<std::string> tops;
    for (auto& name : n.module_order)
      if (!instantiated.count(name)) tops.push_back(name);
    if (tops.size() != 1) {
      if (n.modules.empty()) throw ParseError(file_, 1, 0, "no modules defined");
      throw ParseError(file_, 1, 0,
                       tops.empty() ? "no top module (instantiation cycle)"
                                    : fmt::format("expected exactly one top module, found: {}", join(tops, ", ")));
    }
    n.top = tops[0];
    std::map<std::string, int> color;
    std::function<void(const std::string&)> dfs = [&](const std::string& name) {
      color[name] = 1;
      for (auto& inst : n.modules.at(name).instances) {
        if (color[inst.module] == 1) fail_at(inst.line, fmt::format("recursive instantiation of '{}'", inst.module));
        if (color[inst.module] == 0) dfs(inst.module);
      }
      color[name] = 2;
    };
    dfs(n.top);
    for (auto& name : n.module_order)
      if (color[name] == 0) dfs(name);

    for (auto& [name, m] : n.modules) {
      // Each wire/output has exactly one driver.
      std::map<std::string, int> drivers;
      for (auto& [s, _] : m.assigns) drivers[s]++;
      for (auto& inst : m.instances) {
        const ModuleDef& child = n.modules.at(inst.module);
        std::set<std::string> bound;
        for (auto& b : inst.bindings) {
          const Port* p = child.find_port(b.port);
          if (!p) fail_at(inst.line, fmt::format("module '{}' has no port '{}'", inst.module, b.port));
          bound.insert(b.port);
          if (b.actual->op == Op::Const) {
            if (p->dir == Dir::Out) fail_at(inst.line, fmt::format("output port '{}' bound to a constant", b.port));
            Resolver none;
            none.signal = [](const std::string&) { return std::nullopt; };
            try {
              b.actual = resolve(b.actual, none, p->width);
            } catch (const WidthMismatch& e) {
              fail_at(inst.line, e.what());
            }
            continue;
          }
          uint32_t w = *m.width_of(b.actual->name);
          if (w != p->width)
            throw WidthMismatch(fmt::format("{}:{}: port '{}.{}' has width {}, bound signal '{}' has width {}", file_,
                                            inst.line, inst.name, b.port, p->width, b.actual->name, w));
          b.actual = make_ref(b.actual->name, w, -1);
          if (p->dir == Dir::Out) {
            if (auto pp = m.find_port(b.actual->name); pp && pp->dir == Dir::In)
              fail_at(inst.line, fmt::format("input '{}' driven by instance output", b.actual->name));
            if (auto s = m.find_signal(b.actual->name); s && s->kind == SignalDecl::Reg)
              fail_at(inst.line, fmt::format("reg '{}' driven by instance output", b.actual->name));
            drivers[b.actual->name]++;
          }
        }
        for (auto& p : child.ports)
          if (p.dir == Dir::In && !bound.count(p.name))
            fail_at(inst.line, fmt::format("input port '{}' of instance '{}' is unconnected", p.name, inst.name));
      }
      auto check_driven = [&](const std::string& s, int line) {
        int d = drivers[s];
        if (d == 0) fail_at(line, fmt::format("'{}' in module '{}' has no driver", s, name));
        if (d > 1) fail_at(line, fmt::format("'{}' in module '{}' has {} drivers", s, name, d));
      };
      for (auto& p : m.ports)
        if (p.dir == Dir::Out) check_driven(p.name, p.line);
      for (auto& s : m.signals)
        if (s.kind == SignalDecl::Wire) check_driven(s.name, s.line);
    }
  }

  std::string file_, base_;
  const Stmt* st_ = nullptr;
  size_t pos_ = 0;
  std::map<std::string, std::set<std::string>> names_;
  std::map<std::string, int> pending_lines_;
  std::map<std::string, std::vector<std::pair<FsmAnnotation, std::vector<std::pair<std::string, std::string>>>>> fsm_raw_;
};

}  // namespace

Netlist parse_hnl(const std::string& text, const std::string& file, const std::string& base_dir) {
  HnlParser p(file, base_dir);
  return p.parse(text);
}

Netlist parse_hnl_file(const std::string& path) {
  std::string text = read_file(path);
  auto base = std::filesystem::path(path).parent_path().string();
  return parse_hnl(text, path, base.empty() ? "." : base);
}

}  // namespace hive
