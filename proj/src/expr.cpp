#include "hive/expr.hpp"

#include "hive/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <set>
#include <unordered_map>

namespace hive {

const char* op_name(Op op) {
  switch (op) {
    case Op::Const: return "const";
    case Op::Ref: return "ref";
    case Op::Not: return "not";
    case Op::And: return "and";
    case Op::Or: return "or";
    case Op::Xor: return "xor";
    case Op::Add: return "add";
    case Op::Sub: return "sub";
    case Op::Mul: return "mul";
    case Op::Eq: return "eq";
    case Op::Neq: return "neq";
    case Op::Ult: return "ult";
    case Op::Concat: return "concat";
    case Op::Extract: return "extract";
    case Op::Mux: return "mux";
    case Op::Read: return "read";
    case Op::Prev: return "prev";
    case Op::AtTrigger: return "at_trigger";
  }
  return "?";
}

ExprPtr make_const(const BitVec& v) {
  auto e = std::make_shared<Expr>();
  e->op = Op::Const;
  e->width = v.width();
  e->value = v;
  return e;
}

ExprPtr make_ref(const std::string& name, uint32_t width, int id) {
  auto e = std::make_shared<Expr>();
  e->op = Op::Ref;
  e->name = name;
  e->width = width;
  e->id = id;
  return e;
}

ExprPtr make_op(Op op, std::vector<ExprPtr> args, uint32_t width) {
  auto e = std::make_shared<Expr>();
  e->op = op;
  e->args = std::move(args);
  e->width = width;
  return e;
}

ExprPtr make_extract(ExprPtr x, uint32_t hi, uint32_t lo) {
  auto e = std::make_shared<Expr>();
  e->op = Op::Extract;
  e->args = {std::move(x)};
  e->hi = hi;
  e->lo = lo;
  e->width = hi - lo + 1;
  return e;
}

namespace {

struct Tok {
  enum Kind { LParen, RParen, Atom, End } kind;
  std::string text;
  int line, col;
};

class ExprLexer {
 public:
  ExprLexer(const std::string& s, std::string file, int line, int col)
      : s_(s), file_(std::move(file)), line_(line), col_(col) {}

  Tok next() {
    while (i_ < s_.size()) {
      char c = s_[i_];
      if (c == ';') {
        while (i_ < s_.size() && s_[i_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
    if (i_ >= s_.size()) return {Tok::End, "", line_, col_};
    int l = line_, c0 = col_;
    if (s_[i_] == '(') { advance(); return {Tok::LParen, "(", l, c0}; }
    if (s_[i_] == ')') { advance(); return {Tok::RParen, ")", l, c0}; }
    std::string a;
    while (i_ < s_.size()) {
      char c = s_[i_];
      if (std::isspace(static_cast<unsigned char>(c)) || c == '(' || c == ')' || c == ';') break;
      a.push_back(c);
      advance();
    }
    return {Tok::Atom, a, l, c0};
  }

  [[noreturn]] void fail(const Tok& t, const std::string& msg) const { throw ParseError(file_, t.line, t.col, msg); }

 private:
  void advance() {
    if (s_[i_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++i_;
  }
  const std::string& s_;
  std::string file_;
  size_t i_ = 0;
  int line_, col_;
};

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '$'; }

const std::unordered_map<std::string, Op>& op_table() {
  static const std::unordered_map<std::string, Op> t = {
      {"not", Op::Not},     {"and", Op::And},         {"or", Op::Or},       {"xor", Op::Xor},
      {"add", Op::Add},     {"sub", Op::Sub},         {"mul", Op::Mul},     {"eq", Op::Eq},
      {"neq", Op::Neq},     {"ult", Op::Ult},         {"concat", Op::Concat}, {"extract", Op::Extract},
      {"mux", Op::Mux},     {"read", Op::Read},       {"prev", Op::Prev},   {"at_trigger", Op::AtTrigger},
  };
  return t;
}

class ExprParser {
 public:
  ExprParser(const std::string& s, const std::string& file, int line, int col) : lex_(s, file, line, col) {
    tok_ = lex_.next();
  }

  std::vector<ExprPtr> parse_seq() {
    std::vector<ExprPtr> out;
    while (tok_.kind != Tok::End) out.push_back(parse());
    return out;
  }

  ExprPtr parse_top() {
    ExprPtr e = parse();
    if (tok_.kind != Tok::End) lex_.fail(tok_, fmt::format("unexpected trailing token '{}'", tok_.text));
    return e;
  }

 private:
  void bump() { tok_ = lex_.next(); }

  uint32_t parse_index() {
    if (tok_.kind != Tok::Atom || tok_.text.empty() ||
        !std::all_of(tok_.text.begin(), tok_.text.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
      lex_.fail(tok_, "expected bit index");
    uint64_t v = std::stoull(tok_.text);
    if (v > (1u << 20)) lex_.fail(tok_, "bit index too large");
    bump();
    return static_cast<uint32_t>(v);
  }

  ExprPtr atom() {
    Tok t = tok_;
    bump();
    const std::string& a = t.text;
    auto e = std::make_shared<Expr>();
    e->line = t.line;
    e->col = t.col;
    if (std::isdigit(static_cast<unsigned char>(a[0]))) {
      if (a.find('\'') != std::string::npos) {
        try {
          e->value = BitVec::parse_sized(a);
        } catch (const ParseError&) {
          throw;
        } catch (const Error& err) {
          lex_.fail(t, err.what());
        }
        e->op = Op::Const;
        e->width = e->value.width();
        return e;
      }
      if (!std::all_of(a.begin(), a.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
        lex_.fail(t, fmt::format("malformed constant '{}'", a));
      if (a.size() > 19) lex_.fail(t, fmt::format("decimal constant '{}' too large; use a sized literal", a));
      e->op = Op::Const;
      e->width = 0;
      e->decimal = std::stoull(a);
      return e;
    }
    if (!is_ident_start(a[0]) || !std::all_of(a.begin(), a.end(), is_ident_char))
      lex_.fail(t, fmt::format("malformed identifier '{}'", a));
    e->op = Op::Ref;
    e->name = a;
    return e;
  }

  ExprPtr parse() {
    if (tok_.kind == Tok::Atom) return atom();
    if (tok_.kind != Tok::LParen) lex_.fail(tok_, tok_.kind == Tok::End ? "unexpected end of expression" : "unexpected ')'");
    Tok open = tok_;
    bump();
    if (tok_.kind != Tok::Atom) lex_.fail(tok_, "expected operator");
    Tok optok = tok_;
    auto it = op_table().find(optok.text);
    if (it == op_table().end()) lex_.fail(optok, fmt::format("unknown operator '{}'", optok.text));
    Op op = it->second;
    bump();
    auto e = std::make_shared<Expr>();
    e->op = op;
    e->line = open.line;
    e->col = open.col;
    if (op == Op::Extract) {
      e->hi = parse_index();
      e->lo = parse_index();
      if (e->hi < e->lo) lex_.fail(optok, "extract requires hi >= lo");
    }
    if (op == Op::Read) {
      if (tok_.kind != Tok::Atom) lex_.fail(tok_, "expected memory name");
      e->name = tok_.text;
      bump();
    }
    while (tok_.kind != Tok::RParen) {
      if (tok_.kind == Tok::End) lex_.fail(open, "unbalanced '('");
      e->args.push_back(parse());
    }
    bump();
    size_t n = e->args.size();
    auto arity = [&](size_t want) {
      if (n != want) lex_.fail(optok, fmt::format("'{}' takes {} operand(s), got {}", optok.text, want, n));
    };
    switch (op) {
      case Op::Not: case Op::Extract: case Op::Read: case Op::Prev: case Op::AtTrigger: arity(1); break;
      case Op::Sub: case Op::Eq: case Op::Neq: case Op::Ult: arity(2); break;
      case Op::Mux: arity(3); break;
      case Op::And: case Op::Or: case Op::Xor: case Op::Add: case Op::Mul: case Op::Concat: {
        if (n < 2) lex_.fail(optok, fmt::format("'{}' takes at least 2 operands", optok.text));
        // n-ary sugar folds left into binary nodes.
        ExprPtr acc = e->args[0];
        for (size_t i = 1; i < n; ++i) {
          auto b = std::make_shared<Expr>();
          b->op = op;
          b->line = e->line;
          b->col = e->col;
          b->args = {acc, e->args[i]};
          acc = b;
        }
        return acc;
      }
      default: break;
    }
    return e;
  }

  ExprLexer lex_;
  Tok tok_;
};

bool is_bitwise_family(Op op) {
  return op == Op::Not || op == Op::And || op == Op::Or || op == Op::Xor || op == Op::Add || op == Op::Sub ||
         op == Op::Mul;
}

// Width an expression has on its own, if any (unsized decimals have none).
std::optional<uint32_t> natural_width(const Expr& e, const Resolver& r) {
  switch (e.op) {
    case Op::Const: return e.width ? std::optional<uint32_t>(e.width) : std::nullopt;
    case Op::Ref: {
      auto info = r.signal(e.name);
      return info ? std::optional<uint32_t>(info->width) : std::nullopt;
    }
    case Op::Eq: case Op::Neq: case Op::Ult: return 1;
    case Op::Extract: return e.hi - e.lo + 1;
    case Op::Concat: {
      auto a = natural_width(*e.args[0], r), b = natural_width(*e.args[1], r);
      if (a && b) return *a + *b;
      return std::nullopt;
    }
    case Op::Read: {
      auto m = r.memory ? r.memory(e.name) : std::nullopt;
      return m ? std::optional<uint32_t>(m->width) : std::nullopt;
    }
    case Op::Mux: {
      auto a = natural_width(*e.args[1], r);
      return a ? a : natural_width(*e.args[2], r);
    }
    case Op::Prev: case Op::AtTrigger: return natural_width(*e.args[0], r);
    default:
      for (auto& a : e.args)
        if (auto w = natural_width(*a, r)) return w;
      return std::nullopt;
  }
}

std::string where(const Expr& e) { return e.line ? fmt::format(" at {}:{}", e.line, e.col) : std::string(); }

ExprPtr resolve_rec(const ExprPtr& ep, const Resolver& r, std::optional<uint32_t> ctx) {
  const Expr& e = *ep;
  auto out = std::make_shared<Expr>(e);
  auto need = [&](uint32_t got) {
    if (ctx && *ctx != got)
      throw WidthMismatch(fmt::format("width mismatch{}: expression '{}' has width {}, expected {}", where(e),
                                      to_string(ep), got, *ctx));
  };
  switch (e.op) {
    case Op::Const: {
      if (e.width) {
        need(e.width);
        return out;
      }
      uint32_t w = ctx.value_or(32);
      if (w < 64 && (e.decimal >> w) != 0)
        throw WidthMismatch(fmt::format("decimal {}{} does not fit in {} bits", e.decimal, where(e), w));
      out->value = BitVec(w, e.decimal);
      out->width = w;
      return out;
    }
    case Op::Ref: {
      auto info = r.signal(e.name);
      if (!info) throw UndeclaredSignal(e.name, where(e));
      out->width = info->width;
      out->id = info->id;
      out->name = info->name;
      need(out->width);
      return out;
    }
    case Op::Eq: case Op::Neq: case Op::Ult: {
      need(1);
      auto w = natural_width(*e.args[0], r);
      if (!w) w = natural_width(*e.args[1], r);
      out->args[0] = resolve_rec(e.args[0], r, w);
      out->args[1] = resolve_rec(e.args[1], r, out->args[0]->width);
      out->width = 1;
      return out;
    }
    case Op::Extract: {
      out->args[0] = resolve_rec(e.args[0], r, natural_width(*e.args[0], r) ? std::nullopt : std::optional<uint32_t>(e.hi + 1));
      if (e.hi >= out->args[0]->width)
        throw WidthMismatch(fmt::format("extract [{}:{}]{} out of range for width {}", e.hi, e.lo, where(e),
                                        out->args[0]->width));
      out->width = e.hi - e.lo + 1;
      need(out->width);
      return out;
    }
    case Op::Concat: {
      if (!natural_width(*e.args[0], r) || !natural_width(*e.args[1], r))
        throw WidthMismatch(fmt::format("concat operands must be sized{}", where(e)));
      out->args[0] = resolve_rec(e.args[0], r, std::nullopt);
      out->args[1] = resolve_rec(e.args[1], r, std::nullopt);
      out->width = out->args[0]->width + out->args[1]->width;
      need(out->width);
      return out;
    }
    case Op::Mux: {
      out->args[0] = resolve_rec(e.args[0], r, 1u);
      auto w = ctx ? ctx : natural_width(e, r);
      out->args[1] = resolve_rec(e.args[1], r, w);
      out->args[2] = resolve_rec(e.args[2], r, out->args[1]->width);
      out->width = out->args[1]->width;
      return out;
    }
    case Op::Read: {
      auto m = r.memory ? r.memory(e.name) : std::nullopt;
      if (!m) throw UndeclaredSignal(e.name, where(e) + " (memory)");
      out->id = m->id;
      out->name = m->name;
      out->width = m->width;
      need(out->width);
      out->args[0] = resolve_rec(e.args[0], r, m->addr_width);
      return out;
    }
    case Op::Prev: case Op::AtTrigger: {
      if (!r.allow_temporal)
        throw Error(fmt::format("'{}'{} is only allowed in specification expressions", op_name(e.op), where(e)));
      out->args[0] = resolve_rec(e.args[0], r, ctx);
      out->width = out->args[0]->width;
      return out;
    }
    default: {
      // Same-width families.
      auto w = ctx ? ctx : natural_width(e, r);
      for (size_t i = 0; i < e.args.size(); ++i) out->args[i] = resolve_rec(e.args[i], r, w);
      out->width = out->args[0]->width;
      for (auto& a : out->args)
        if (a->width != out->width)
          throw WidthMismatch(fmt::format("width mismatch{} in '{}': {} vs {}", where(e), op_name(e.op), a->width,
                                          out->width));
      return out;
    }
  }
}

void to_string_rec(const Expr& e, std::string& s) {
  switch (e.op) {
    case Op::Const:
      s += e.width ? e.value.to_literal() : std::to_string(e.decimal);
      return;
    case Op::Ref:
      s += e.name;
      return;
    default:
      break;
  }
  s += '(';
  s += op_name(e.op);
  if (e.op == Op::Extract) s += fmt::format(" {} {}", e.hi, e.lo);
  if (e.op == Op::Read) s += " " + e.name;
  for (auto& a : e.args) {
    s += ' ';
    to_string_rec(*a, s);
  }
  s += ')';
}

}  // namespace

ExprPtr parse_expr(const std::string& text, const std::string& file, int line, int col) {
  ExprParser p(text, file, line, col);
  return p.parse_top();
}

std::vector<ExprPtr> parse_expr_seq(const std::string& text, const std::string& file, int line, int col) {
  ExprParser p(text, file, line, col);
  return p.parse_seq();
}

ExprPtr resolve(const ExprPtr& e, const Resolver& r, uint32_t expected_width) {
  return resolve_rec(e, r, expected_width ? std::optional<uint32_t>(expected_width) : std::nullopt);
}

std::string to_string(const ExprPtr& e) {
  std::string s;
  to_string_rec(*e, s);
  return s;
}

ExprPtr map_refs(const ExprPtr& e, const std::function<ExprPtr(const Expr&)>& f) {
  if (e->op == Op::Ref) {
    auto r = f(*e);
    return r ? r : e;
  }
  if (e->args.empty()) return e;
  bool changed = false;
  std::vector<ExprPtr> args;
  args.reserve(e->args.size());
  for (auto& a : e->args) {
    args.push_back(map_refs(a, f));
    changed |= args.back() != a;
  }
  if (!changed) return e;
  auto out = std::make_shared<Expr>(*e);
  out->args = std::move(args);
  return out;
}

void for_each_node(const ExprPtr& e, const std::function<void(const Expr&)>& f) {
  f(*e);
  for (auto& a : e->args) for_each_node(a, f);
}

std::vector<int> referenced_signals(const ExprPtr& e) {
  std::set<int> ids;
  for_each_node(e, [&](const Expr& n) {
    if (n.op == Op::Ref) ids.insert(n.id);
  });
  return {ids.begin(), ids.end()};
}

std::vector<int> referenced_memories(const ExprPtr& e) {
  std::set<int> ids;
  for_each_node(e, [&](const Expr& n) {
    if (n.op == Op::Read) ids.insert(n.id);
  });
  return {ids.begin(), ids.end()};
}

}  // namespace hive

namespace hive {

ExprPtr bool_const(bool v) { return make_const(BitVec(1, v)); }
bool is_true(const ExprPtr& e) { return e->is_const() && e->width == 1 && e->value.bit(0); }
bool is_false(const ExprPtr& e) { return e->is_const() && e->width == 1 && !e->value.bit(0); }

ExprPtr mk_not(const ExprPtr& a) {
  if (a->is_const()) return make_const(~a->value);
  if (a->op == Op::Not) return a->args[0];
  return make_op(Op::Not, {a}, a->width);
}

ExprPtr mk_and(const ExprPtr& a, const ExprPtr& b) {
  if (is_false(a) || is_true(b)) return a;
  if (is_false(b) || is_true(a)) return b;
  return make_op(Op::And, {a, b}, a->width);
}

ExprPtr mk_or(const ExprPtr& a, const ExprPtr& b) {
  if (is_true(a) || is_false(b)) return a;
  if (is_true(b) || is_false(a)) return b;
  return make_op(Op::Or, {a, b}, a->width);
}

ExprPtr mk_eq(const ExprPtr& a, const ExprPtr& b) {
  if (a->is_const() && b->is_const()) return bool_const(a->value == b->value);
  return make_op(Op::Eq, {a, b}, 1);
}

ExprPtr fold(const ExprPtr& e, const std::function<std::optional<BitVec>(int)>& subst) {
  switch (e->op) {
    case Op::Const: return e;
    case Op::Ref:
      if (subst)
        if (auto v = subst(e->id)) return make_const(*v);
      return e;
    case Op::Mux: {
      ExprPtr c = fold(e->args[0], subst);
      if (c->is_const()) return fold(e->args[c->value.bit(0) ? 1 : 2], subst);
      ExprPtr t = fold(e->args[1], subst), f = fold(e->args[2], subst);
      if (t->is_const() && f->is_const() && t->value == f->value) return t;
      return make_op(Op::Mux, {c, t, f}, e->width);
    }
    default: break;
  }
  std::vector<ExprPtr> args;
  bool all_const = true;
  for (auto& a : e->args) {
    args.push_back(fold(a, subst));
    all_const &= args.back()->is_const();
  }
  if (e->op == Op::And) {
    for (auto& a : args)
      if (a->is_const() && a->value.is_zero()) return make_const(BitVec(e->width));
    if (args[0]->is_const() && args[0]->value.is_ones()) return args[1];
    if (args[1]->is_const() && args[1]->value.is_ones()) return args[0];
  }
  if (e->op == Op::Or) {
    for (auto& a : args)
      if (a->is_const() && a->value.is_ones()) return make_const(BitVec::ones(e->width));
    if (args[0]->is_const() && args[0]->value.is_zero()) return args[1];
    if (args[1]->is_const() && args[1]->value.is_zero()) return args[0];
  }
  if (e->op == Op::Not && args[0]->op == Op::Not) return args[0]->args[0];
  if (!all_const || e->op == Op::Read || e->op == Op::Prev || e->op == Op::AtTrigger) {
    auto out = std::make_shared<Expr>(*e);
    out->args = std::move(args);
    return out;
  }
  const BitVec& x = args[0]->value;
  switch (e->op) {
    case Op::Not: return make_const(~x);
    case Op::Extract: return make_const(x.extract(e->hi, e->lo));
    case Op::And: return make_const(x & args[1]->value);
    case Op::Or: return make_const(x | args[1]->value);
    case Op::Xor: return make_const(x ^ args[1]->value);
    case Op::Add: return make_const(x + args[1]->value);
    case Op::Sub: return make_const(x - args[1]->value);
    case Op::Mul: return make_const(x * args[1]->value);
    case Op::Eq: return bool_const(x == args[1]->value);
    case Op::Neq: return bool_const(x != args[1]->value);
    case Op::Ult: return bool_const(x.ult(args[1]->value));
    case Op::Concat: return make_const(x.concat(args[1]->value));
    default: break;
  }
  return e;
}

}  // namespace hive
