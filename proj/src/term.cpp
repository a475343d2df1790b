#include "hive/term.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <functional>

namespace hive {

namespace {

size_t mix(size_t h, size_t v) { return h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2)); }

void need_same(Term a, Term b, const char* op) {
  if (a->width != b->width || a->idx_width != b->idx_width)
    throw WidthMismatch(fmt::format("{}: operand widths {} and {} differ", op, a->width, b->width));
}

void need_bv(Term a, const char* op) {
  if (a->is_array()) throw WidthMismatch(fmt::format("{}: array operand", op));
}

bool is_zero(Term t) { return t->is_const() && t->value.is_zero(); }
bool is_ones(Term t) { return t->is_const() && t->value.is_ones(); }

}  // namespace

bool TermManager::Eq::operator()(const TermNode* a, const TermNode* b) const {
  return a->op == b->op && a->width == b->width && a->idx_width == b->idx_width && a->hi == b->hi &&
         a->lo == b->lo && a->nargs == b->nargs && a->args == b->args && a->value == b->value && a->name == b->name &&
         a->init == b->init;
}

Term TermManager::intern(TermNode n) {
  size_t h = mix(static_cast<size_t>(n.op), n.width);
  h = mix(h, n.idx_width);
  h = mix(h, n.hi * 131 + n.lo);
  for (int i = 0; i < n.nargs; ++i) h = mix(h, n.args[i]->id);
  if (n.op == TOp::Const) h = mix(h, n.value.hash());
  if (!n.name.empty()) h = mix(h, std::hash<std::string>()(n.name));
  n.hash = h;
  auto it = table_.find(&n);
  if (it != table_.end()) return *it;
  if (nodes_.size() >= max_nodes_)
    throw ResourceExceeded(fmt::format("term budget of {} nodes exceeded", max_nodes_));
  n.id = static_cast<uint32_t>(nodes_.size());
  nodes_.push_back(std::move(n));
  const TermNode* p = &nodes_.back();
  table_.insert(p);
  return p;
}

Term TermManager::mk_const(const BitVec& v) {
  TermNode n{};
  n.op = TOp::Const;
  n.width = v.width();
  n.value = v;
  return intern(std::move(n));
}

Term TermManager::mk_sym(const std::string& name, uint32_t width) {
  if (auto it = by_name_.find(name); it != by_name_.end()) {
    if (it->second->width != width || it->second->is_array())
      throw WidthMismatch(fmt::format("symbol '{}' redeclared with a different sort", name));
    return it->second;
  }
  TermNode n{};
  n.op = TOp::Sym;
  n.width = width;
  n.value = BitVec(1);
  n.name = name;
  Term t = intern(std::move(n));
  by_name_[name] = t;
  symbols_.push_back(t);
  return t;
}

Term TermManager::mk_array_sym(const std::string& name, uint32_t idx_width, uint32_t data_width,
                               const std::vector<BitVec>* init) {
  if (auto it = by_name_.find(name); it != by_name_.end()) return it->second;
  TermNode n{};
  n.op = TOp::ArraySym;
  n.width = data_width;
  n.idx_width = idx_width;
  n.value = BitVec(1);
  n.name = name;
  n.init = init;
  Term t = intern(std::move(n));
  by_name_[name] = t;
  symbols_.push_back(t);
  return t;
}

Term TermManager::find_symbol(const std::string& name) const {
  auto it = by_name_.find(name);
  return it == by_name_.end() ? nullptr : it->second;
}

const std::vector<BitVec>* TermManager::intern_contents(std::vector<BitVec> contents) {
  contents_.push_back(std::move(contents));
  return &contents_.back();
}

namespace {

TermNode node(TOp op, uint32_t width, std::initializer_list<Term> args) {
  TermNode n{};
  n.op = op;
  n.width = width;
  n.value = BitVec(1);
  for (Term a : args) n.args[n.nargs++] = a;
  return n;
}

}  // namespace

Term TermManager::mk_not(Term a) {
  need_bv(a, "not");
  if (a->is_const()) return mk_const(~a->value);
  if (a->op == TOp::Not) return a->arg(0);
  return intern(node(TOp::Not, a->width, {a}));
}

Term TermManager::mk_and(Term a, Term b) {
  need_same(a, b, "and");
  if (a->is_const() && b->is_const()) return mk_const(a->value & b->value);
  if (is_zero(a) || is_ones(b)) return a;
  if (is_zero(b) || is_ones(a)) return b;
  if (a == b) return a;
  if (a->id > b->id) std::swap(a, b);
  return intern(node(TOp::And, a->width, {a, b}));
}

Term TermManager::mk_or(Term a, Term b) {
  need_same(a, b, "or");
  if (a->is_const() && b->is_const()) return mk_const(a->value | b->value);
  if (is_ones(a) || is_zero(b)) return a;
  if (is_ones(b) || is_zero(a)) return b;
  if (a == b) return a;
  if (a->id > b->id) std::swap(a, b);
  return intern(node(TOp::Or, a->width, {a, b}));
}

Term TermManager::mk_xor(Term a, Term b) {
  need_same(a, b, "xor");
  if (a->is_const() && b->is_const()) return mk_const(a->value ^ b->value);
  if (is_zero(a)) return b;
  if (is_zero(b)) return a;
  if (a->id > b->id) std::swap(a, b);
  return intern(node(TOp::Xor, a->width, {a, b}));
}

Term TermManager::mk_add(Term a, Term b) {
  need_same(a, b, "add");
  if (a->is_const() && b->is_const()) return mk_const(a->value + b->value);
  if (is_zero(a)) return b;
  if (is_zero(b)) return a;
  return intern(node(TOp::Add, a->width, {a, b}));
}

Term TermManager::mk_sub(Term a, Term b) {
  need_same(a, b, "sub");
  if (a->is_const() && b->is_const()) return mk_const(a->value - b->value);
  if (is_zero(b)) return a;
  return intern(node(TOp::Sub, a->width, {a, b}));
}

Term TermManager::mk_mul(Term a, Term b) {
  need_same(a, b, "mul");
  if (a->is_const() && b->is_const()) return mk_const(a->value * b->value);
  if (is_zero(a)) return a;
  if (is_zero(b)) return b;
  return intern(node(TOp::Mul, a->width, {a, b}));
}

Term TermManager::mk_eq(Term a, Term b) {
  need_same(a, b, "eq");
  need_bv(a, "eq");
  if (a == b) return mk_bool(true);
  if (a->is_const() && b->is_const()) return mk_bool(a->value == b->value);
  if (a->id > b->id) std::swap(a, b);
  return intern(node(TOp::Eq, 1, {a, b}));
}

Term TermManager::mk_ult(Term a, Term b) {
  need_same(a, b, "ult");
  need_bv(a, "ult");
  if (a->is_const() && b->is_const()) return mk_bool(a->value.ult(b->value));
  if (a == b) return mk_bool(false);
  return intern(node(TOp::Ult, 1, {a, b}));
}

Term TermManager::mk_concat(Term hi, Term lo) {
  need_bv(hi, "concat");
  need_bv(lo, "concat");
  if (hi->is_const() && lo->is_const()) return mk_const(hi->value.concat(lo->value));
  return intern(node(TOp::Concat, hi->width + lo->width, {hi, lo}));
}

Term TermManager::mk_extract(Term a, uint32_t hi, uint32_t lo) {
  need_bv(a, "extract");
  if (hi < lo || hi >= a->width) throw WidthMismatch(fmt::format("extract [{}:{}] of width {}", hi, lo, a->width));
  if (a->is_const()) return mk_const(a->value.extract(hi, lo));
  if (lo == 0 && hi + 1 == a->width) return a;
  TermNode n = node(TOp::Extract, hi - lo + 1, {a});
  n.hi = hi;
  n.lo = lo;
  return intern(std::move(n));
}

Term TermManager::mk_ite(Term c, Term t, Term e) {
  if (c->width != 1 || c->is_array()) throw WidthMismatch("ite condition must be 1 bit");
  need_same(t, e, "ite");
  if (c->is_const()) return c->value.bit(0) ? t : e;
  if (t == e) return t;
  if (t->width == 1 && !t->is_array() && is_ones(t) && is_zero(e)) return c;
  TermNode n = node(TOp::Ite, t->width, {c, t, e});
  n.idx_width = t->idx_width;
  return intern(std::move(n));
}

Term TermManager::mk_store(Term arr, Term idx, Term val) {
  if (!arr->is_array() || idx->width != arr->idx_width || val->width != arr->width)
    throw WidthMismatch("store: sort mismatch");
  TermNode n = node(TOp::Store, arr->width, {arr, idx, val});
  n.idx_width = arr->idx_width;
  return intern(std::move(n));
}

Term TermManager::mk_select(Term arr, Term idx) {
  if (!arr->is_array() || idx->width != arr->idx_width) throw WidthMismatch("select: sort mismatch");
  // Walk stores and constant-condition array ites while indices are decidable.
  Term a = arr;
  while (true) {
    if (a->op == TOp::Store) {
      Term i = a->arg(1);
      if (i == idx) return a->arg(2);
      if (i->is_const() && idx->is_const()) {
        if (i->value == idx->value) return a->arg(2);
        a = a->arg(0);
        continue;
      }
      break;
    }
    if (a->op == TOp::ArraySym && a->init && idx->is_const()) return mk_const((*a->init)[idx->value.to_u64()]);
    break;
  }
  return intern(node(TOp::Select, arr->width, {a, idx}));
}

Term TermManager::mk_and_all(const std::vector<Term>& ts) {
  Term acc = mk_bool(true);
  for (Term t : ts) acc = mk_and(acc, t);
  return acc;
}

Term TermManager::mk_or_all(const std::vector<Term>& ts) {
  Term acc = mk_bool(false);
  for (Term t : ts) acc = mk_or(acc, t);
  return acc;
}

size_t dag_size(const std::vector<Term>& roots) {
  std::unordered_set<Term> seen;
  std::vector<Term> stack(roots.begin(), roots.end());
  while (!stack.empty()) {
    Term t = stack.back();
    stack.pop_back();
    if (!seen.insert(t).second) continue;
    for (int i = 0; i < t->nargs; ++i) stack.push_back(t->args[i]);
  }
  return seen.size();
}

size_t dag_depth(Term root) {
  std::unordered_map<Term, size_t> depth;
  std::vector<std::pair<Term, bool>> stack{{root, false}};
  while (!stack.empty()) {
    auto [t, done] = stack.back();
    stack.pop_back();
    if (depth.count(t)) continue;
    if (done) {
      size_t d = 0;
      for (int i = 0; i < t->nargs; ++i) d = std::max(d, depth[t->args[i]]);
      depth[t] = d + 1;
      continue;
    }
    stack.push_back({t, true});
    for (int i = 0; i < t->nargs; ++i)
      if (!depth.count(t->args[i])) stack.push_back({t->args[i], false});
  }
  return depth[root];
}

BitVec TermEvaluator::select(Term arr, const BitVec& idx) {
  while (true) {
    switch (arr->op) {
      case TOp::Store:
        if (eval(arr->arg(1)) == idx) return eval(arr->arg(2));
        arr = arr->arg(0);
        continue;
      case TOp::Ite:
        arr = eval(arr->arg(0)).bit(0) ? arr->arg(1) : arr->arg(2);
        continue;
      case TOp::ArraySym:
        if (arr->init) return (*arr->init)[idx.to_u64()];
        return BitVec(arr->width);
      default:
        throw Error("evaluator: unexpected array term");
    }
  }
}

BitVec TermEvaluator::eval(Term root) {
  // Iterative post-order to survive deep unrollings.
  std::vector<std::pair<Term, bool>> stack{{root, false}};
  while (!stack.empty()) {
    auto [t, ready] = stack.back();
    stack.pop_back();
    if (memo_.count(t) || t->is_array()) continue;
    if (!ready) {
      stack.push_back({t, true});
      for (int i = 0; i < t->nargs; ++i)
        if (!t->args[i]->is_array() && !memo_.count(t->args[i])) stack.push_back({t->args[i], false});
      // Array arguments: evaluate their index/value/condition subterms lazily in select().
      continue;
    }
    auto v = [&](int i) -> const BitVec& { return memo_.at(t->args[i]); };
    BitVec r;
    switch (t->op) {
      case TOp::Const: r = t->value; break;
      case TOp::Sym: {
        auto it = a_.find(t->name);
        r = it != a_.end() ? it->second.resize(t->width) : BitVec(t->width);
        break;
      }
      case TOp::Not: r = ~v(0); break;
      case TOp::And: r = v(0) & v(1); break;
      case TOp::Or: r = v(0) | v(1); break;
      case TOp::Xor: r = v(0) ^ v(1); break;
      case TOp::Add: r = v(0) + v(1); break;
      case TOp::Sub: r = v(0) - v(1); break;
      case TOp::Mul: r = v(0) * v(1); break;
      case TOp::Eq: r = BitVec(1, v(0) == v(1)); break;
      case TOp::Ult: r = BitVec(1, v(0).ult(v(1))); break;
      case TOp::Concat: r = v(0).concat(v(1)); break;
      case TOp::Extract: r = v(0).extract(t->hi, t->lo); break;
      case TOp::Ite: r = v(0).bit(0) ? v(1) : v(2); break;
      case TOp::Select: r = select(t->arg(0), v(1)); break;
      default: throw Error("evaluator: unexpected term");
    }
    memo_[t] = std::move(r);
  }
  return memo_.at(root);
}

}  // namespace hive
