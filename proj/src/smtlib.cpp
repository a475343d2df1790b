#include "hive/smt.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace hive {

namespace {

std::string sort_of(Term t) {
  if (t->is_array()) return fmt::format("(Array (_ BitVec {}) (_ BitVec {}))", t->idx_width, t->width);
  return fmt::format("(_ BitVec {})", t->width);
}

std::string bin_const(const BitVec& v) { return "#b" + v.to_binary(); }

class Emitter {
 public:
  std::ostringstream out;
  std::unordered_map<Term, std::string> name;

  // Post-order over the DAG; every non-leaf gets a define-fun.
  void emit(Term root) {
    std::vector<std::pair<Term, bool>> stack{{root, false}};
    while (!stack.empty()) {
      auto [t, ready] = stack.back();
      stack.pop_back();
      if (name.count(t)) continue;
      if (!ready) {
        stack.push_back({t, true});
        for (int i = 0; i < t->nargs; ++i)
          if (!name.count(t->args[i])) stack.push_back({t->args[i], false});
        continue;
      }
      if (t->op == TOp::Const) {
        name[t] = bin_const(t->value);
        continue;
      }
      if (t->op == TOp::Sym || t->op == TOp::ArraySym) {
        std::string n = "|" + t->name + "|";
        name[t] = n;
        out << "(declare-fun " << n << " () " << sort_of(t) << ")\n";
        if (t->op == TOp::Sym)
          bv_symbols.push_back(n);
        else if (t->init)
          for (size_t a = 0; a < t->init->size(); ++a)
            out << "(assert (= (select " << n << " " << bin_const(BitVec(t->idx_width, a)) << ") "
                << bin_const((*t->init)[a]) << "))\n";
        if (t->is_array()) has_arrays = true;
        continue;
      }
      std::string n = fmt::format("|t{}|", t->id);
      name[t] = n;
      out << "(define-fun " << n << " () " << sort_of(t) << " " << body(t) << ")\n";
      if (t->is_array()) has_arrays = true;
    }
  }

  std::vector<std::string> bv_symbols;
  bool has_arrays = false;

 private:
  std::string a(Term t, int i) { return name.at(t->args[i]); }
  std::string bool_of(Term t, int i) { return "(= " + a(t, i) + " #b1)"; }

  std::string body(Term t) {
    switch (t->op) {
      case TOp::Not: return "(bvnot " + a(t, 0) + ")";
      case TOp::And: return "(bvand " + a(t, 0) + " " + a(t, 1) + ")";
      case TOp::Or: return "(bvor " + a(t, 0) + " " + a(t, 1) + ")";
      case TOp::Xor: return "(bvxor " + a(t, 0) + " " + a(t, 1) + ")";
      case TOp::Add: return "(bvadd " + a(t, 0) + " " + a(t, 1) + ")";
      case TOp::Sub: return "(bvsub " + a(t, 0) + " " + a(t, 1) + ")";
      case TOp::Mul: return "(bvmul " + a(t, 0) + " " + a(t, 1) + ")";
      case TOp::Eq: return "(ite (= " + a(t, 0) + " " + a(t, 1) + ") #b1 #b0)";
      case TOp::Ult: return "(ite (bvult " + a(t, 0) + " " + a(t, 1) + ") #b1 #b0)";
      case TOp::Concat: return "(concat " + a(t, 0) + " " + a(t, 1) + ")";
      case TOp::Extract: return fmt::format("((_ extract {} {}) {})", t->hi, t->lo, a(t, 0));
      case TOp::Ite: return "(ite " + bool_of(t, 0) + " " + a(t, 1) + " " + a(t, 2) + ")";
      case TOp::Store: return "(store " + a(t, 0) + " " + a(t, 1) + " " + a(t, 2) + ")";
      case TOp::Select: return "(select " + a(t, 0) + " " + a(t, 1) + ")";
      default: break;
    }
    throw Error("smtlib: unexpected term");
  }
};

}  // namespace

std::string to_smtlib(const std::vector<Term>& assumptions, Term goal) {
  if (goal->width != 1 || goal->is_array()) throw WidthMismatch("goal must be a 1-bit term");
  Emitter em;
  for (Term a : assumptions) em.emit(a);
  em.emit(goal);
  std::ostringstream s;
  s << "(set-option :produce-models true)\n";
  s << "(set-logic " << (em.has_arrays ? "QF_ABV" : "QF_BV") << ")\n";
  s << em.out.str();
  for (Term a : assumptions) s << "(assert (= " << em.name.at(a) << " #b1))\n";
  s << "(assert (= " << em.name.at(goal) << " #b1))\n";
  s << "(check-sat)\n";
  if (!em.bv_symbols.empty()) {
    s << "(get-value (";
    for (size_t i = 0; i < em.bv_symbols.size(); ++i) s << (i ? " " : "") << em.bv_symbols[i];
    s << "))\n";
  }
  s << "(exit)\n";
  return s.str();
}

}  // namespace hive
