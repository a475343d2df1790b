#pragma once

#include "hive/bitvec.hpp"
#include "hive/error.hpp"

#include <array>
#include <deque>
#include <map>
#include <memory>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace hive {

enum class TOp : uint8_t {
  Const,
  Sym,
  Not,
  And,
  Or,
  Xor,
  Add,
  Sub,
  Mul,
  Eq,   // width 1
  Ult,  // width 1
  Concat,
  Extract,
  Ite,  // bit-vector or array arms; condition width 1
  ArraySym,
  Store,
  Select,
};

// Booleans are 1-bit vectors. Arrays have idx_width > 0 and `width` = data width.
struct TermNode {
  TOp op;
  uint32_t width;
  uint32_t idx_width = 0;
  uint32_t hi = 0, lo = 0;
  uint8_t nargs = 0;
  std::array<const TermNode*, 3> args{};
  BitVec value;      // Const
  std::string name;  // Sym / ArraySym
  const std::vector<BitVec>* init = nullptr;  // ArraySym with fixed initial contents
  uint32_t id = 0;   // creation order
  size_t hash = 0;

  bool is_array() const { return idx_width != 0; }
  bool is_const() const { return op == TOp::Const; }
  const TermNode* arg(int i) const { return args[i]; }
};

using Term = const TermNode*;

class ResourceExceeded : public Error {
 public:
  using Error::Error;
};

// Owns and hash-conses terms: structurally equal terms are pointer-equal.
// Applies light rewriting (constant folding, double negation, constant-select
// ite, ite with equal arms, absorbing/identity constants, eq(x,x)).
class TermManager {
 public:
  explicit TermManager(size_t max_nodes = 20'000'000) : max_nodes_(max_nodes) {}
  TermManager(const TermManager&) = delete;
  TermManager& operator=(const TermManager&) = delete;

  Term mk_const(const BitVec& v);
  Term mk_bool(bool b) { return mk_const(BitVec(1, b)); }
  Term mk_sym(const std::string& name, uint32_t width);
  Term mk_array_sym(const std::string& name, uint32_t idx_width, uint32_t data_width,
                    const std::vector<BitVec>* init = nullptr);
  Term mk_not(Term a);
  Term mk_and(Term a, Term b);
  Term mk_or(Term a, Term b);
  Term mk_xor(Term a, Term b);
  Term mk_add(Term a, Term b);
  Term mk_sub(Term a, Term b);
  Term mk_mul(Term a, Term b);
  Term mk_eq(Term a, Term b);
  Term mk_neq(Term a, Term b) { return mk_not(mk_eq(a, b)); }
  Term mk_ult(Term a, Term b);
  Term mk_concat(Term hi, Term lo);
  Term mk_extract(Term a, uint32_t hi, uint32_t lo);
  Term mk_ite(Term c, Term t, Term e);
  Term mk_store(Term arr, Term idx, Term val);
  Term mk_select(Term arr, Term idx);
  Term mk_and_all(const std::vector<Term>& ts);
  Term mk_or_all(const std::vector<Term>& ts);

  size_t size() const { return nodes_.size(); }
  const std::vector<Term>& symbols() const { return symbols_; }  // Sym and ArraySym, creation order
  Term find_symbol(const std::string& name) const;
  // Keeps `contents` alive for the manager's lifetime.
  const std::vector<BitVec>* intern_contents(std::vector<BitVec> contents);

 private:
  Term intern(TermNode n);
  struct Hash {
    size_t operator()(const TermNode* n) const { return n->hash; }
  };
  struct Eq {
    bool operator()(const TermNode* a, const TermNode* b) const;
  };
  std::deque<TermNode> nodes_;
  std::unordered_set<const TermNode*, Hash, Eq> table_;
  std::unordered_map<std::string, Term> by_name_;
  std::vector<Term> symbols_;
  std::deque<std::vector<BitVec>> contents_;
  size_t max_nodes_;
};

// Number of distinct nodes reachable from `roots`.
size_t dag_size(const std::vector<Term>& roots);
// Longest path from a root to a leaf.
size_t dag_depth(Term root);

// Concrete evaluation under an assignment of symbols. Unassigned symbols
// evaluate to zero; ArraySym words come from `init` (or zero).
class TermEvaluator {
 public:
  explicit TermEvaluator(const std::map<std::string, BitVec>& assignment) : a_(assignment) {}
  BitVec eval(Term t);

 private:
  BitVec select(Term arr, const BitVec& idx);
  const std::map<std::string, BitVec>& a_;
  std::unordered_map<Term, BitVec> memo_;
};

}  // namespace hive
