#pragma once

#include "hive/bitvec.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace hive {

enum class Op : uint8_t {
  Const,
  Ref,
  Not,
  And,
  Or,
  Xor,
  Add,
  Sub,
  Mul,
  Eq,
  Neq,
  Ult,
  Concat,
  Extract,
  Mux,
  Read,
  // Spec-only temporal operators.
  Prev,
  AtTrigger,
};

const char* op_name(Op op);

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

// Immutable expression node. `width == 0` only for bare decimals before resolution.
struct Expr {
  Op op = Op::Const;
  uint32_t width = 0;
  std::vector<ExprPtr> args;
  BitVec value;      // Const
  std::string name;  // Ref: signal; Read: memory
  uint32_t hi = 0, lo = 0;  // Extract
  uint64_t decimal = 0;     // unsized Const
  int id = -1;              // Ref: signal index; Read: memory index (after resolve)
  int line = 0, col = 0;

  bool is_const() const { return op == Op::Const && width != 0; }
};

ExprPtr make_const(const BitVec& v);
ExprPtr make_ref(const std::string& name, uint32_t width, int id);
ExprPtr make_op(Op op, std::vector<ExprPtr> args, uint32_t width);
ExprPtr make_extract(ExprPtr x, uint32_t hi, uint32_t lo);

// Parses one prefix expression. Throws ParseError with positions relative
// to (line, col) of the first character.
ExprPtr parse_expr(const std::string& text, const std::string& file = "<expr>", int line = 1, int col = 1);
// Parses a whitespace-separated sequence of expressions.
std::vector<ExprPtr> parse_expr_seq(const std::string& text, const std::string& file, int line, int col);

struct RefInfo {
  uint32_t width;
  int id;
  std::string name;  // canonical (possibly rewritten) name
};

struct MemInfo {
  uint32_t width;
  uint32_t addr_width;
  int id;
  std::string name;
};

struct Resolver {
  std::function<std::optional<RefInfo>(const std::string&)> signal;
  std::function<std::optional<MemInfo>(const std::string&)> memory;
  bool allow_temporal = false;
};

// Returns a width-annotated copy; sizes bare decimals from context (default 32
// when unconstrained, must fit). Throws UndeclaredSignal / WidthMismatch.
ExprPtr resolve(const ExprPtr& e, const Resolver& r, uint32_t expected_width = 0);

std::string to_string(const ExprPtr& e);

// Constant folding over resolved expressions with optional per-signal
// substitution. Short-circuits and/or/mux on constant operands.
ExprPtr fold(const ExprPtr& e, const std::function<std::optional<BitVec>(int)>& subst = nullptr);

ExprPtr mk_not(const ExprPtr& a);
ExprPtr mk_and(const ExprPtr& a, const ExprPtr& b);
ExprPtr mk_or(const ExprPtr& a, const ExprPtr& b);
ExprPtr mk_eq(const ExprPtr& a, const ExprPtr& b);
ExprPtr bool_const(bool v);
bool is_true(const ExprPtr& e);
bool is_false(const ExprPtr& e);

// Rewrites every Ref via `f` (returns replacement or nullptr to keep).
ExprPtr map_refs(const ExprPtr& e, const std::function<ExprPtr(const Expr&)>& f);
void for_each_node(const ExprPtr& e, const std::function<void(const Expr&)>& f);
std::vector<int> referenced_signals(const ExprPtr& e);   // sorted, unique
std::vector<int> referenced_memories(const ExprPtr& e);  // sorted, unique

}  // namespace hive
