#pragma once

#include "hive/bitvec.hpp"
#include "hive/expr.hpp"
#include "hive/fsm.hpp"
#include "hive/netlist.hpp"
#include "hive/rank.hpp"
#include "hive/trace.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace hive {

enum class HintKind { Concretize, Weaken, Overapproximate, Abstract };
enum class HintStatus { Candidate, Verified, Rejected };

const char* hint_kind_name(HintKind k);
const char* hint_status_name(HintStatus s);
HintKind parse_hint_kind(const std::string& s);
HintStatus parse_hint_status(const std::string& s);

struct Hint {
  std::string module;  // original module name
  std::string signal;  // flat hierarchical name
  HintKind kind = HintKind::Concretize;
  HintStatus status = HintStatus::Candidate;
  // Concretize: value pinned for cycles [from, to]; `to` absent = every later cycle.
  std::optional<BitVec> value;
  uint64_t from = 0;
  std::optional<uint64_t> to;
  // Weaken: path condition assumed false at every cycle (null = no constraint).
  std::string state;
  ExprPtr condition;
  // Abstract: allowed-dependency snapshot (flat names).
  std::vector<std::string> allowed;
  uint64_t count = 0;  // trace change count that produced the hint
  std::optional<uint64_t> witness_cycle;
  std::string note;

  // Identity used for dedup and canonical order.
  std::tuple<std::string, std::string, int, std::string> key() const {
    return {module, signal, static_cast<int>(kind), state};
  }
};

struct HintSet {
  std::string scenario;
  uint32_t tau = 5;
  uint64_t depth = 0;  // verification depth (0 = not verified yet)
  std::vector<Hint> hints;
  std::vector<std::string> protected_registers;  // FSM state registers

  std::map<HintKind, size_t> counts(std::optional<HintStatus> status = std::nullopt) const;
  void canonicalize();  // sort by key, drop exact duplicates
  HintSet verified_only() const;
};

// Payload equality of two hint sets (module, signal, kind, payload), ignoring status/notes.
bool same_hints(const HintSet& a, const HintSet& b);

struct AlignedEntry {
  std::string instance;  // flat name of the signal
  int id;
  uint64_t count;
  bool unknown, highz;
};
// module -> local name -> occurrences
using Alignment = std::map<std::string, std::map<std::string, std::vector<AlignedEntry>>>;

Alignment align_signals(const RankedSignals& ranked, const FlatDesign& f);

struct WeakenTarget {
  std::string fsm_register;
  std::string state;
  ExprPtr condition;
};

// Entry conditions of every state not visited in `t`, per FSM, in state order.
std::vector<WeakenTarget> path_prioritization(const Trace& t, const std::vector<Fsm>& fsms);

struct HintGenInput {
  std::string scenario;
  uint32_t tau = 5;
  const RankedSignals* ranked = nullptr;
  const FlatDesign* design = nullptr;
  const Trace* trace = nullptr;
  const std::vector<Fsm>* fsms = nullptr;
};

HintSet hint_generation(const HintGenInput& in);

// FSM states whose register-equals-constant tests guard `sig`'s driver.
std::set<std::string> assigning_states(const FlatDesign& f, const std::vector<Fsm>& fsms, int sig);

// Abstract condition: the fan-in of `sig`, cut at `allowed`, reaches no other
// register, input or memory.
bool abstract_cone_ok(const FlatDesign& f, int sig, const std::vector<std::string>& allowed);

// JSON hint file. Writes verified hints only unless include_rejected.
std::string write_hintfile(const HintSet& h, bool include_rejected = false);
HintSet read_hintfile(const std::string& text, const FlatDesign* f = nullptr, const std::string& file = "<hints>");
HintSet load_hintfile(const std::string& path, const FlatDesign* f = nullptr);

}  // namespace hive
