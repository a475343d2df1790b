#pragma once

#include "hive/bitvec.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace hive {

struct Change {
  uint64_t time;
  LogicValue value;
  bool operator==(const Change& o) const { return time == o.time && value == o.value; }
};

// Invariant: times strictly increasing, consecutive values differ.
struct SignalHistory {
  std::string signal;
  uint32_t width = 1;
  std::vector<Change> changes;
  bool has_initial = false;  // first change is the dump's initial value

  // Value in effect at `t`, or nullopt before the first change.
  std::optional<LogicValue> value_at(uint64_t t) const;
  void record(uint64_t t, const LogicValue& v);
  bool operator==(const SignalHistory& o) const {
    return signal == o.signal && width == o.width && changes == o.changes && has_initial == o.has_initial;
  }
};

struct TraceVar {
  std::string name;  // '.'-joined hierarchical name
  std::string id;
  uint32_t width;
  std::string type = "wire";
};

class Trace {
 public:
  std::string timescale = "1ns";
  std::vector<TraceVar> vars;             // declaration order
  std::vector<SignalHistory> histories;   // parallel to vars
  uint64_t end_time = 0;

  // Adds a var with a fresh id code; returns its index.
  size_t add_var(const std::string& name, uint32_t width, const std::string& type = "wire");
  std::optional<size_t> find(const std::string& name) const;
  const SignalHistory& history(const std::string& name) const;  // throws on unknown
  void reindex();

  // Equality of the Trace model: id codes are not compared.
  bool equivalent(const Trace& o) const;

 private:
  std::unordered_map<std::string, size_t> index_;
};

std::string vcd_id_code(size_t index);

Trace parse_vcd(std::istream& in, const std::string& file = "<vcd>");
Trace parse_vcd(const std::string& text, const std::string& file = "<vcd>");
Trace parse_vcd_file(const std::string& path);
void write_vcd(const Trace& t, std::ostream& out);
std::string write_vcd(const Trace& t);

struct ChangeCount {
  uint64_t count = 0;
  bool has_unknown = false;
  bool has_highz = false;
};

ChangeCount change_count(const SignalHistory& h);
ChangeCount change_count(const Trace& t, const std::string& name);

}  // namespace hive
