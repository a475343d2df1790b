#pragma once

#include "hive/trace.hpp"

#include <array>
#include <string>
#include <vector>

namespace hive {

struct RankedSignal {
  std::string name;
  uint64_t count = 0;
  bool unknown = false;
  bool highz = false;
};

// Known signals ascending by (count, name), then unknown-flagged signals by name.
struct RankedSignals {
  std::vector<RankedSignal> signals;
  uint32_t tau = 5;
};

RankedSignals signal_ranking(const Trace& t, uint32_t tau = 5);

// Disjoint partition: count <= 1; 2..tau; > tau; unknown (overrides count).
enum class Bucket { Once = 0, UpToTau = 1, AboveTau = 2, Unknown = 3 };
Bucket bucket_of(const RankedSignal& s, uint32_t tau);
const char* bucket_name(Bucket b);

struct BucketStats {
  std::array<size_t, 4> counts{};
  std::array<double, 4> percent{};
  size_t total = 0;
};

BucketStats bucketize(const RankedSignals& r, uint32_t tau);

std::string write_rank_report(const RankedSignals& r);
RankedSignals read_rank_report(const std::string& json_text);

}  // namespace hive
