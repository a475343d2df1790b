#include "hive/rank.hpp"

#include "hive/error.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>

namespace hive {

using json = nlohmann::json;

RankedSignals signal_ranking(const Trace& t, uint32_t tau) {
  RankedSignals r;
  r.tau = tau;
  for (auto& h : t.histories) {
    ChangeCount c = change_count(h);
    r.signals.push_back({h.signal, c.count, c.has_unknown, c.has_highz});
  }
  std::sort(r.signals.begin(), r.signals.end(), [](const RankedSignal& a, const RankedSignal& b) {
    if (a.unknown != b.unknown) return !a.unknown;
    if (!a.unknown && a.count != b.count) return a.count < b.count;
    return a.name < b.name;
  });
  return r;
}

Bucket bucket_of(const RankedSignal& s, uint32_t tau) {
  if (s.unknown) return Bucket::Unknown;
  if (s.count <= 1) return Bucket::Once;
  if (s.count <= tau) return Bucket::UpToTau;
  return Bucket::AboveTau;
}

const char* bucket_name(Bucket b) {
  switch (b) {
    case Bucket::Once: return "freq=1";
    case Bucket::UpToTau: return "freq<=tau";
    case Bucket::AboveTau: return "freq>tau";
    case Bucket::Unknown: return "unknown";
  }
  return "?";
}

BucketStats bucketize(const RankedSignals& r, uint32_t tau) {
  if (tau < 1) throw Error("tau must be >= 1");
  BucketStats s;
  s.total = r.signals.size();
  for (auto& sig : r.signals) s.counts[static_cast<size_t>(bucket_of(sig, tau))]++;
  for (size_t i = 0; i < 4; ++i) s.percent[i] = s.total ? 100.0 * s.counts[i] / s.total : 0.0;
  return s;
}

std::string write_rank_report(const RankedSignals& r) {
  json j;
  j["tau"] = r.tau;
  json sigs = json::array();
  for (auto& s : r.signals)
    sigs.push_back({{"name", s.name},
                    {"count", s.count},
                    {"bucket", bucket_name(bucket_of(s, r.tau))},
                    {"unknown", s.unknown},
                    {"highz", s.highz}});
  j["signals"] = sigs;
  return j.dump(2) + "\n";
}

RankedSignals read_rank_report(const std::string& json_text) {
  json j = json::parse(json_text);
  RankedSignals r;
  r.tau = j.at("tau").get<uint32_t>();
  for (auto& s : j.at("signals"))
    r.signals.push_back({s.at("name"), s.at("count"), s.value("unknown", false), s.value("highz", false)});
  return r;
}

}  // namespace hive
