#include "hive/util.hpp"

#include "hive/error.hpp"

#include <fmt/format.h>
#include <openssl/evp.h>
#include <sys/resource.h>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace hive {

ParseError::ParseError(std::string file, int line, int col, const std::string& msg)
    : Error(col > 0 ? fmt::format("{}:{}:{}: {}", file, line, col, msg) : fmt::format("{}:{}: {}", file, line, msg)),
      file_(std::move(file)),
      line_(line),
      col_(col) {}

UndeclaredSignal::UndeclaredSignal(std::string name, const std::string& where)
    : Error(fmt::format("undeclared signal '{}'{}", name, where)), name_(std::move(name)) {}

CombinationalCycle::CombinationalCycle(std::vector<std::string> cycle)
    : Error(fmt::format("combinational cycle: {}", join(cycle, " -> "))), cycle_(std::move(cycle)) {}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(fmt::format("cannot open '{}'", path));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(fmt::format("cannot write '{}'", path));
  out << content;
  if (!out) throw Error(fmt::format("write to '{}' failed", path));
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

bool starts_with(const std::string& s, const std::string& prefix) { return s.rfind(prefix, 0) == 0; }

uint32_t log2_exact(uint32_t v) {
  if (v < 2 || (v & (v - 1))) throw Error(fmt::format("{} is not a power of two >= 2", v));
  uint32_t r = 0;
  while ((1u << r) < v) ++r;
  return r;
}

uint32_t bits_for(uint64_t n) {
  uint32_t w = 1;
  while (w < 64 && (uint64_t{1} << w) < n) ++w;
  return w;
}

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr)) throw Error("sha256 failed");
  std::string out;
  for (unsigned i = 0; i < len; ++i) out += fmt::format("{:02x}", md[i]);
  return out;
}

long peak_rss_self_kib() {
  rusage u{};
  getrusage(RUSAGE_SELF, &u);
  return u.ru_maxrss;
}

long peak_rss_children_kib() {
  rusage u{};
  getrusage(RUSAGE_CHILDREN, &u);
  return u.ru_maxrss;
}

}  // namespace hive
