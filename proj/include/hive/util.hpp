#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <vector>

namespace hive {

std::string read_file(const std::string& path);
// Creates parent directories.
void write_file(const std::string& path, const std::string& content);
std::string join(const std::vector<std::string>& parts, const std::string& sep);
std::vector<std::string> split(const std::string& s, char sep);
std::string trim(const std::string& s);
bool starts_with(const std::string& s, const std::string& prefix);
// Throws unless v is a power of two >= 2.
uint32_t log2_exact(uint32_t v);
uint32_t bits_for(uint64_t n);  // minimum width able to hold n distinct values, >= 1
std::string sha256_hex(const std::string& data);

// Peak resident set size of this process and of waited-for children, in KiB.
long peak_rss_self_kib();
long peak_rss_children_kib();

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace hive
