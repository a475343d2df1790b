#include "hive/error.hpp"
#include "hive/netlist.hpp"
#include "hive/util.hpp"

#include <fmt/format.h>

#include <cctype>
#include <sstream>

namespace hive {

std::vector<BitVec> parse_memory_image(const std::string& text, uint32_t width, uint32_t depth, const std::string& file) {
  std::vector<BitVec> words(depth, BitVec(width));
  std::istringstream in(text);
  std::string line;
  uint64_t addr = 0;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto c = line.find("//"); c != std::string::npos) line.resize(c);
    if (auto c = line.find('#'); c != std::string::npos) line.resize(c);
    std::istringstream toks(line);
    std::string tok;
    while (toks >> tok) {
      if (tok[0] == '@') {
        std::string a = tok.substr(1);
        if (a.empty() || a.size() > 8 || a.find_first_not_of("0123456789abcdefABCDEF") != std::string::npos)
          throw ParseError(file, line_no, 0, fmt::format("malformed address '{}'", tok));
        addr = std::stoull(a, nullptr, 16);
        continue;
      }
      if (addr >= depth)
        throw Error(fmt::format("{}:{}: image too large: word at address {} exceeds depth {}", file, line_no, addr, depth));
      try {
        words[addr] = BitVec::from_hex(tok, width);
      } catch (const Error& e) {
        throw ParseError(file, line_no, 0, e.what());
      }
      ++addr;
    }
  }
  return words;
}

void load_memory_image(FlatDesign& f, const std::string& mem, const std::string& image_path) {
  auto& m = f.memories.at(f.memory_id(mem));
  m.init = parse_memory_image(read_file(image_path), m.width, m.depth, image_path);
  m.image = image_path;
}

}  // namespace hive
