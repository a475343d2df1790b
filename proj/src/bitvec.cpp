#include "hive/bitvec.hpp"

#include "hive/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>

namespace hive {

namespace {

size_t words_for(uint32_t width) { return (width + 63) / 64; }

int hex_digit(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

BitVec::BitVec(uint32_t width, uint64_t value) : width_(width), words_(words_for(width), 0) {
  if (width == 0) throw Error("bit-vector width must be >= 1");
  words_[0] = value;
  mask_top();
}

void BitVec::mask_top() {
  uint32_t rem = width_ % 64;
  if (rem) words_.back() &= (uint64_t{1} << rem) - 1;
}

BitVec BitVec::ones(uint32_t width) {
  BitVec b(width);
  for (auto& w : b.words_) w = ~uint64_t{0};
  b.mask_top();
  return b;
}

BitVec BitVec::from_binary(std::string_view bits) {
  BitVec b(static_cast<uint32_t>(bits.size()));
  for (size_t i = 0; i < bits.size(); ++i) {
    char c = bits[bits.size() - 1 - i];
    if (c == '1')
      b.set_bit(static_cast<uint32_t>(i), true);
    else if (c != '0')
      throw Error(fmt::format("bad binary digit '{}' in \"{}\"", c, bits));
  }
  return b;
}

BitVec BitVec::from_hex(std::string_view hex, uint32_t width) {
  BitVec b(width);
  uint32_t pos = 0;
  for (size_t i = hex.size(); i-- > 0;) {
    if (hex[i] == '_') continue;
    int d = hex_digit(hex[i]);
    if (d < 0) throw Error(fmt::format("bad hex digit '{}' in \"{}\"", hex[i], hex));
    for (int k = 0; k < 4; ++k, ++pos) {
      if (!((d >> k) & 1)) continue;
      if (pos >= width) throw Error(fmt::format("hex value \"{}\" does not fit in {} bits", hex, width));
      b.set_bit(pos, true);
    }
  }
  return b;
}

BitVec BitVec::parse_sized(std::string_view text) {
  auto q = text.find('\'');
  if (q == std::string_view::npos || q == 0 || q + 2 > text.size())
    throw Error(fmt::format("malformed sized constant \"{}\"", text));
  uint64_t w = 0;
  for (char c : text.substr(0, q)) {
    if (!std::isdigit(static_cast<unsigned char>(c)))
      throw Error(fmt::format("malformed width in \"{}\"", text));
    w = w * 10 + (c - '0');
    if (w > (1u << 20)) throw Error(fmt::format("width too large in \"{}\"", text));
  }
  if (w == 0) throw Error(fmt::format("zero width in \"{}\"", text));
  char base = static_cast<char>(std::tolower(static_cast<unsigned char>(text[q + 1])));
  std::string digits;
  for (char c : text.substr(q + 2))
    if (c != '_') digits.push_back(c);
  if (digits.empty()) throw Error(fmt::format("missing digits in \"{}\"", text));
  auto width = static_cast<uint32_t>(w);
  if (base == 'h') return from_hex(digits, width);
  if (base == 'b') {
    BitVec b(width);
    for (size_t i = 0; i < digits.size(); ++i) {
      char c = digits[digits.size() - 1 - i];
      if (c != '0' && c != '1') throw Error(fmt::format("bad binary digit in \"{}\"", text));
      if (c == '1') {
        if (i >= width) throw Error(fmt::format("constant \"{}\" does not fit", text));
        b.set_bit(static_cast<uint32_t>(i), true);
      }
    }
    return b;
  }
  if (base == 'd') {
    BitVec b(width), ten(width, 10);
    BitVec limit_check(width + 4);
    for (char c : digits) {
      if (!std::isdigit(static_cast<unsigned char>(c))) throw Error(fmt::format("bad decimal digit in \"{}\"", text));
      limit_check = limit_check * BitVec(width + 4, 10) + BitVec(width + 4, static_cast<uint64_t>(c - '0'));
      if (!limit_check.extract(width + 3, width).is_zero())
        throw Error(fmt::format("constant \"{}\" does not fit", text));
    }
    return limit_check.extract(width - 1, 0);
  }
  throw Error(fmt::format("unknown base '{}' in \"{}\"", base, text));
}

void BitVec::set_bit(uint32_t i, bool v) {
  uint64_t m = uint64_t{1} << (i % 64);
  if (v)
    words_[i / 64] |= m;
  else
    words_[i / 64] &= ~m;
}

bool BitVec::fits_u64() const {
  for (size_t i = 1; i < words_.size(); ++i)
    if (words_[i]) return false;
  return true;
}

bool BitVec::is_zero() const {
  return std::all_of(words_.begin(), words_.end(), [](uint64_t w) { return w == 0; });
}

bool BitVec::is_ones() const { return *this == ones(width_); }

std::string BitVec::to_binary() const {
  std::string s(width_, '0');
  for (uint32_t i = 0; i < width_; ++i)
    if (bit(i)) s[width_ - 1 - i] = '1';
  return s;
}

std::string BitVec::to_hex() const {
  uint32_t digits = (width_ + 3) / 4;
  std::string s(digits, '0');
  for (uint32_t d = 0; d < digits; ++d) {
    int v = 0;
    for (int k = 0; k < 4; ++k) {
      uint32_t i = d * 4 + k;
      if (i < width_ && bit(i)) v |= 1 << k;
    }
    s[digits - 1 - d] = "0123456789abcdef"[v];
  }
  return s;
}

std::string BitVec::to_literal() const {
  if (width_ <= 8) return fmt::format("{}'b{}", width_, to_binary());
  return fmt::format("{}'h{}", width_, to_hex());
}

BitVec BitVec::operator~() const {
  BitVec r(*this);
  for (auto& w : r.words_) w = ~w;
  r.mask_top();
  return r;
}

#define HIVE_BITWISE(OP)                                                      \
  BitVec BitVec::operator OP(const BitVec& o) const {                         \
    if (o.width_ != width_) throw WidthMismatch("bit-vector width mismatch"); \
    BitVec r(*this);                                                          \
    for (size_t i = 0; i < words_.size(); ++i) r.words_[i] OP## = o.words_[i]; \
    return r;                                                                 \
  }
HIVE_BITWISE(&)
HIVE_BITWISE(|)
HIVE_BITWISE(^)
#undef HIVE_BITWISE

BitVec BitVec::operator+(const BitVec& o) const {
  if (o.width_ != width_) throw WidthMismatch("bit-vector width mismatch");
  BitVec r(width_);
  unsigned __int128 carry = 0;
  for (size_t i = 0; i < words_.size(); ++i) {
    unsigned __int128 s = static_cast<unsigned __int128>(words_[i]) + o.words_[i] + carry;
    r.words_[i] = static_cast<uint64_t>(s);
    carry = s >> 64;
  }
  r.mask_top();
  return r;
}

BitVec BitVec::operator-(const BitVec& o) const {
  return *this + (~o + BitVec(width_, 1));
}

BitVec BitVec::operator*(const BitVec& o) const {
  if (o.width_ != width_) throw WidthMismatch("bit-vector width mismatch");
  size_t n = words_.size();
  BitVec r(width_);
  for (size_t i = 0; i < n; ++i) {
    unsigned __int128 carry = 0;
    for (size_t j = 0; i + j < n; ++j) {
      unsigned __int128 cur = static_cast<unsigned __int128>(words_[i]) * o.words_[j] + r.words_[i + j] + carry;
      r.words_[i + j] = static_cast<uint64_t>(cur);
      carry = cur >> 64;
    }
  }
  r.mask_top();
  return r;
}

bool BitVec::ult(const BitVec& o) const {
  if (o.width_ != width_) throw WidthMismatch("bit-vector width mismatch");
  for (size_t i = words_.size(); i-- > 0;)
    if (words_[i] != o.words_[i]) return words_[i] < o.words_[i];
  return false;
}

BitVec BitVec::concat(const BitVec& low) const {
  BitVec r(width_ + low.width_);
  for (uint32_t i = 0; i < low.width_; ++i)
    if (low.bit(i)) r.set_bit(i, true);
  for (uint32_t i = 0; i < width_; ++i)
    if (bit(i)) r.set_bit(low.width_ + i, true);
  return r;
}

BitVec BitVec::extract(uint32_t hi, uint32_t lo) const {
  if (hi < lo || hi >= width_) throw WidthMismatch(fmt::format("extract [{}:{}] out of range for width {}", hi, lo, width_));
  BitVec r(hi - lo + 1);
  if (lo % 64 == 0 && r.words_.size() == 1 && width_ <= 64) {
    r.words_[0] = words_[0] >> lo;
    r.mask_top();
    return r;
  }
  for (uint32_t i = lo; i <= hi; ++i)
    if (bit(i)) r.set_bit(i - lo, true);
  return r;
}

BitVec BitVec::resize(uint32_t width) const {
  BitVec r(width);
  for (size_t i = 0; i < std::min(r.words_.size(), words_.size()); ++i) r.words_[i] = words_[i];
  r.mask_top();
  return r;
}

bool BitVec::operator==(const BitVec& o) const {
  return width_ == o.width_ && std::equal(words_.begin(), words_.end(), o.words_.begin());
}

bool BitVec::operator<(const BitVec& o) const {
  if (width_ != o.width_) return width_ < o.width_;
  return ult(o);
}

size_t BitVec::hash() const {
  size_t h = width_ * 0x9e3779b97f4a7c15ULL;
  for (uint64_t w : words_) h ^= w + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return h;
}

LogicValue::LogicValue(uint32_t width) : val_(width), unk_(BitVec::ones(width)), z_(width) {}

LogicValue::LogicValue(const BitVec& known) : val_(known), unk_(known.width()), z_(known.width()) {}

LogicValue LogicValue::all_z(uint32_t width) {
  LogicValue v(width);
  v.z_ = BitVec::ones(width);
  return v;
}

LogicValue LogicValue::from_string(std::string_view s) {
  if (s.empty()) throw Error("empty logic value");
  LogicValue v(static_cast<uint32_t>(s.size()));
  for (size_t i = 0; i < s.size(); ++i) v.set_bit(static_cast<uint32_t>(s.size() - 1 - i), s[i]);
  return v;
}

bool LogicValue::has_x() const { return !(unk_ & ~z_).is_zero(); }

char LogicValue::bit_char(uint32_t i) const {
  if (z_.bit(i)) return 'z';
  if (unk_.bit(i)) return 'x';
  return val_.bit(i) ? '1' : '0';
}

void LogicValue::set_bit(uint32_t i, char c) {
  switch (c) {
    case '0': val_.set_bit(i, false); unk_.set_bit(i, false); z_.set_bit(i, false); break;
    case '1': val_.set_bit(i, true); unk_.set_bit(i, false); z_.set_bit(i, false); break;
    case 'x': case 'X': val_.set_bit(i, false); unk_.set_bit(i, true); z_.set_bit(i, false); break;
    case 'z': case 'Z': val_.set_bit(i, false); unk_.set_bit(i, true); z_.set_bit(i, true); break;
    default: throw Error(fmt::format("bad logic digit '{}'", c));
  }
}

std::string LogicValue::to_string() const {
  std::string s(width(), '0');
  for (uint32_t i = 0; i < width(); ++i) s[width() - 1 - i] = bit_char(i);
  return s;
}

bool LogicValue::operator==(const LogicValue& o) const {
  return val_ == o.val_ && unk_ == o.unk_ && z_ == o.z_;
}

}  // namespace hive
