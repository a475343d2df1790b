#pragma once

#include <boost/container/small_vector.hpp>

#include <cstdint>
#include <string>
#include <string_view>

namespace hive {

// Fixed-width two-state bit-vector. Bits above `width` are always zero.
class BitVec {
 public:
  BitVec() : BitVec(1) {}
  explicit BitVec(uint32_t width, uint64_t value = 0);

  static BitVec ones(uint32_t width);
  // Accepts "8'hFF", "3'b010", "4'd9"; `x`/`z` digits are rejected here.
  static BitVec parse_sized(std::string_view text);
  static BitVec from_binary(std::string_view bits);  // MSB first, width = size
  static BitVec from_hex(std::string_view hex, uint32_t width);

  uint32_t width() const { return width_; }
  bool bit(uint32_t i) const { return (words_[i / 64] >> (i % 64)) & 1u; }
  void set_bit(uint32_t i, bool v);
  uint64_t to_u64() const { return words_[0]; }
  bool fits_u64() const;
  bool is_zero() const;
  bool is_ones() const;

  std::string to_binary() const;  // MSB first
  std::string to_hex() const;     // no prefix, ceil(width/4) digits
  // Sized literal in HNL syntax, e.g. "4'b0011" or "16'h00ff".
  std::string to_literal() const;

  BitVec operator~() const;
  BitVec operator&(const BitVec& o) const;
  BitVec operator|(const BitVec& o) const;
  BitVec operator^(const BitVec& o) const;
  BitVec operator+(const BitVec& o) const;
  BitVec operator-(const BitVec& o) const;
  BitVec operator*(const BitVec& o) const;
  bool ult(const BitVec& o) const;
  BitVec concat(const BitVec& low) const;  // this is the high part
  BitVec extract(uint32_t hi, uint32_t lo) const;
  BitVec resize(uint32_t width) const;      // zero-extend or truncate

  bool operator==(const BitVec& o) const;
  bool operator!=(const BitVec& o) const { return !(*this == o); }
  bool operator<(const BitVec& o) const;  // width first, then value
  size_t hash() const;

  size_t num_words() const { return words_.size(); }
  uint64_t word(size_t i) const { return words_[i]; }

 private:
  void mask_top();
  uint32_t width_;
  boost::container::small_vector<uint64_t, 1> words_;
};

struct BitVecHash {
  size_t operator()(const BitVec& b) const { return b.hash(); }
};

// Four-state value: each bit is 0, 1, X or Z.
// Invariant: z ⊆ unk, and val bits are zero wherever unk is set.
class LogicValue {
 public:
  LogicValue() : LogicValue(1) {}
  explicit LogicValue(uint32_t width);  // all X
  LogicValue(const BitVec& known);      // NOLINT: implicit from two-state
  static LogicValue all_x(uint32_t width) { return LogicValue(width); }
  static LogicValue all_z(uint32_t width);
  // Characters 0/1/x/z (either case), MSB first.
  static LogicValue from_string(std::string_view s);

  uint32_t width() const { return val_.width(); }
  bool is_known() const { return unk_.is_zero(); }
  bool has_x() const;  // any X bit (Z excluded)
  bool has_z() const { return !z_.is_zero(); }
  const BitVec& known() const { return val_; }  // meaningful iff is_known()
  const BitVec& unknown_mask() const { return unk_; }
  const BitVec& z_mask() const { return z_; }
  char bit_char(uint32_t i) const;
  void set_bit(uint32_t i, char c);
  std::string to_string() const;  // MSB first, 0/1/x/z

  bool operator==(const LogicValue& o) const;
  bool operator!=(const LogicValue& o) const { return !(*this == o); }

 private:
  BitVec val_, unk_, z_;
};

}  // namespace hive
