#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace hive {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Source position is 1-based; column 0 means "whole line".
class ParseError : public Error {
 public:
  ParseError(std::string file, int line, int col, const std::string& msg);
  int line() const { return line_; }
  int column() const { return col_; }
  const std::string& file() const { return file_; }

 private:
  std::string file_;
  int line_;
  int col_;
};

class UndeclaredSignal : public Error {
 public:
  UndeclaredSignal(std::string name, const std::string& where);
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

class WidthMismatch : public Error {
 public:
  using Error::Error;
};

class CombinationalCycle : public Error {
 public:
  explicit CombinationalCycle(std::vector<std::string> cycle);
  const std::vector<std::string>& cycle() const { return cycle_; }

 private:
  std::vector<std::string> cycle_;
};

}  // namespace hive
