#pragma once

#include <stdexcept>
#include <string>

namespace hmnet {

enum class ErrorKind {
  Dimension,     // operand shapes disagree
  Length,        // sequence too short for the operation
  Parse,         // malformed input file
  Config,        // invalid or inconsistent configuration
  Mode,          // operation called in the wrong train/inference mode
  Count,         // invalid count argument (K, scenes, ...)
  Horizon,       // invalid prediction horizon
  Validity,      // distribution parameters outside their domain
  Io,            // file system failure
  Internal,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void raise(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace hmnet
