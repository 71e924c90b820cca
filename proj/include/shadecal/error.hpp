#pragma once

#include <stdexcept>
#include <string>

namespace shadecal {

enum class ErrorKind {
  InvalidInput,  // malformed or unreadable input
  Parse,         // file content does not parse
  Domain,        // well-formed input the math cannot use (empty mask, short dataset)
  Fit,           // numerical fit cannot proceed
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace shadecal
