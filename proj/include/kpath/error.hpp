#pragma once

#include <stdexcept>
#include <string>

namespace kpath {

// Data or validation failure raised by any module. The CLI maps it to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

[[noreturn]] inline void fail(const std::string& msg) { throw Error(msg); }

}  // namespace kpath
