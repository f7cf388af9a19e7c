#pragma once

#include <stdexcept>
#include <string>

namespace mfusion {

enum class Errc {
  invalid_argument,  // caller passed a value outside the documented domain
  io,                // filesystem failure
  format,            // malformed or corrupt file contents
  dimension,         // shape mismatch between operands
  numeric,           // non-finite data or a degenerate numerical problem
  unsupported,       // valid request the library deliberately does not handle
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

inline void require(bool ok, Errc code, const std::string& what) {
  if (!ok) fail(code, what);
}

}  // namespace mfusion
