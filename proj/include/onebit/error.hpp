#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace onebit {

enum class Errc {
  InvalidParameter,
  InvalidInput,
  DegenerateChannel,
  Infeasible,
  SingularChannel,
  ComplexityCap,
  DimensionMismatch,
  Io,
};

constexpr std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::InvalidParameter: return "invalid-parameter";
    case Errc::InvalidInput: return "invalid-input";
    case Errc::DegenerateChannel: return "degenerate-channel";
    case Errc::Infeasible: return "infeasible";
    case Errc::SingularChannel: return "singular-channel";
    case Errc::ComplexityCap: return "complexity-cap";
    case Errc::DimensionMismatch: return "dimension-mismatch";
    case Errc::Io: return "io";
  }
  return "unknown";
}

/// Every failure raised by the library carries one of the codes above so
/// callers (and the CLI) can report it in machine-readable form.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

namespace detail {

inline void require(bool ok, Errc code, const char* what) {
  if (!ok) throw Error(code, what);
}

}  // namespace detail
}  // namespace onebit
