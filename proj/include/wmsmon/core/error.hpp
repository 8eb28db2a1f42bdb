#pragma once

#include <stdexcept>
#include <string>

namespace wmsmon {

/// Exception carrying a module-specific error kind.
///
/// Each module declares an `enum class` of its failure modes and aliases
/// `Error<ThatEnum>`, so callers can catch by module and switch on `kind()`.
template <typename Kind>
class Error : public std::runtime_error {
 public:
  Error(Kind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

}  // namespace wmsmon
