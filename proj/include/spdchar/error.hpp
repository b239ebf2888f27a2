#pragma once

#include <stdexcept>
#include <string>

namespace spdchar {

// Every recoverable failure in the library surfaces as this exception type.
// `code` is a short machine-readable tag (e.g. "dimension_mismatch").
class Error : public std::runtime_error {
public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

private:
  std::string code_;
};

}  // namespace spdchar
