#pragma once

#include <stdexcept>
#include <string>

namespace agglomer {

// Exit-code classes used by the CLI: validation problems map to 2,
// estimation failures to 3.
enum class ErrorKind {
  Validation,
  Estimation,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string code, const std::string& message)
      : std::runtime_error(code + ": " + message), kind_(kind), code_(std::move(code)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& code() const noexcept { return code_; }

 private:
  ErrorKind kind_;
  std::string code_;
};

inline Error validation_error(std::string code, const std::string& message) {
  return Error(ErrorKind::Validation, std::move(code), message);
}

inline Error estimation_error(std::string code, const std::string& message) {
  return Error(ErrorKind::Estimation, std::move(code), message);
}

}  // namespace agglomer
