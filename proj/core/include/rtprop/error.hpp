#pragma once

#include <stdexcept>
#include <string>

namespace rtprop {

/// Machine-readable failure categories, mirrored in CLI exit codes.
enum class ErrorCategory { validation, infeasible, not_converged, io };

const char* to_string(ErrorCategory c);

/// Exit code contract: 0 success, 2 validation, 3 infeasible,
/// 4 not_converged, 5 io.
int exit_code(ErrorCategory c);

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& message)
      : std::runtime_error(message), category_(category) {}

  ErrorCategory category() const { return category_; }

 private:
  ErrorCategory category_;
};

}  // namespace rtprop
