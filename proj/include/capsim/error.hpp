#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace capsim {

/// Error with a stable machine-readable code ("infeasible-density",
/// "no-eligible-relay", ...) next to the human message. The harness maps
/// codes into the per-row error column instead of aborting a sweep.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& msg)
      : std::runtime_error(code + ": " + msg), code_(std::move(code)) {}

  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

}  // namespace capsim
