#pragma once

#include <stdexcept>
#include <string>

namespace marknav {

// Error categories map 1:1 onto CLI exit codes (see exit_code()).
enum class Errc {
  config = 2,
  io = 3,
  no_path = 4,
  infeasible_coverage = 5,
  coverage_violation = 5,
  lost_localization = 6,
  collision = 7,
  invalid_pose = 8,
  invalid_endpoint = 8,
  unknown_marker = 9,
  unusable_scan = 10,
  no_fix = 11,
  degenerate_input = 12,
  internal = 13,
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const { return code_; }
  int exit_code() const { return static_cast<int>(code_); }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

}  // namespace marknav
