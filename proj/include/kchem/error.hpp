#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace kchem {

//! Bad argument to a library call (wrong sizes, negative elapsed time, ...).
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

//! Non-finite or otherwise invalid evaluation of a model ingredient.
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

//! Signal history queried outside its recorded time range.
class HistoryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

//! Phase-space mass left the internal-state grid box.
class SupportOverflowError : public std::runtime_error {
 public:
  SupportOverflowError(std::string boundary, double escaped, double total)
      : std::runtime_error("support overflow across " + boundary + " boundary: escaped mass "
                           + std::to_string(escaped) + " of " + std::to_string(total)),
        boundary_(std::move(boundary)), escaped_(escaped), total_(total) {}
  const std::string& boundary() const { return boundary_; }
  double escaped() const { return escaped_; }
  double total() const { return total_; }

 private:
  std::string boundary_;
  double escaped_ = 0.0;
  double total_ = 0.0;
};

//! Agent turning rate exceeded the thinning bound.
class ThinningBoundError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ErrorCode {
  missing_field,
  kernel_normalization,
  positivity,
  support_too_wide,
  parse_error,
  invalid_value
};

const char* to_string(ErrorCode code);

struct ConfigIssue {
  ErrorCode code;
  std::string field;
  std::string reason;
};

//! One or more configuration problems, each tagged with a code and field path.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<ConfigIssue> issues);
  ConfigError(ErrorCode code, std::string field, std::string reason)
      : ConfigError(std::vector<ConfigIssue>{{code, std::move(field), std::move(reason)}}) {}

  const std::vector<ConfigIssue>& issues() const { return issues_; }
  ErrorCode code() const { return issues_.front().code; }

 private:
  std::vector<ConfigIssue> issues_;
};

}  // namespace kchem
