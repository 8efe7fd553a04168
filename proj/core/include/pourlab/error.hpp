#ifndef POURLAB_ERROR_HPP_
#define POURLAB_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace pourlab {

// Error taxonomy. The CLI maps these onto exit codes:
//   UsageError -> 2, ConfigError -> 3, everything else -> 4.

class UsageError : public std::logic_error {
 public:
  explicit UsageError(const std::string& what) : std::logic_error(what) {}
};

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& field, const std::string& reason)
      : std::runtime_error("config error: " + field + ": " + reason),
        field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed file content (policy artifact, labels file, manifest).
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& field, const std::string& reason)
      : std::runtime_error("format error: " + field + ": " + reason),
        field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

}  // namespace pourlab

#endif  // POURLAB_ERROR_HPP_
