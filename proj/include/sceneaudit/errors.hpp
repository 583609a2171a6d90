#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sceneaudit {

/// Base class for all errors thrown by this library.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A domain invariant was violated while constructing a value.
class ValidationError : public Error {
public:
  explicit ValidationError(const std::string& what) : Error(what) {}
};

/// A configuration key or value is invalid. `key()` names the offending key.
class ConfigError : public Error {
public:
  ConfigError(const std::string& what, std::string key = "")
      : Error(key.empty() ? what : what + " (key: " + key + ")"), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

private:
  std::string key_;
};

/// Too few samples to fit a learned distribution.
class UnderFitError : public Error {
public:
  UnderFitError(const std::string& what, std::size_t sample_count, std::size_t min_samples)
      : Error(what + " (got " + std::to_string(sample_count) + " samples, need " +
              std::to_string(min_samples) + ")"),
        sample_count_(sample_count),
        min_samples_(min_samples) {}
  std::size_t sample_count() const { return sample_count_; }
  std::size_t min_samples() const { return min_samples_; }

private:
  std::size_t sample_count_;
  std::size_t min_samples_;
};

/// A file could not be parsed, or its format version is unsupported.
class FormatError : public Error {
public:
  explicit FormatError(const std::string& what) : Error(what) {}
};

/// Filesystem-level failure (unreadable input, unwritable output).
class IoError : public Error {
public:
  explicit IoError(const std::string& what) : Error(what) {}
};

/// Graph compilation or scoring failure (e.g. a feature with no fitted distribution).
class EngineError : public Error {
public:
  explicit EngineError(const std::string& what) : Error(what) {}
};

}  // namespace sceneaudit
