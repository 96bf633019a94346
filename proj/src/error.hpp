#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace ccr {

/// Base error for the library. Route lookups that can fail in normal
/// operation use status enums instead; exceptions are for contract and
/// configuration violations.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input text was not valid JSON at all.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// A configuration document (or argument acting as one) violated its schema.
/// Carries the offending key path so front-ends can name it.
class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& message)
      : Error("config error at " + key + ": " + message), key_(std::move(key)) {}

  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

}  // namespace ccr
