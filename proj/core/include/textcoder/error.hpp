#pragma once

#include <stdexcept>
#include <string>

namespace textcoder {

// Base for every error the library raises. Callers that only care about
// "something went wrong" catch this; the CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed task suite, label collision, bad gate reference.
class SchemaError : public Error {
 public:
  using Error::Error;
};

// Missing file, missing auth variable, unknown pricing, invalid option.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A caller broke an operation's stated precondition.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// Non-retryable 4xx or an unparseable response body.
class RequestError : public Error {
 public:
  RequestError(int status, const std::string& what) : Error(what), status_(status) {}
  int status() const noexcept { return status_; }

 private:
  int status_;
};

// Retries exhausted; status is the last one observed (0 = connection failure).
class TransportError : public Error {
 public:
  TransportError(int status, const std::string& what) : Error(what), status_(status) {}
  int status() const noexcept { return status_; }

 private:
  int status_;
};

}  // namespace textcoder
