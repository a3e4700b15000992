#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dilemma {

/// Base class for all domain errors raised by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// games
class AdmissibilityViolation : public Error {
 public:
  using Error::Error;
};
class TieError : public Error {
 public:
  using Error::Error;
};
class NonPositiveScale : public Error {
 public:
  using Error::Error;
};
class ContributionOutOfRange : public Error {
 public:
  using Error::Error;
};
class ArityMismatch : public Error {
 public:
  using Error::Error;
};

// scenarios
class CorpusCorrupt : public Error {
 public:
  using Error::Error;
};
class UnknownScenario : public Error {
 public:
  using Error::Error;
};

// agents
class HttpError : public Error {
 public:
  using Error::Error;
};
class TimeoutError : public Error {
 public:
  using Error::Error;
};

// runner
class ConfigError : public Error {
 public:
  using Error::Error;
};
class StorageError : public Error {
 public:
  using Error::Error;
};
class AbortedRun : public Error {
 public:
  using Error::Error;
};
class ManifestMismatch : public Error {
 public:
  using Error::Error;
};

/// Raised when a trial log fails to parse; carries the 1-based line number.
class LogCorrupt : public Error {
 public:
  LogCorrupt(std::size_t line, const std::string& what)
      : Error("trial log line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// dataset
class MalformedFile : public Error {
 public:
  using Error::Error;
};
class UnresolvableScenario : public Error {
 public:
  using Error::Error;
};

// stats
class EmptySample : public Error {
 public:
  using Error::Error;
};
class DegeneratePool : public Error {
 public:
  using Error::Error;
};
class ScenarioMismatch : public Error {
 public:
  using Error::Error;
};

}  // namespace dilemma
