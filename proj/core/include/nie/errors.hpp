#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace nie {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  explicit ParseError(const std::string& what) : Error(what), line_(0) {}

  /// 1-based line number, or 0 when the error is not tied to a line.
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

class InvalidParameter : public Error {
 public:
  using Error::Error;
};

/// The exact oracle refuses graphs whose world count it cannot enumerate.
class OracleRefusal : public Error {
 public:
  using Error::Error;
};

/// A model, dataset, or cache was built for a different graph.
class FingerprintMismatch : public Error {
 public:
  using Error::Error;
};

class VersionMismatch : public Error {
 public:
  using Error::Error;
};

class TrainingDiverged : public Error {
 public:
  TrainingDiverged(int epoch, const std::string& what)
      : Error("training diverged at epoch " + std::to_string(epoch) + ": " + what),
        epoch_(epoch) {}
  int epoch() const noexcept { return epoch_; }

 private:
  int epoch_;
};

/// An estimator threw while scoring a candidate true seed.
class EstimatorFailure : public Error {
 public:
  EstimatorFailure(std::uint32_t candidate, const std::string& what)
      : Error("estimator failed on candidate " + std::to_string(candidate) + ": " + what),
        candidate_(candidate) {}
  std::uint32_t candidate() const noexcept { return candidate_; }

 private:
  std::uint32_t candidate_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace nie
