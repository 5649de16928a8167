#pragma once

#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Core>

namespace msopt {

enum class ErrorKind {
  kInvalidInput,
  kOutOfDomain,
  kNumericFailure,
  kInapplicable,
  kUndefinedMetric,
  kIo,
};

const char* to_string(ErrorKind kind);

/// Base class for every error raised by the library. The kind is stable and
/// is what callers (and the CLI exit-code mapping) should switch on.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class InvalidInput : public Error {
 public:
  explicit InvalidInput(const std::string& what)
      : Error(ErrorKind::kInvalidInput, what) {}
};

class OutOfDomain : public Error {
 public:
  explicit OutOfDomain(const std::string& what)
      : Error(ErrorKind::kOutOfDomain, what) {}
};

class Inapplicable : public Error {
 public:
  explicit Inapplicable(const std::string& what)
      : Error(ErrorKind::kInapplicable, what) {}
};

class UndefinedMetric : public Error {
 public:
  explicit UndefinedMetric(const std::string& what)
      : Error(ErrorKind::kUndefinedMetric, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::kIo, what) {}
};

/// A non-finite value appeared during an iteration. Carries the iterate that
/// produced it and, when known, where in a multiscale run it happened.
class NumericFailure : public Error {
 public:
  NumericFailure(const std::string& what, Eigen::VectorXd snapshot,
                 int scale = 0, int iteration = 0)
      : Error(ErrorKind::kNumericFailure, what),
        snapshot_(std::move(snapshot)),
        scale_(scale),
        iteration_(iteration) {}

  const Eigen::VectorXd& snapshot() const noexcept { return snapshot_; }
  int scale() const noexcept { return scale_; }
  int iteration() const noexcept { return iteration_; }

 private:
  Eigen::VectorXd snapshot_;
  int scale_;
  int iteration_;
};

}  // namespace msopt
