#pragma once

#include <stdexcept>
#include <string>

namespace homax {

/// Process exit codes used by the command-line front end.
enum class ExitCode : int {
  ok = 0,
  parameter = 1,
  divergence = 2,
  io = 3,
};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual ExitCode code() const noexcept = 0;
};

/// Malformed input: bad mesh size, unsupported derivative order, NaN parameters.
class ParameterError : public Error {
 public:
  using Error::Error;
  ExitCode code() const noexcept override { return ExitCode::parameter; }
};

/// Parameters outside the admissible region (J, I, or the operator's case set).
class RegionError : public Error {
 public:
  using Error::Error;
  ExitCode code() const noexcept override { return ExitCode::parameter; }
};

/// Iteration failed to contract or a limit failed to exist.
class DivergenceError : public Error {
 public:
  using Error::Error;
  ExitCode code() const noexcept override { return ExitCode::divergence; }
};

class IoError : public Error {
 public:
  using Error::Error;
  ExitCode code() const noexcept override { return ExitCode::io; }
};

}  // namespace homax
