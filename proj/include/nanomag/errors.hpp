#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nanomag {

// Exit codes used by the CLI, one per error class.
enum class ExitCode : int {
  ok = 0,
  generic = 1,
  invalid_input = 2,
  empty_sector = 3,
  budget_exceeded = 4,
  sector_mismatch = 5,
  no_convergence = 6,
  ambiguous_multiplet = 7,
  subset_too_large = 8,
  tolerance_failure = 9,
};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual ExitCode exit_code() const noexcept { return ExitCode::generic; }
};

class InvalidInput : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::invalid_input; }
};

class EmptySector : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::empty_sector; }
};

class BudgetExceeded : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::budget_exceeded; }
};

class SectorMismatch : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::sector_mismatch; }
};

class NoConvergence : public Error {
 public:
  NoConvergence(const std::string& what, std::size_t iterations, double best_residual)
      : Error(what), iterations_(iterations), best_residual_(best_residual) {}
  ExitCode exit_code() const noexcept override { return ExitCode::no_convergence; }
  std::size_t iterations() const noexcept { return iterations_; }
  double best_residual() const noexcept { return best_residual_; }

 private:
  std::size_t iterations_;
  double best_residual_;
};

class AmbiguousMultiplet : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::ambiguous_multiplet; }
};

class SubsetTooLarge : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::subset_too_large; }
};

}  // namespace nanomag
