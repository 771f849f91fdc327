#pragma once

#include <stdexcept>
#include <string>

namespace ipg {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The partial eigensolver ran out of its matrix-vector budget.
class EigenSolverError : public Error {
 public:
  EigenSolverError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

// A projection oracle failed; carries the rank at which it happened.
class ProjectionError : public Error {
 public:
  ProjectionError(const std::string& what, int rank, double residual)
      : Error(what), rank_(rank), residual_(residual) {}
  int rank() const noexcept { return rank_; }
  double residual() const noexcept { return residual_; }

 private:
  int rank_;
  double residual_;
};

}  // namespace ipg
