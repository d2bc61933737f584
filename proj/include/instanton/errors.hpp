#pragma once

#include <stdexcept>
#include <string>

namespace instanton {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Reduced Laplacian is not positive definite (disconnected network).
class SingularMatrix : public Error {
 public:
  using Error::Error;
};

class UnbalancedInjection : public Error {
 public:
  using Error::Error;
};

/// Cost evaluated outside its domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// The equilibrium renewable output is not strictly inside the feasibility polytope.
class EquilibriumInfeasible : public Error {
 public:
  using Error::Error;
};

/// Every facet subproblem of a scan is empty.
class AllInfeasible : public Error {
 public:
  using Error::Error;
};

class InvalidSpec : public Error {
 public:
  using Error::Error;
};

class CannotPlaceFeasibly : public Error {
 public:
  using Error::Error;
};

}  // namespace instanton
