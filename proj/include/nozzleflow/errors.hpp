#pragma once

#include <stdexcept>
#include <string>

namespace nozzleflow {

// Argument outside the domain of a gas-dynamic relation (e.g. s <= B0,
// supersonic momentum on the subsonic branch).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A well-posed computation that could not be completed numerically
// (bracket failure, factorization failure, integration drift).
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid user input: geometry, configuration, file contents.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace nozzleflow
