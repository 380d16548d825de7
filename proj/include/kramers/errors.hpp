#pragma once

#include <stdexcept>
#include <string>

#include "kramers/types.hpp"

namespace kramers {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// bad arguments: wrong dimension, out of range parameters
class InputError : public Error {
 public:
  using Error::Error;
};

// landscape is not a double well
class StructuralError : public Error {
 public:
  using Error::Error;
};

class SpectralError : public Error {
 public:
  using Error::Error;
};

class ClassificationError : public Error {
 public:
  using Error::Error;
};

class ResolutionError : public Error {
 public:
  using Error::Error;
};

class AccuracyError : public Error {
 public:
  using Error::Error;
};

class EstimationError : public Error {
 public:
  using Error::Error;
};

class StabilityError : public Error {
 public:
  using Error::Error;
};

class ConstructionError : public Error {
 public:
  using Error::Error;
};

class ContractError : public Error {
 public:
  using Error::Error;
};

// carries the state that went non-finite or escaped the guard
class NumericalBlowUp : public Error {
 public:
  NumericalBlowUp(const std::string& what, PhaseState state)
      : Error(what), state_(std::move(state)) {}
  const PhaseState& state() const { return state_; }

 private:
  PhaseState state_;
};

// malformed configuration; the cli maps this to exit code 2
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace kramers
