#pragma once

#include <stdexcept>
#include <string>

namespace niform {

// Base for every error the library raises on bad input or bad numerics.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// |den(jω)| fell below the configured floor.
class PoleOnAxisError : public Error {
 public:
  PoleOnAxisError(double omega, double magnitude);
  double omega() const { return omega_; }

 private:
  double omega_;
};

// DC gain requested for a transfer function with a pole at s = 0.
class IntegratorError : public Error {
 public:
  using Error::Error;
};

class TopologyError : public Error {
 public:
  using Error::Error;
};

// Schema or value problem in a scenario / model file. `field` is a JSON
// pointer-like path to the offending entry.
class ScenarioError : public Error {
 public:
  ScenarioError(std::string field, const std::string& what);
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

// Non-finite state during simulation.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace niform
