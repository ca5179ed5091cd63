#pragma once

#include <complex>
#include <string>
#include <vector>

#include "niform/lti/polynomial.hpp"

namespace niform::lti {

using Complex = std::complex<double>;

/**
 * Rational SISO transfer function num(s)/den(s), coefficients in descending
 * powers. Improper ratios are representable (the pure differentiator is
 * needed for the prediction term); discretization requires a proper one.
 */
class TransferFunction {
 public:
  TransferFunction(poly::Coeffs numerator, poly::Coeffs denominator,
                   std::string label = {});

  static TransferFunction gain(double k, std::string label = {});
  // k·s
  static TransferFunction differentiator(double k, std::string label = {});

  const poly::Coeffs& numerator() const { return num_; }
  const poly::Coeffs& denominator() const { return den_; }
  const std::string& label() const { return label_; }

  int num_degree() const { return static_cast<int>(num_.size()) - 1; }
  int den_degree() const { return static_cast<int>(den_.size()) - 1; }
  int relative_degree() const { return den_degree() - num_degree(); }
  bool is_proper() const { return num_degree() <= den_degree(); }
  bool is_strictly_proper() const { return num_degree() < den_degree() || is_zero(); }
  bool is_zero() const { return num_.size() == 1 && num_[0] == 0.0; }

  // Raw rational evaluation at an arbitrary complex point (no floor check).
  Complex at(Complex s) const;

  // Limit as |s| → ∞ along the imaginary axis; only meaningful when proper.
  double high_frequency_gain() const;

  std::vector<Complex> poles() const { return poly::roots(den_); }
  std::vector<Complex> zeros() const { return poly::roots(num_); }

  // Parallel (summing) and series connections.
  TransferFunction operator+(const TransferFunction& other) const;
  TransferFunction operator*(const TransferFunction& other) const;

  TransferFunction with_label(std::string label) const;

 private:
  poly::Coeffs num_;
  poly::Coeffs den_;
  std::string label_;
};

}  // namespace niform::lti
