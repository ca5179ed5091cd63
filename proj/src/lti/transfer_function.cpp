#include "niform/lti/transfer_function.hpp"

#include <cmath>

#include "niform/error.hpp"

namespace niform {

PoleOnAxisError::PoleOnAxisError(double omega, double magnitude)
    : Error("pole on the imaginary axis near omega=" + std::to_string(omega) +
            " (|den|=" + std::to_string(magnitude) + ")"),
      omega_(omega) {}

ScenarioError::ScenarioError(std::string field, const std::string& what)
    : Error(field + ": " + what), field_(std::move(field)) {}

}  // namespace niform

namespace niform::lti {

TransferFunction::TransferFunction(poly::Coeffs numerator, poly::Coeffs denominator,
                                   std::string label)
    : num_(poly::trim(std::move(numerator))),
      den_(poly::trim(std::move(denominator))),
      label_(std::move(label)) {
  for (double c : num_)
    if (!std::isfinite(c)) throw Error("transfer function '" + label_ + "': non-finite numerator");
  for (double c : den_)
    if (!std::isfinite(c)) throw Error("transfer function '" + label_ + "': non-finite denominator");
  if (den_.size() == 1 && den_[0] == 0.0)
    throw Error("transfer function '" + label_ + "': zero denominator");
}

TransferFunction TransferFunction::gain(double k, std::string label) {
  return TransferFunction({k}, {1.0}, std::move(label));
}

TransferFunction TransferFunction::differentiator(double k, std::string label) {
  return TransferFunction({k, 0.0}, {1.0}, std::move(label));
}

Complex TransferFunction::at(Complex s) const {
  return poly::eval(num_, s) / poly::eval(den_, s);
}

double TransferFunction::high_frequency_gain() const {
  if (!is_proper()) return std::copysign(INFINITY, num_[0] / den_[0]);
  if (num_degree() < den_degree()) return 0.0;
  return num_[0] / den_[0];
}

TransferFunction TransferFunction::operator+(const TransferFunction& other) const {
  return TransferFunction(poly::add(poly::mul(num_, other.den_), poly::mul(other.num_, den_)),
                          poly::mul(den_, other.den_), label_ + "+" + other.label_);
}

TransferFunction TransferFunction::operator*(const TransferFunction& other) const {
  return TransferFunction(poly::mul(num_, other.num_), poly::mul(den_, other.den_),
                          label_ + "*" + other.label_);
}

TransferFunction TransferFunction::with_label(std::string label) const {
  TransferFunction copy(*this);
  copy.label_ = std::move(label);
  return copy;
}

}  // namespace niform::lti
