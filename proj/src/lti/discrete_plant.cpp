#include "niform/lti/discrete_plant.hpp"

#include <cmath>

#include "niform/error.hpp"

namespace niform::lti {

DiscretePlant::DiscretePlant(const TransferFunction& tf, double sample_time, double noise_std,
                             std::uint64_t seed)
    : h_(sample_time), noise_std_(noise_std), rng_(seed) {
  if (!(sample_time > 0.0) || !std::isfinite(sample_time))
    throw Error("discretize: sample_time must be > 0");
  if (!(noise_std >= 0.0)) throw Error("discretize: noise_std must be >= 0");
  if (!tf.is_proper()) throw Error("discretize: '" + tf.label() + "' is improper");

  const auto& den = tf.denominator();
  const int n = tf.den_degree();
  const double a0 = den[0];
  // Pad the numerator to n+1 coefficients and normalize to a monic denominator.
  std::vector<double> b(static_cast<std::size_t>(n + 1), 0.0);
  const auto& num = tf.numerator();
  for (std::size_t i = 0; i < num.size(); ++i) b[b.size() - num.size() + i] = num[i] / a0;

  d_ = b[0];
  a_ = Eigen::MatrixXd::Zero(n, n);
  b_ = Eigen::VectorXd::Zero(n);
  c_ = Eigen::RowVectorXd::Zero(n);
  for (int j = 0; j < n; ++j) {
    const double aj = den[static_cast<std::size_t>(j + 1)] / a0;
    a_(0, j) = -aj;
    c_(j) = b[static_cast<std::size_t>(j + 1)] - d_ * aj;
  }
  for (int i = 1; i < n; ++i) a_(i, i - 1) = 1.0;
  if (n > 0) b_(0) = 1.0;

  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(I - a_ * (h_ / 2.0));
  ad_ = n > 0 ? Eigen::MatrixXd(lu.solve(I + a_ * (h_ / 2.0))) : Eigen::MatrixXd(0, 0);
  bd_ = n > 0 ? Eigen::VectorXd(lu.solve(b_ * h_)) : Eigen::VectorXd(0);
  x_ = Eigen::VectorXd::Zero(n);
}

double DiscretePlant::output(double u) const { return c_.dot(x_) + d_ * u; }

double DiscretePlant::measure(double u) {
  double y = output(u);
  if (noise_std_ > 0.0) y += noise_std_ * normal_(rng_);
  return y;
}

double DiscretePlant::output_rate() const {
  if (x_.size() == 0) return 0.0;
  return c_.dot(a_ * x_ + b_ * u_last_);
}

void DiscretePlant::update(double u) {
  if (x_.size() > 0) x_ = ad_ * x_ + bd_ * u;
  u_last_ = u;
}

double DiscretePlant::step(double u) {
  const double y = measure(u);
  update(u);
  return y;
}

void DiscretePlant::reset() {
  x_.setZero();
  u_last_ = 0.0;
}

DiscretePlant discretize(const TransferFunction& tf, double sample_time, double noise_std,
                         std::uint64_t seed) {
  return DiscretePlant(tf, sample_time, noise_std, seed);
}

}  // namespace niform::lti
