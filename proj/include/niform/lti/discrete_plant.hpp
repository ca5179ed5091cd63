#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>

#include "niform/lti/transfer_function.hpp"

namespace niform::lti {

/**
 * Fixed-step realization of a proper transfer function.
 *
 * Controllable canonical form, trapezoidal state update with the input held
 * over the sample:
 *   x[k+1] = Ad x[k] + Bd u[k],  Ad = (I − Ah/2)⁻¹(I + Ah/2),  Bd = (I − Ah/2)⁻¹ B h
 *   y[k]   = C x[k] + D u[k] (+ e[k] when noise_std > 0)
 * which keeps the continuous DC gain exactly.
 */
class DiscretePlant {
 public:
  DiscretePlant(const TransferFunction& tf, double sample_time, double noise_std = 0.0,
                std::uint64_t seed = 0);

  // Noise-free output at the current state for input u (feedthrough included).
  double output(double u = 0.0) const;
  // Output plus one draw of the additive disturbance.
  double measure(double u = 0.0);
  // Continuous-time derivative of the noise-free output at the current state
  // with the held input (the last input passed to update()).
  double output_rate() const;

  void update(double u);
  // y[k] (with disturbance), then advance.
  double step(double u);

  void reset();

  double sample_time() const { return h_; }
  double noise_std() const { return noise_std_; }
  double last_input() const { return u_last_; }
  int order() const { return static_cast<int>(x_.size()); }
  const Eigen::VectorXd& state() const { return x_; }
  const Eigen::MatrixXd& Ad() const { return ad_; }
  const Eigen::VectorXd& Bd() const { return bd_; }
  const Eigen::RowVectorXd& C() const { return c_; }
  double D() const { return d_; }

 private:
  Eigen::MatrixXd a_, ad_;
  Eigen::VectorXd b_, bd_;
  Eigen::RowVectorXd c_;
  double d_ = 0.0;
  Eigen::VectorXd x_;
  double h_;
  double u_last_ = 0.0;
  double noise_std_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

DiscretePlant discretize(const TransferFunction& tf, double sample_time, double noise_std = 0.0,
                         std::uint64_t seed = 0);

}  // namespace niform::lti
