#pragma once

#include <string>
#include <vector>

#include "niform/lti/transfer_function.hpp"

namespace niform::lti {

inline constexpr double kPoleFloor = 1e-12;
inline constexpr double kDefaultTol = 1e-9;

// Strictly increasing, strictly positive angular frequencies (rad/s).
class FrequencyGrid {
 public:
  explicit FrequencyGrid(std::vector<double> omegas);
  static FrequencyGrid log_spaced(double lo, double hi, std::size_t n);
  // 400 points over [1e-3, 1e4] rad/s.
  static FrequencyGrid standard();

  const std::vector<double>& omegas() const { return omegas_; }
  std::size_t size() const { return omegas_.size(); }
  double operator[](std::size_t i) const { return omegas_[i]; }

 private:
  std::vector<double> omegas_;
};

// P(jω). Throws PoleOnAxisError when |den(jω)| < floor.
Complex evaluate(const TransferFunction& tf, double omega, double floor = kPoleFloor);

// j(P − P*) = −2·Im P(jω); positive ⇔ strictly below the real axis.
double sni_index(const TransferFunction& tf, double omega, double floor = kPoleFloor);

enum class Exec { serial, parallel };

// Response over a grid. The parallel variant splits ω across OpenMP threads;
// the serial one is the reference it is tested against.
std::vector<Complex> frequency_response(const TransferFunction& tf, const FrequencyGrid& grid,
                                        Exec exec = Exec::parallel, double floor = kPoleFloor);
std::vector<double> sni_sweep(const TransferFunction& tf, const FrequencyGrid& grid,
                              Exec exec = Exec::parallel, double floor = kPoleFloor);

enum class NiClass { sni, ni, neither };
std::string to_string(NiClass c);

struct Classification {
  NiClass kind = NiClass::neither;
  double min_index = 0.0;    // min sni_index over the grid
  double worst_omega = 0.0;  // where it occurs
  // first/last grid ω with index ≤ tol (0 when none)
  double violation_lo = 0.0;
  double violation_hi = 0.0;
};

Classification classify_ni(const TransferFunction& tf, const FrequencyGrid& grid,
                           double tol = kDefaultTol, Exec exec = Exec::parallel);

}  // namespace niform::lti
