#pragma once

#include <string>
#include <vector>

#include "niform/lti/frequency.hpp"

namespace niform::lti {

// num(0)/den(0). Throws IntegratorError if den(0) = 0.
double dc_gain(const TransferFunction& tf);

struct NyquistResult {
  bool valid = false;          // loop proper and free of axis poles
  int winding = 0;             // ccw turns of 1 − L(jω) about 0, ω ∈ (−∞, ∞)
  int open_loop_rhp_poles = 0;
  bool stable = false;         // winding == open-loop RHP pole count
  std::string note;
};

// Positive-feedback Nyquist test of L = M·N around +1. The sampled grid is
// extended by ω = 0 and ω → ∞, reflected by conjugate symmetry, and refined
// locally wherever the phase step between neighbours exceeds π/8.
NyquistResult nyquist_check(const TransferFunction& plant, const TransferFunction& controller,
                            const FrequencyGrid& grid);

struct Certificate {
  Classification plant_class;
  Classification controller_class;
  bool preconditions_met = false;  // one SNI, the other NI or SNI
  double dc_product = 0.0;
  bool dc_condition = false;       // M(0)N(0) < 1
  bool side_conditions = false;    // M(∞)N(∞) = 0 and N(∞) ≥ 0
  NyquistResult nyquist;
  bool stable = false;
  std::vector<std::string> reasons;  // why not stable
};

Certificate certify_interconnection(const TransferFunction& plant,
                                    const TransferFunction& controller,
                                    const FrequencyGrid& grid, double tol = kDefaultTol);

struct Composition {
  TransferFunction composite;
  Classification sni_class;
  Classification ni_class;
  Classification composite_class;
  bool preconditions_met = false;
};

// Positive (summing) connection of an SNI path with an NI path.
Composition series_ni_composition(const TransferFunction& sni, const TransferFunction& ni,
                                  const FrequencyGrid& grid, double tol = kDefaultTol);

// Counts poles with Re > 0 (roots of the denominator).
int rhp_pole_count(const TransferFunction& tf);

}  // namespace niform::lti
