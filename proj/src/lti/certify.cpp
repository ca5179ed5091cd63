#include "niform/lti/certify.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "niform/error.hpp"

namespace niform::lti {

double dc_gain(const TransferFunction& tf) {
  const double d0 = tf.denominator().back();
  if (d0 == 0.0) throw IntegratorError("dc_gain: '" + tf.label() + "' has a pole at s = 0");
  return tf.numerator().back() / d0;
}

int rhp_pole_count(const TransferFunction& tf) {
  int n = 0;
  for (const auto& p : tf.poles())
    if (p.real() > 0.0) ++n;
  return n;
}

namespace {

constexpr double kMaxStep = std::numbers::pi / 8.0;

double phase_step(Complex a, Complex b) { return std::arg(b / a); }

// Accumulates arg change of f between wa and wb, bisecting while too coarse.
double refine(const TransferFunction& loop, double wa, Complex fa, double wb, Complex fb,
              int depth) {
  const double step = phase_step(fa, fb);
  if (std::abs(step) <= kMaxStep || depth == 0 || !std::isfinite(wb)) return step;
  const double wm = wa > 0.0 ? std::sqrt(wa * wb) : 0.5 * wb;
  const Complex fm = 1.0 - loop.at(Complex{0.0, wm});
  return refine(loop, wa, fa, wm, fm, depth - 1) + refine(loop, wm, fm, wb, fb, depth - 1);
}

}  // namespace

NyquistResult nyquist_check(const TransferFunction& plant, const TransferFunction& controller,
                            const FrequencyGrid& grid) {
  NyquistResult r;
  const TransferFunction loop = plant * controller;
  r.open_loop_rhp_poles = rhp_pole_count(plant) + rhp_pole_count(controller);
  if (!loop.is_proper()) {
    r.note = "loop transfer function is improper";
    return r;
  }
  // ω = 0, the grid, a few decades beyond it, then ∞.
  std::vector<double> w{0.0};
  w.insert(w.end(), grid.omegas().begin(), grid.omegas().end());
  for (int k = 1; k <= 4; ++k) w.push_back(grid.omegas().back() * std::pow(10.0, k));

  std::vector<Complex> f(w.size());
  try {
    const auto resp = frequency_response(loop, FrequencyGrid(std::vector<double>(w.begin() + 1, w.end())));
    f[0] = 1.0 - evaluate(loop, 0.0);
    for (std::size_t i = 0; i < resp.size(); ++i) f[i + 1] = 1.0 - resp[i];
  } catch (const PoleOnAxisError& e) {
    std::ostringstream os;
    os << "loop has a pole on the imaginary axis near omega=" << e.omega();
    r.note = os.str();
    return r;
  }
  const Complex f_inf = 1.0 - loop.high_frequency_gain();
  for (const Complex& v : f)
    if (std::abs(v) < 1e-12) {
      r.note = "1 - L(jw) passes through zero (closed-loop pole on the axis)";
      return r;
    }
  if (std::abs(f_inf) < 1e-12) {
    r.note = "L(inf) = 1";
    return r;
  }

  double total = 0.0;
  for (std::size_t i = 0; i + 1 < w.size(); ++i) total += refine(loop, w[i], f[i], w[i + 1], f[i + 1], 24);
  total += phase_step(f.back(), f_inf);
  // Negative-frequency half mirrors the positive half.
  r.winding = static_cast<int>(std::lround(total / std::numbers::pi));
  r.valid = true;
  r.stable = (r.winding == r.open_loop_rhp_poles);
  return r;
}

Certificate certify_interconnection(const TransferFunction& plant,
                                    const TransferFunction& controller,
                                    const FrequencyGrid& grid, double tol) {
  Certificate c;
  c.plant_class = classify_ni(plant, grid, tol);
  c.controller_class = classify_ni(controller, grid, tol);
  const auto pk = c.plant_class.kind, ck = c.controller_class.kind;
  const bool p_ni = pk != NiClass::neither, c_ni = ck != NiClass::neither;
  c.preconditions_met = p_ni && c_ni && (pk == NiClass::sni || ck == NiClass::sni);
  if (!c.preconditions_met) {
    std::ostringstream os;
    os << "NI/SNI precondition not met: plant " << to_string(pk) << " (min index "
       << c.plant_class.min_index << " at w=" << c.plant_class.worst_omega << "), controller "
       << to_string(ck);
    c.reasons.push_back(os.str());
  }

  c.dc_product = dc_gain(plant) * dc_gain(controller);
  c.dc_condition = c.dc_product < 1.0;
  if (!c.dc_condition) {
    std::ostringstream os;
    os << "DC gain product " << c.dc_product << " >= 1";
    c.reasons.push_back(os.str());
  }

  const double m_inf = plant.high_frequency_gain(), n_inf = controller.high_frequency_gain();
  c.side_conditions = std::isfinite(m_inf) && std::isfinite(n_inf) && m_inf * n_inf == 0.0 &&
                      n_inf >= 0.0;

  c.nyquist = nyquist_check(plant, controller, grid);
  if (!c.nyquist.valid) {
    c.reasons.push_back("Nyquist check not applicable: " + c.nyquist.note);
  } else if (!c.nyquist.stable) {
    std::ostringstream os;
    os << "Nyquist: winding " << c.nyquist.winding << " about +1 vs " << c.nyquist.open_loop_rhp_poles
       << " open-loop RHP poles";
    c.reasons.push_back(os.str());
  }
  c.stable = c.preconditions_met && c.dc_condition && c.nyquist.valid && c.nyquist.stable;
  return c;
}

Composition series_ni_composition(const TransferFunction& sni, const TransferFunction& ni,
                                  const FrequencyGrid& grid, double tol) {
  Composition out{sni + ni, {}, {}, {}, false};
  out.sni_class = classify_ni(sni, grid, tol);
  out.ni_class = classify_ni(ni, grid, tol);
  out.composite_class = classify_ni(out.composite, grid, tol);
  out.preconditions_met = out.sni_class.kind == NiClass::sni && out.ni_class.kind != NiClass::neither;
  return out;
}

}  // namespace niform::lti
