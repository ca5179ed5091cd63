#include "niform/lti/frequency.hpp"

#include <cmath>
#include <limits>

#include "niform/error.hpp"

namespace niform::lti {

FrequencyGrid::FrequencyGrid(std::vector<double> omegas) : omegas_(std::move(omegas)) {
  if (omegas_.empty()) throw Error("frequency grid is empty");
  for (std::size_t i = 0; i < omegas_.size(); ++i) {
    if (!(omegas_[i] > 0.0) || !std::isfinite(omegas_[i]))
      throw Error("frequency grid entries must be finite and > 0");
    if (i > 0 && !(omegas_[i] > omegas_[i - 1]))
      throw Error("frequency grid must be strictly increasing");
  }
}

FrequencyGrid FrequencyGrid::log_spaced(double lo, double hi, std::size_t n) {
  if (!(lo > 0.0) || !(hi > lo) || n < 2) throw Error("bad log-spaced grid bounds");
  std::vector<double> w(n);
  const double a = std::log10(lo), b = std::log10(hi);
  for (std::size_t i = 0; i < n; ++i)
    w[i] = std::pow(10.0, a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
  return FrequencyGrid(std::move(w));
}

FrequencyGrid FrequencyGrid::standard() { return log_spaced(1e-3, 1e4, 400); }

namespace {

// Returns NaN-free response or flags the pole via `bad`.
inline Complex response_point(const TransferFunction& tf, double omega, double floor, bool& bad) {
  const Complex s{0.0, omega};
  const Complex den = poly::eval(tf.denominator(), s);
  if (std::abs(den) < floor) {
    bad = true;
    return {};
  }
  return poly::eval(tf.numerator(), s) / den;
}

}  // namespace

Complex evaluate(const TransferFunction& tf, double omega, double floor) {
  if (!(omega >= 0.0)) throw Error("evaluate: omega must be >= 0");
  bool bad = false;
  Complex v = response_point(tf, omega, floor, bad);
  if (bad) throw PoleOnAxisError(omega, std::abs(poly::eval(tf.denominator(), Complex{0.0, omega})));
  return v;
}

double sni_index(const TransferFunction& tf, double omega, double floor) {
  if (!(omega > 0.0)) throw Error("sni_index: omega must be > 0");
  return -2.0 * evaluate(tf, omega, floor).imag();
}

std::vector<Complex> frequency_response(const TransferFunction& tf, const FrequencyGrid& grid,
                                        Exec exec, double floor) {
  const auto& w = grid.omegas();
  const long n = static_cast<long>(w.size());
  std::vector<Complex> out(w.size());
  long first_bad = n;
  if (exec == Exec::serial) {
    for (long i = 0; i < n; ++i) {
      bool bad = false;
      out[static_cast<std::size_t>(i)] = response_point(tf, w[static_cast<std::size_t>(i)], floor, bad);
      if (bad) {
        first_bad = i;
        break;
      }
    }
  } else {
#pragma omp parallel for schedule(static) reduction(min : first_bad)
    for (long i = 0; i < n; ++i) {
      bool bad = false;
      out[static_cast<std::size_t>(i)] = response_point(tf, w[static_cast<std::size_t>(i)], floor, bad);
      if (bad && i < first_bad) first_bad = i;
    }
  }
  if (first_bad < n) {
    const double om = w[static_cast<std::size_t>(first_bad)];
    throw PoleOnAxisError(om, std::abs(poly::eval(tf.denominator(), Complex{0.0, om})));
  }
  return out;
}

std::vector<double> sni_sweep(const TransferFunction& tf, const FrequencyGrid& grid, Exec exec,
                              double floor) {
  const auto resp = frequency_response(tf, grid, exec, floor);
  std::vector<double> out(resp.size());
  for (std::size_t i = 0; i < resp.size(); ++i) out[i] = -2.0 * resp[i].imag();
  return out;
}

std::string to_string(NiClass c) {
  switch (c) {
    case NiClass::sni: return "SNI";
    case NiClass::ni: return "NI";
    case NiClass::neither: return "neither";
  }
  return "neither";
}

Classification classify_ni(const TransferFunction& tf, const FrequencyGrid& grid, double tol,
                           Exec exec) {
  const auto idx = sni_sweep(tf, grid, exec);
  Classification c;
  c.min_index = std::numeric_limits<double>::infinity();
  bool all_strict = true, all_weak = true;
  bool seen_violation = false;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] < c.min_index) {
      c.min_index = idx[i];
      c.worst_omega = grid[i];
    }
    if (!(idx[i] > tol)) {
      all_strict = false;
      if (!seen_violation) c.violation_lo = grid[i];
      c.violation_hi = grid[i];
      seen_violation = true;
    }
    if (!(idx[i] >= -tol)) all_weak = false;
  }
  c.kind = all_strict ? NiClass::sni : (all_weak ? NiClass::ni : NiClass::neither);
  return c;
}

}  // namespace niform::lti
