#include "niform/lti/polynomial.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>

namespace niform::lti::poly {

Coeffs trim(Coeffs p) {
  auto first = std::find_if(p.begin(), p.end(), [](double c) { return c != 0.0; });
  p.erase(p.begin(), first);
  if (p.empty()) p.push_back(0.0);
  return p;
}

int degree(const Coeffs& p) { return static_cast<int>(trim(p).size()) - 1; }

std::complex<double> eval(const Coeffs& p, std::complex<double> s) {
  std::complex<double> acc{0.0, 0.0};
  for (double c : p) acc = acc * s + c;
  return acc;
}

double eval(const Coeffs& p, double s) {
  double acc = 0.0;
  for (double c : p) acc = acc * s + c;
  return acc;
}

Coeffs add(const Coeffs& a, const Coeffs& b) {
  const std::size_t n = std::max(a.size(), b.size());
  Coeffs out(n, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) out[n - a.size() + i] += a[i];
  for (std::size_t i = 0; i < b.size(); ++i) out[n - b.size() + i] += b[i];
  return trim(std::move(out));
}

Coeffs sub(const Coeffs& a, const Coeffs& b) { return add(a, scale(b, -1.0)); }

Coeffs mul(const Coeffs& a, const Coeffs& b) {
  Coeffs out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return trim(std::move(out));
}

Coeffs scale(const Coeffs& a, double k) {
  Coeffs out(a);
  for (double& c : out) c *= k;
  return trim(std::move(out));
}

Coeffs derivative(const Coeffs& p) {
  const int n = degree(p);
  if (n <= 0) return {0.0};
  Coeffs q = trim(p);
  Coeffs out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = q[static_cast<std::size_t>(i)] * (n - i);
  return out;
}

std::vector<std::complex<double>> roots(const Coeffs& p) {
  Coeffs q = trim(p);
  const int n = static_cast<int>(q.size()) - 1;
  if (n <= 0) return {};
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j) companion(0, j) = -q[static_cast<std::size_t>(j + 1)] / q[0];
  for (int i = 1; i < n; ++i) companion(i, i - 1) = 1.0;
  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
  std::vector<std::complex<double>> out;
  for (int i = 0; i < n; ++i) out.push_back(solver.eigenvalues()(i));
  return out;
}

}  // namespace niform::lti::poly
