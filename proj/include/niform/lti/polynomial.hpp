#pragma once

#include <complex>
#include <vector>

// Real polynomials as coefficient vectors in descending powers.
namespace niform::lti::poly {

using Coeffs = std::vector<double>;

// Drops leading zeros; an all-zero input becomes {0}.
Coeffs trim(Coeffs p);

int degree(const Coeffs& p);

std::complex<double> eval(const Coeffs& p, std::complex<double> s);
double eval(const Coeffs& p, double s);

Coeffs add(const Coeffs& a, const Coeffs& b);
Coeffs sub(const Coeffs& a, const Coeffs& b);
Coeffs mul(const Coeffs& a, const Coeffs& b);
Coeffs scale(const Coeffs& a, double k);
Coeffs derivative(const Coeffs& p);

// Roots via the eigenvalues of the companion matrix.
std::vector<std::complex<double>> roots(const Coeffs& p);

}  // namespace niform::lti::poly
