#pragma once

// Dense real polynomials stored as ascending coefficient vectors:
// c[0] + c[1] z + ... + c[n] z^n.

#include <complex>
#include <functional>
#include <span>
#include <vector>

namespace apjac::polynomial {

using Coeffs = std::vector<double>;

inline int degree(std::span<const double> c) { return static_cast<int>(c.size()) - 1; }

template <typename Scalar>
Scalar horner(std::span<const double> c, Scalar z) {
  Scalar acc{0};
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * z + *it;
  return acc;
}

inline double eval(std::span<const double> c, double z) { return horner(c, z); }

/// Sum of |c_k z^k|; the natural scale for rounding error in eval(c, z).
double magnitude(std::span<const double> c, double z);

Coeffs derivative(std::span<const double> c);
Coeffs add(std::span<const double> a, std::span<const double> b);
Coeffs multiply(std::span<const double> a, std::span<const double> b);
Coeffs scale(std::span<const double> a, double s);

/// outer(inner(z)).
Coeffs compose(std::span<const double> outer, std::span<const double> inner);

/// Synthetic division by (z - root). Returns the quotient; the remainder
/// (which equals c(root)) is written to `remainder`.
Coeffs divide_linear(std::span<const double> c, double root, double& remainder);

/// Cauchy bound: every root of c lies in |z| < bound.
double root_bound(std::span<const double> c);

/// Root of f in [lo, hi] given f(lo), f(hi) of opposite sign (or zero).
/// Bisection to a narrow bracket, then bracket-safeguarded Newton.
/// `df` may be empty, in which case pure bisection to machine precision
/// is used. Throws RootFindingError if the bracket is not a sign change.
double bracketed_root(const std::function<double(double)>& f,
                      const std::function<double(double)>& df, double lo, double hi);

/// All roots of a real-rooted polynomial with simple roots, ascending.
/// Brackets come recursively from the roots of the derivative (Rolle).
/// Throws NonRealRoots when a sign change is missing, which happens iff the
/// polynomial has a complex pair or a multiple root.
std::vector<double> real_roots(std::span<const double> c);

}  // namespace apjac::polynomial
