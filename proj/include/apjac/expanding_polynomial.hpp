#pragma once

#include <complex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "apjac/polynomial.hpp"

namespace apjac {

/// Closed real interval [lo, hi].
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double length() const { return hi - lo; }
  bool contains(double x, double slack = 0.0) const { return x >= lo - slack && x <= hi + slack; }
  bool contains(const Interval& other, double slack = 0.0) const {
    return other.lo >= lo - slack && other.hi <= hi + slack;
  }
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Below this expansion margin the contraction estimate no longer applies.
inline constexpr double kContractiveMargin = 10.0;

/// Monic real polynomial T of degree d >= 2 together with the radius xi of
/// the interval it renormalises, such that T^{-1}([-xi, xi]) is a union of
/// d disjoint intervals inside [-xi, xi].
///
/// Instances only exist in validated form: every constructor checks that the
/// d-1 critical points are real, simple and strictly increasing, that every
/// lap of T covers [-xi, xi], and that the preimage bands lie in [-xi, xi].
class ExpandingPolynomial {
 public:
  /// `lower` holds a_0 .. a_{d-1}; the leading coefficient is fixed to 1.
  static ExpandingPolynomial from_coefficients(std::span<const double> lower, double xi);

  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  double xi() const { return xi_; }
  /// Full ascending coefficient vector a_0 .. a_d with a_d = 1.
  std::span<const double> coefficients() const { return coeffs_; }
  std::span<const double> derivative_coefficients() const { return dcoeffs_; }

  const std::vector<double>& critical_points() const { return crit_; }
  const std::vector<double>& critical_values() const { return crit_values_; }
  const std::vector<double>& second_derivatives() const { return crit_second_; }

  /// min_i |t_i| / xi.
  double margin() const { return margin_; }
  bool contractive() const { return margin_ >= kContractiveMargin; }
  /// Warning text when 1 < margin < 10, empty otherwise.
  std::optional<std::string> contractivity_warning() const;

  /// -a_{d-1} / d: the mean of the roots (and of the critical points).
  double center() const { return -coeffs_[coeffs_.size() - 2] / degree(); }

  double operator()(double z) const { return polynomial::eval(coeffs_, z); }
  std::complex<double> operator()(std::complex<double> z) const { return polynomial::horner(coeffs_, z); }
  double derivative(double z) const { return polynomial::eval(dcoeffs_, z); }
  double second_derivative(double z) const;

  /// Laps: the d maximal intervals of monotonicity, delimited by the
  /// critical points; outer laps are closed off by a root bound valid for
  /// every level set T(z) = y with |y| <= `level_bound`.
  std::vector<Interval> laps(double level_bound) const;

 private:
  ExpandingPolynomial() = default;
  static ExpandingPolynomial validated(std::vector<double> coeffs, double xi, std::vector<double> crit);

  friend ExpandingPolynomial make_chebyshev_family(int, double, double);
  friend ExpandingPolynomial compose(const ExpandingPolynomial&, const ExpandingPolynomial&);

  std::vector<double> coeffs_;
  std::vector<double> dcoeffs_;
  double xi_ = 0.0;
  std::vector<double> crit_;
  std::vector<double> crit_values_;
  std::vector<double> crit_second_;
  double margin_ = 0.0;
};

/// Monic scaled Chebyshev polynomial (a^d / 2^{d-1}) Cheb_d(z / a), whose
/// critical values all have magnitude a^d / 2^{d-1}.
ExpandingPolynomial make_chebyshev_family(int d, double a, double xi);

/// Scale a for which the Chebyshev family has critical values of magnitude h.
double chebyshev_scale_for_critical_magnitude(int d, double h);

/// outer(inner(z)), revalidated. Both factors must share xi.
ExpandingPolynomial compose(const ExpandingPolynomial& outer, const ExpandingPolynomial& inner);

/// The d maximal intervals of T^{-1}([lo, hi]), sorted. Requires
/// [lo, hi] within [-xi, xi].
std::vector<Interval> preimage_intervals(const ExpandingPolynomial& T, Interval target);

inline double eval(const ExpandingPolynomial& T, double z) { return T(z); }
inline double eval_derivative(const ExpandingPolynomial& T, double z) { return T.derivative(z); }

}  // namespace apjac
