#include "apjac/expanding_polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "apjac/errors.hpp"

namespace apjac {

namespace {

constexpr double kCriticalTol = 1e-10;
constexpr double kSecondDerivativeTol = 1e-8;
constexpr double kContainmentSlack = 1e-9;

std::string describe(std::span<const double> c) {
  std::ostringstream os;
  os.precision(10);
  for (std::size_t k = c.size(); k-- > 0;) {
    os << (k + 1 == c.size() ? "" : " + ") << c[k];
    if (k > 0) os << "z^" << k;
  }
  return os.str();
}

}  // namespace

std::optional<std::string> ExpandingPolynomial::contractivity_warning() const {
  if (contractive()) return std::nullopt;
  std::ostringstream os;
  os << "ContractivityWarning: expansion margin " << margin_ << " < " << kContractiveMargin
     << " for degree-" << degree() << " polynomial; contraction is not guaranteed";
  return os.str();
}

double ExpandingPolynomial::second_derivative(double z) const {
  const auto dd = polynomial::derivative(dcoeffs_);
  return polynomial::eval(dd, z);
}

std::vector<Interval> ExpandingPolynomial::laps(double level_bound) const {
  double m = std::abs(coeffs_[0]) + std::abs(level_bound);
  for (std::size_t k = 1; k + 1 < coeffs_.size(); ++k) m = std::max(m, std::abs(coeffs_[k]));
  const double bound = 1.0 + m;
  std::vector<Interval> out;
  out.reserve(crit_.size() + 1);
  double left = -bound;
  for (double c : crit_) {
    out.push_back({left, c});
    left = c;
  }
  out.push_back({left, bound});
  return out;
}

ExpandingPolynomial ExpandingPolynomial::from_coefficients(std::span<const double> lower, double xi) {
  if (lower.size() < 2) throw ValidationError("expanding polynomial needs degree d >= 2");
  std::vector<double> coeffs(lower.begin(), lower.end());
  coeffs.push_back(1.0);
  const auto d1 = polynomial::derivative(coeffs);
  std::vector<double> crit;
  try {
    crit = polynomial::real_roots(d1);
  } catch (const NumericalError& e) {
    throw ValidationError("critical points of " + describe(coeffs) + " are not real and simple: " + e.what());
  }
  return validated(std::move(coeffs), xi, std::move(crit));
}

ExpandingPolynomial ExpandingPolynomial::validated(std::vector<double> coeffs, double xi, std::vector<double> crit) {
  const int d = static_cast<int>(coeffs.size()) - 1;
  if (d < 2) throw ValidationError("expanding polynomial needs degree d >= 2");
  if (coeffs.back() != 1.0) throw ValidationError("expanding polynomial must be monic");
  if (!(xi > 0.0) || !std::isfinite(xi)) throw ValidationError("interval radius xi must be positive");
  for (double c : coeffs)
    if (!std::isfinite(c)) throw ValidationError("non-finite polynomial coefficient");

  ExpandingPolynomial T;
  T.coeffs_ = std::move(coeffs);
  T.dcoeffs_ = polynomial::derivative(T.coeffs_);
  T.xi_ = xi;

  if (static_cast<int>(crit.size()) != d - 1)
    throw ValidationError("expected " + std::to_string(d - 1) + " real critical points, found " +
                          std::to_string(crit.size()));
  for (std::size_t i = 1; i < crit.size(); ++i)
    if (!(crit[i] > crit[i - 1])) throw ValidationError("critical points are not strictly increasing");

  const auto d2 = polynomial::derivative(T.dcoeffs_);
  for (double c : crit) {
    const double r = polynomial::eval(T.dcoeffs_, c);
    if (std::abs(r) > kCriticalTol * std::max(1.0, polynomial::magnitude(T.dcoeffs_, c))) {
      std::ostringstream os;
      os << "T'(c) = " << r << " at stored critical point c = " << c;
      throw ValidationError(os.str());
    }
    const double s = polynomial::eval(d2, c);
    if (std::abs(s) <= kSecondDerivativeTol) {
      std::ostringstream os;
      os << "degenerate critical point c = " << c << " (|T''(c)| = " << std::abs(s) << ")";
      throw DegenerateCritical(os.str());
    }
    T.crit_values_.push_back(T(c));
    T.crit_second_.push_back(s);
  }
  T.crit_ = std::move(crit);

  double m = std::numeric_limits<double>::infinity();
  for (double t : T.crit_values_) m = std::min(m, std::abs(t) / xi);
  T.margin_ = m;
  if (!(m > 1.0)) {
    std::ostringstream os;
    os << "not expanding over [-" << xi << ", " << xi << "]: min |t_i| / xi = " << m << " <= 1";
    throw ValidationError(os.str());
  }

  // Each lap must sweep across [-xi, xi]: consecutive critical values have
  // opposite signs, and the outer laps run off to the correct infinities.
  const double left_inf_sign = (d % 2 == 0) ? 1.0 : -1.0;
  if (left_inf_sign * T.crit_values_.front() > 0.0)
    throw ValidationError("leftmost lap does not cover [-xi, xi]");
  if (T.crit_values_.back() > 0.0) throw ValidationError("rightmost lap does not cover [-xi, xi]");
  for (std::size_t i = 1; i < T.crit_values_.size(); ++i)
    if ((T.crit_values_[i] > 0.0) == (T.crit_values_[i - 1] > 0.0))
      throw ValidationError("critical values do not alternate in sign");

  const auto bands = preimage_intervals(T, {-xi, xi});
  const Interval base{-xi, xi};
  for (const auto& b : bands) {
    if (!base.contains(b, kContainmentSlack * xi)) {
      std::ostringstream os;
      os.precision(17);
      os << "preimage band [" << b.lo << ", " << b.hi << "] leaves [-xi, xi]";
      throw ValidationError(os.str());
    }
  }
  return T;
}

ExpandingPolynomial make_chebyshev_family(int d, double a, double xi) {
  if (d < 2) throw ValidationError("Chebyshev family needs d >= 2");
  if (!(a > 0.0)) throw ValidationError("Chebyshev family needs a > 0");
  // U_k(z) = a^k Cheb_k(z / a): U_{k+1} = 2 z U_k - a^2 U_{k-1}.
  std::vector<double> prev{1.0};
  std::vector<double> cur{0.0, 1.0};
  for (int k = 1; k < d; ++k) {
    std::vector<double> next(cur.size() + 1, 0.0);
    for (std::size_t i = 0; i < cur.size(); ++i) next[i + 1] += 2.0 * cur[i];
    for (std::size_t i = 0; i < prev.size(); ++i) next[i] -= a * a * prev[i];
    prev = std::move(cur);
    cur = std::move(next);
  }
  const double norm = std::ldexp(1.0, -(d - 1));
  for (auto& c : cur) c *= norm;
  cur.back() = 1.0;

  std::vector<double> crit;
  for (int k = d - 1; k >= 1; --k)
    crit.push_back(2 * k == d ? 0.0 : a * std::cos(std::numbers::pi * k / d));
  return ExpandingPolynomial::validated(std::move(cur), xi, std::move(crit));
}

double chebyshev_scale_for_critical_magnitude(int d, double h) {
  return std::pow(h * std::ldexp(1.0, d - 1), 1.0 / d);
}

ExpandingPolynomial compose(const ExpandingPolynomial& outer, const ExpandingPolynomial& inner) {
  if (std::abs(outer.xi() - inner.xi()) > 1e-12 * std::max(outer.xi(), inner.xi()))
    throw ValidationError("compose: factors must share the interval radius xi");

  auto coeffs = polynomial::compose(outer.coefficients(), inner.coefficients());
  coeffs.back() = 1.0;

  // (outer o inner)' = outer'(inner(z)) inner'(z): critical points are those
  // of inner plus every solution of inner(z) = c, c critical for outer.
  std::vector<double> crit = inner.critical_points();
  double level = 0.0;
  for (double c : outer.critical_points()) level = std::max(level, std::abs(c));
  const auto laps = inner.laps(level);
  auto dinner = [&](double z) { return inner.derivative(z); };
  for (double c : outer.critical_points()) {
    for (const auto& lap : laps) {
      auto f = [&](double z) { return inner(z) - c; };
      const double flo = f(lap.lo);
      const double fhi = f(lap.hi);
      if ((flo > 0.0) == (fhi > 0.0)) {
        std::ostringstream os;
        os << "compose: inner(z) = " << c << " has no real solution on a lap; composite has non-real critical points";
        throw ValidationError(os.str());
      }
      crit.push_back(polynomial::bracketed_root(f, dinner, lap.lo, lap.hi));
    }
  }
  std::sort(crit.begin(), crit.end());
  return ExpandingPolynomial::validated(std::move(coeffs), outer.xi(), std::move(crit));
}

std::vector<Interval> preimage_intervals(const ExpandingPolynomial& T, Interval target) {
  const double xi = T.xi();
  if (!(target.lo <= target.hi)) throw ValidationError("preimage_intervals: empty target interval");
  if (!Interval{-xi, xi}.contains(target, 1e-12 * xi)) {
    std::ostringstream os;
    os << "preimage_intervals: [" << target.lo << ", " << target.hi << "] exceeds [-xi, xi] = [" << -xi << ", "
       << xi << "]";
    throw ValidationError(os.str());
  }
  const auto laps = T.laps(std::max(std::abs(target.lo), std::abs(target.hi)));
  auto df = [&](double z) { return T.derivative(z); };
  std::vector<Interval> out;
  out.reserve(laps.size());
  for (const auto& lap : laps) {
    auto solve = [&](double y) {
      auto f = [&](double z) { return T(z) - y; };
      return polynomial::bracketed_root(f, df, lap.lo, lap.hi);
    };
    const double a = solve(target.lo);
    const double b = solve(target.hi);
    out.push_back({std::min(a, b), std::max(a, b)});
  }
  std::sort(out.begin(), out.end(), [](const Interval& x, const Interval& y) { return x.lo < y.lo; });
  return out;
}

}  // namespace apjac
