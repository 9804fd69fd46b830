#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <vector>

#include "apjac/expanding_polynomial.hpp"
#include "apjac/jacobi.hpp"
#include "apjac/tower.hpp"

namespace fixtures {

inline constexpr double kXi = 12.0;

inline apjac::ExpandingPolynomial quadratic132() {
  return apjac::make_chebyshev_family(2, std::sqrt(264.0), kXi);
}
inline apjac::ExpandingPolynomial cubic75() { return apjac::make_chebyshev_family(3, 10.0, kXi); }

inline apjac::TowerConfig tower(std::vector<apjac::ExpandingPolynomial> levels, std::vector<int> digits,
                                apjac::IndexRange output, apjac::Seed seed = {0.0, 6.0}) {
  apjac::TowerConfig c;
  c.xi = kXi;
  std::vector<int> radices;
  for (const auto& T : levels) radices.push_back(T.degree());
  while (radices.size() < digits.size()) radices.push_back(2);
  c.levels = std::move(levels);
  c.digits = apjac::AdicInteger(radices, digits);
  c.output = output;
  c.seed = seed;
  return c;
}

inline apjac::JacobiWindow random_window(std::mt19937_64& rng, apjac::IndexRange sites, double q_scale = 3.0,
                                         double p_lo = 0.5, double p_hi = 4.0) {
  std::uniform_real_distribution<double> q(-q_scale, q_scale);
  std::uniform_real_distribution<double> p(p_lo, p_hi);
  std::vector<double> qs(static_cast<std::size_t>(sites.size()));
  std::vector<double> ps(qs.size() - 1);
  for (auto& x : qs) x = q(rng);
  for (auto& x : ps) x = p(rng);
  return apjac::JacobiWindow(sites.lo, qs, ps);
}

// Dense section of a window, as the reference for the tridiagonal routines.
inline Eigen::MatrixXd dense(const apjac::JacobiWindow& J, apjac::IndexRange r) {
  const auto n = static_cast<Eigen::Index>(r.size());
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    M(i, i) = J.q(r.lo + i);
    if (i > 0) M(i, i - 1) = M(i - 1, i) = J.p(r.lo + i);
  }
  return M;
}

}  // namespace fixtures
