#pragma once

#include <span>
#include <vector>

#include "apjac/expanding_polynomial.hpp"
#include "apjac/jacobi.hpp"
#include "apjac/polynomial.hpp"

namespace apjac {

/// Finitely supported probability measure: strictly increasing nodes with
/// positive weights summing to one.
class DiscreteMeasure {
 public:
  DiscreteMeasure(std::vector<double> nodes, std::vector<double> weights);

  /// Skips the normalisation check; weights need only be positive. Used for
  /// the non-normalised measures of the absolute-continuity perturbation test.
  static DiscreteMeasure unnormalized(std::vector<double> nodes, std::vector<double> weights);

  std::size_t size() const { return nodes_.size(); }
  const std::vector<double>& nodes() const { return nodes_; }
  const std::vector<double>& weights() const { return weights_; }
  double total_mass() const;

 private:
  DiscreteMeasure() = default;
  void check(bool normalized) const;

  std::vector<double> nodes_;
  std::vector<double> weights_;
};

/// The monic degree-d polynomial T^(s) attached to one block, stored by the
/// diagonal entry of its first site (`shift`, which fixes the z^{d-1}
/// coefficient) and its values at the critical points of T.
struct BlockCharPoly {
  ExpandingPolynomial T;
  double shift = 0.0;
  std::vector<double> critical_values;  // T^(s)(c_i), aligned with T.critical_points()
};

/// T^(s)(z) = (z - shift) T'(z)/d + sum_c T'(z) / ((z - c) T''(c)) T^(s)(c).
polynomial::Coeffs assemble_block_poly(const BlockCharPoly& bp);

/// Measure whose Stieltjes transform is numerator/denominator, where the
/// denominator is monic of degree n and the numerator monic of degree n-1.
DiscreteMeasure measure_from_rational(std::span<const double> numerator, std::span<const double> denominator);

/// Spectral measure of the block at its first site:
/// <0|(z - B)^{-1}|0> = (T'(z)/d) / T^(s)(z).
DiscreteMeasure measure_from_resolvent(const BlockCharPoly& bp);

/// Jacobi block (sites 0 .. d-1) whose spectral measure at site 0 is `mu`,
/// by Lanczos with full reorthogonalisation on diag(x) started from sqrt(w).
/// Weights are normalised internally, so scaling `mu` leaves the result unchanged.
JacobiWindow stieltjes(const DiscreteMeasure& mu, int d);

/// det(z - B) of a finite block, ascending coefficients.
polynomial::Coeffs characteristic_polynomial(const JacobiWindow& block);

/// max over critical points c of T of |p Q_{d-1}(c) P_d(c) + 1|, where P, Q
/// are the first- and second-kind orthonormal polynomials of the block and
/// `closing_p` is the coupling that closes the block into the chain.
double wronskian_check(const JacobiWindow& block, const ExpandingPolynomial& T, double closing_p);

/// Left and right sides of the product bound
/// 1 / (p_1 ... p_{d-1}) <= max_c 1 / (|T(c)|/xi - 1).
struct ProductBound {
  double inverse_product = 0.0;
  double bound = 0.0;
  bool holds() const { return inverse_product <= bound; }
};
ProductBound inner_coupling_bound(const JacobiWindow& block, const ExpandingPolynomial& T);

struct PerturbationGap {
  double max_deviation = 0.0;  // max_s |p~_s - p_s|
  double bound = 0.0;          // eps ||J(mu)||
};

/// Reconstructs the Jacobi blocks of mu and of the non-normalised measure
/// with weights f_j w_j, (1+eps)^{-1} <= f_j <= 1+eps, and compares their
/// off-diagonals against eps times the operator norm of J(mu).
PerturbationGap perturbation_gap(const DiscreteMeasure& mu, std::span<const double> f, double eps);

}  // namespace apjac
