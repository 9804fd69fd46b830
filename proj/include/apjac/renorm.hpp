#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "apjac/expanding_polynomial.hpp"
#include "apjac/inverse_spectral.hpp"
#include "apjac/jacobi.hpp"

namespace apjac {

struct RenormOptions {
  int cf_depth = 32;     // levels of the left continued fraction, >= 8
  int epsilon = 0;       // block offset digit, 0 <= epsilon < d
  double tolerance = 1e-10;

  void validate(int d) const;
};

/// <s|(w - J~_-(s))^{-1}|s>, J~_-(s) the restriction of J~ to sites <= s,
/// truncated after `depth` levels (the tail is closed with w - q~_{s-depth}).
/// With w = T(c) this is 1 / T^(s)(c).
double left_resolvent_cf(const JacobiWindow& Jt, std::int64_t s, double w, int depth, double xi);

/// One d x d block of the renormalised matrix (sites s d .. s d + d - 1 of
/// the epsilon = 0 solution) plus the coupling to the next block.
struct RenormBlock {
  std::int64_t s = 0;
  JacobiWindow block;  // sites 0 .. d-1
  double closing_p = 0.0;
  BlockCharPoly char_poly;
};

/// Builds block s: block values at the critical points from the left
/// continued fraction, the block polynomial, its spectral measure, the
/// Lanczos reconstruction, and finally the closing coupling
/// p_{sd+d} = p~_{s+1} / (p_{sd+1} ... p_{sd+d-1}).
/// Needs Jt on sites s - depth .. s + 1.
RenormBlock renorm_block(const JacobiWindow& Jt, std::int64_t s, const ExpandingPolynomial& T, int depth,
                         double tolerance = 1e-10);

/// Range of block indices s that renorm_step can build from a window.
IndexRange renormalizable_blocks(const IndexRange& input_sites, int depth);

/// J(epsilon, J~; T) on every block whose dependencies lie inside Jt.
/// The result covers [eps + d s_min, eps + d s_max + d - 1]; its entry at
/// eps + k equals entry k of the epsilon = 0 solution.
JacobiWindow renorm_step(const JacobiWindow& Jt, const ExpandingPolynomial& T, const RenormOptions& opts);

/// All blocks (with their block polynomials) of one step, for diagnostics.
std::vector<RenormBlock> renorm_blocks(const JacobiWindow& Jt, const ExpandingPolynomial& T,
                                       const RenormOptions& opts);

/// max |V*_e (z - J)^{-1} V_e - (T(z) - J~)^{-1} T'(z)/d| over the central
/// L/2 x L/2 entries, using sections of L sites of J~ and d L sites of J.
/// Each z must satisfy |z| >= 2 xi.
double verify_renorm_identity(const JacobiWindow& J, const JacobiWindow& Jt, const ExpandingPolynomial& T,
                              int epsilon, const std::vector<double>& z_samples, int L);

/// (max |V* T(J) - J~ V*|, max |V* (T(z) - T(J))/(z - J) V - T'(z)/d|) over
/// central rows; the second over five sample z.
std::pair<double, double> verify_polynomial_forms(const JacobiWindow& J, const JacobiWindow& Jt,
                                                  const ExpandingPolynomial& T, int epsilon, int L);

}  // namespace apjac
