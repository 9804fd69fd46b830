#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

namespace apjac {

/// Inclusive range of integer sites [lo, hi].
struct IndexRange {
  std::int64_t lo = 0;
  std::int64_t hi = -1;

  std::int64_t size() const { return hi >= lo ? hi - lo + 1 : 0; }
  bool empty() const { return hi < lo; }
  bool contains(std::int64_t k) const { return k >= lo && k <= hi; }
  bool contains(const IndexRange& r) const { return r.empty() || (r.lo >= lo && r.hi <= hi); }
  IndexRange shifted(std::int64_t m) const { return {lo + m, hi + m}; }
  friend bool operator==(const IndexRange&, const IndexRange&) = default;
};

IndexRange intersect(const IndexRange& a, const IndexRange& b);
/// The middle half of r (length ceil(n/2), centred).
IndexRange central_half(const IndexRange& r);

/// Coefficients of a two-sided Jacobi matrix on a finite window of sites.
/// q(k) is the diagonal at site k, p(k) > 0 couples sites k-1 and k; the
/// window stores p(k) for lo < k <= hi.
class JacobiWindow {
 public:
  JacobiWindow() = default;
  /// `q` covers sites base .. base + q.size() - 1, `p` the couplings
  /// p(base+1) .. p(base + q.size() - 1). All p must be positive.
  JacobiWindow(std::int64_t base, std::vector<double> q, std::vector<double> p);

  static JacobiWindow constant(IndexRange sites, double q, double p);

  IndexRange sites() const { return {base_, base_ + static_cast<std::int64_t>(q_.size()) - 1}; }
  std::int64_t first() const { return base_; }
  std::int64_t last() const { return base_ + static_cast<std::int64_t>(q_.size()) - 1; }
  std::size_t size() const { return q_.size(); }

  double q(std::int64_t k) const { return q_[index(k)]; }
  /// Coupling between k-1 and k; requires first() < k <= last().
  double p(std::int64_t k) const { return p_[index(k) - 1]; }

  std::span<const double> diagonal() const { return q_; }
  std::span<const double> off_diagonal() const { return p_; }

  /// Sub-window restricted to `r` (must lie inside sites()).
  JacobiWindow section(const IndexRange& r) const;

  friend bool operator==(const JacobiWindow&, const JacobiWindow&) = default;

 private:
  std::size_t index(std::int64_t k) const;

  std::int64_t base_ = 0;
  std::vector<double> q_;
  std::vector<double> p_;
};

/// S^{-m} J S^{m}: the coefficient at site k of the result is the
/// coefficient at site k + m of J.
JacobiWindow shift_conjugate(const JacobiWindow& J, std::int64_t m);

/// sup over `overlap` of max(|dq_k|, |dp_k|), couplings internal to overlap.
double coef_sup_dist(const JacobiWindow& a, const JacobiWindow& b, const IndexRange& overlap);

/// Eigenvalues of a symmetric tridiagonal matrix (implicit-shift QL),
/// ascending. `off` has diag.size() - 1 entries of either sign.
std::vector<double> tridiagonal_eigenvalues(std::span<const double> diag, std::span<const double> off);

std::vector<double> section_spectrum(const JacobiWindow& J, const IndexRange& range);

/// ||section(J1 - J2)||_op on `range`.
double section_opnorm_diff(const JacobiWindow& a, const JacobiWindow& b, const IndexRange& range);

/// <0|(z - B)^{-1}|0> for a finite block B, via the continued fraction
/// closed from the bottom of the block. Throws NearSpectrum when z is
/// within 1e-8 of an eigenvalue of B.
double resolvent_00(const JacobiWindow& block, double z);
std::complex<double> resolvent_00(const JacobiWindow& block, std::complex<double> z);

/// Solve (w - M) x = rhs for the finite section M = J|range, where the
/// caller guarantees w - M is definite (|w| exceeds the section norm).
std::vector<double> solve_shifted(const JacobiWindow& J, const IndexRange& range, double w,
                                  std::span<const double> rhs);

}  // namespace apjac
