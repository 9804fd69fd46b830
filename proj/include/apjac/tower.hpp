#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "apjac/expanding_polynomial.hpp"
#include "apjac/jacobi.hpp"

namespace apjac {

/// Finite prefix of a point of the inverse limit lim Z / d_1 ... d_k Z:
/// digits e_0, e_1, ... with 0 <= e_k < d_{k+1}, read as the integer
/// e_0 + e_1 d_1 + e_2 d_1 d_2 + ...
class AdicInteger {
 public:
  AdicInteger(std::vector<int> radices, std::vector<int> digits);
  static AdicInteger zero(std::vector<int> radices);

  const std::vector<int>& radices() const { return radices_; }
  const std::vector<int>& digits() const { return digits_; }
  std::size_t size() const { return digits_.size(); }

  /// Representative of the first k digits in [0, d_1 ... d_k).
  std::int64_t value(std::size_t k) const;
  AdicInteger truncated(std::size_t k) const;

  friend bool operator==(const AdicInteger&, const AdicInteger&) = default;

 private:
  std::vector<int> radices_;
  std::vector<int> digits_;
};

/// Mixed-radix addition with carry (or borrow). Throws
/// DigitOverflowBeyondPrefix when the carry leaves the stored prefix.
AdicInteger adic_add(const AdicInteger& a, std::int64_t m);

/// Constant initial matrix at the innermost level.
struct Seed {
  double q = 0.0;
  double p = 0.0;
};

struct TowerConfig {
  double xi = 1.0;
  std::vector<ExpandingPolynomial> levels;  // T_1 (outermost) .. T_n (innermost)
  AdicInteger digits{{}, {}};               // e_0 .. at least n digits
  IndexRange output{0, 63};
  int cf_depth = 32;
  Seed seed;

  std::size_t depth() const { return levels.size(); }
  /// Same tower restricted to its outermost k levels.
  TowerConfig truncated(std::size_t k) const;
  void validate() const;
};

/// Windows needed at each level so that the requested output is fully
/// determined: element 0 is the output window, element k the window of the
/// level-k matrix, element n the seed window.
std::vector<IndexRange> required_window(const TowerConfig& config);

/// A_n = seed, A_{k} = J(e_k, A_{k+1}; T_{k+1}) down to A_0 = J_n. Every
/// level is cropped to its required window.
struct TowerRun {
  std::vector<JacobiWindow> levels;  // A_0 .. A_n
  const JacobiWindow& output() const { return levels.front(); }
};
TowerRun tower_run(const TowerConfig& config);

struct ConvergenceReport {
  std::vector<double> increments;  // coef_sup_dist(J_k, J_{k-1}) for k = 1 .. n
  double rate = 0.0;               // fitted geometric rate (NaN with < 2 positive increments)
  double amplitude = 0.0;
  std::vector<std::string> warnings;
};

struct TowerResult {
  JacobiWindow output;
  ConvergenceReport report;
};

/// Runs the tower at every depth 0 .. n and reports the per-level
/// increments on the central half of the output window.
TowerResult tower_iterate(const TowerConfig& config);

/// Contraction warnings for the levels of a tower.
std::vector<std::string> tower_warnings(const TowerConfig& config);

/// Nested route J(e0, J(e1, seed; T2); T1) against the composed route
/// J(e0 + e1 d1, seed; T2 o T1); central coef_sup_dist on `window`.
double chain_rule_check(const ExpandingPolynomial& T1, const ExpandingPolynomial& T2, int e0, int e1,
                        const Seed& seed, const IndexRange& window, int cf_depth = 32);

/// Recomputes the tower with digits adic_add(e, m) and compares against the
/// original output conjugated by the shift: J(e + m) = S^{m} J(e) S^{-m},
/// i.e. shift_conjugate(J(e), -m). Central coef_sup_dist.
double translation_consistency(const TowerConfig& config, std::int64_t m);

/// Least-squares fit log y = intercept + slope x over the positive y.
struct LogLinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  std::size_t points = 0;
};
LogLinearFit fit_log_linear(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace apjac
