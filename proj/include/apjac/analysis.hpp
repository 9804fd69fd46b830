#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "apjac/expanding_polynomial.hpp"
#include "apjac/jacobi.hpp"

namespace apjac {

/// Finite-section estimate of rho_J(k) = ||S^{-k} J S^k - J|| on `section`.
double shift_metric(const JacobiWindow& J, std::int64_t k, const IndexRange& section);

struct MetricEntry {
  int l = 0;
  std::int64_t m = 0;
  std::int64_t shift = 0;  // d_1 ... d_l m
  double rho = 0.0;
};

struct MetricReport {
  std::vector<MetricEntry> entries;
  IndexRange section;
  double slope = 0.0;  // least-squares slope of log rho against l, positive entries only
  double rate = 0.0;   // exp(slope)
  bool decaying() const { return slope < 0.0; }
};

/// rho(d_1 ... d_l m) for l = 0 .. l_max and every m in `ms`.
MetricReport padic_topology_table(const JacobiWindow& J, const std::vector<int>& radices, int l_max,
                                  const std::vector<std::int64_t>& ms, const IndexRange& section);

struct BandReport {
  int level = 0;
  std::vector<Interval> bands;
  double total_measure = 0.0;
};

/// (T_l o ... o T_1)^{-1}([-xi, xi]) as nested preimages.
BandReport spectrum_bands(const std::vector<ExpandingPolynomial>& levels, int level);

struct BandCoverage {
  std::size_t inside = 0;
  std::size_t outliers = 0;
};

inline constexpr double kBandDilation = 1e-6;
inline constexpr std::size_t kMaxEdgeOutliers = 4;

BandCoverage eigenvalue_band_coverage(const JacobiWindow& J, const BandReport& bands, const IndexRange& section);

/// Random pair of admissible inputs on `sites` (spectrum inside [-xi, xi]).
using SeedPairGenerator = std::function<std::pair<JacobiWindow, JacobiWindow>(std::mt19937_64&, const IndexRange&)>;

/// Constant-plus-noise coefficients with noise amplitude 0.1 xi and
/// |q_k| + p_k + p_{k+1} <= xi.
SeedPairGenerator default_seed_pairs(double xi);

struct ProbeResult {
  double max_ratio = 0.0;
  std::vector<double> ratios;
  double delta = 0.0;          // max_c (|T(c)|/xi + 1) / (|T(c)|/xi - 1)^2
  double closing_bound = 0.0;  // (1 + delta/2) / (margin - 1)
  std::vector<std::string> warnings;
};

/// Output-to-input operator-norm distance ratios of one renormalisation
/// step over `trials` random input pairs.
ProbeResult contraction_probe(const ExpandingPolynomial& T, int trials, std::uint64_t rng_seed,
                              const SeedPairGenerator& generator = {}, int cf_depth = 32, int blocks = 32);

/// Per-coefficient constants of the contraction estimate.
double contraction_delta(const ExpandingPolynomial& T);
double closing_coupling_bound(const ExpandingPolynomial& T);

}  // namespace apjac
