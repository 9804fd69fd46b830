#include "apjac/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "apjac/errors.hpp"
#include "apjac/renorm.hpp"
#include "apjac/tower.hpp"

namespace apjac {

double shift_metric(const JacobiWindow& J, std::int64_t k, const IndexRange& section) {
  if (section.empty() || !J.sites().contains(section) || !J.sites().contains(section.shifted(k))) {
    std::ostringstream os;
    os << "shift_metric: section [" << section.lo << ", " << section.hi << "] shifted by " << k
       << " leaves window [" << J.first() << ", " << J.last() << "]";
    throw WindowTooShort(os.str());
  }
  std::vector<double> dq;
  std::vector<double> dp;
  for (std::int64_t j = section.lo; j <= section.hi; ++j) {
    dq.push_back(J.q(j + k) - J.q(j));
    if (j > section.lo) dp.push_back(J.p(j + k) - J.p(j));
  }
  const auto ev = tridiagonal_eigenvalues(dq, dp);
  return std::max(std::abs(ev.front()), std::abs(ev.back()));
}

MetricReport padic_topology_table(const JacobiWindow& J, const std::vector<int>& radices, int l_max,
                                  const std::vector<std::int64_t>& ms, const IndexRange& section) {
  if (l_max < 0 || static_cast<std::size_t>(l_max) > radices.size())
    throw ValidationError("padic_topology_table: l_max exceeds the number of radices");
  MetricReport report;
  report.section = section;
  std::vector<double> ls;
  std::vector<double> rhos;
  std::int64_t place = 1;
  for (int l = 0; l <= l_max; ++l) {
    for (std::int64_t m : ms) {
      const std::int64_t k = place * m;
      const double rho = shift_metric(J, k, section);
      report.entries.push_back({l, m, k, rho});
      ls.push_back(l);
      rhos.push_back(rho);
    }
    if (l < l_max) place *= radices[static_cast<std::size_t>(l)];
  }
  const auto fit = fit_log_linear(ls, rhos);
  report.slope = fit.slope;
  report.rate = std::exp(fit.slope);
  return report;
}

BandReport spectrum_bands(const std::vector<ExpandingPolynomial>& levels, int level) {
  if (level < 0 || static_cast<std::size_t>(level) > levels.size())
    throw ValidationError("spectrum_bands: level exceeds the number of polynomials");
  if (levels.empty() && level > 0) throw ValidationError("spectrum_bands: no polynomials");
  const double xi = levels.empty() ? 0.0 : levels.front().xi();
  BandReport report;
  report.level = level;
  if (levels.empty()) return report;
  std::vector<Interval> bands{{-xi, xi}};
  for (int k = level; k-- > 0;) {
    std::vector<Interval> next;
    next.reserve(bands.size() * static_cast<std::size_t>(levels[static_cast<std::size_t>(k)].degree()));
    for (const auto& b : bands) {
      // Rounding can nudge a band edge past +-xi by an ulp.
      const Interval target{std::max(b.lo, -xi), std::min(b.hi, xi)};
      const auto pre = preimage_intervals(levels[static_cast<std::size_t>(k)], target);
      next.insert(next.end(), pre.begin(), pre.end());
    }
    std::sort(next.begin(), next.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    bands = std::move(next);
  }
  report.bands = std::move(bands);
  for (const auto& b : report.bands) report.total_measure += b.length();
  return report;
}

BandCoverage eigenvalue_band_coverage(const JacobiWindow& J, const BandReport& bands, const IndexRange& section) {
  BandCoverage out;
  for (double lambda : section_spectrum(J, section)) {
    const auto it = std::find_if(bands.bands.begin(), bands.bands.end(),
                                 [&](const Interval& b) { return b.contains(lambda, kBandDilation); });
    if (it != bands.bands.end()) ++out.inside; else ++out.outliers;
  }
  return out;
}

SeedPairGenerator default_seed_pairs(double xi) {
  return [xi](std::mt19937_64& rng, const IndexRange& sites) {
    std::uniform_real_distribution<double> base_q(-0.2 * xi, 0.2 * xi);
    std::uniform_real_distribution<double> base_p(0.15 * xi, 0.25 * xi);
    std::uniform_real_distribution<double> noise(-0.1 * xi, 0.1 * xi);
    auto one = [&] {
      const double q0 = base_q(rng);
      const double p0 = base_p(rng);
      const auto n = static_cast<std::size_t>(sites.size());
      std::vector<double> q(n);
      std::vector<double> p(n - 1);
      for (auto& x : q) x = q0 + noise(rng);
      for (auto& x : p) x = p0 + noise(rng);
      return JacobiWindow(sites.lo, std::move(q), std::move(p));
    };
    auto a = one();
    auto b = one();
    return std::pair{std::move(a), std::move(b)};
  };
}

double contraction_delta(const ExpandingPolynomial& T) {
  double delta = 0.0;
  for (double t : T.critical_values()) {
    const double r = std::abs(t) / T.xi();
    delta = std::max(delta, (r + 1.0) / ((r - 1.0) * (r - 1.0)));
  }
  return delta;
}

double closing_coupling_bound(const ExpandingPolynomial& T) {
  return (1.0 + contraction_delta(T) / 2.0) / (T.margin() - 1.0);
}

ProbeResult contraction_probe(const ExpandingPolynomial& T, int trials, std::uint64_t rng_seed,
                              const SeedPairGenerator& generator, int cf_depth, int blocks) {
  if (trials < 1) throw ValidationError("contraction_probe: trials must be >= 1");
  const auto gen = generator ? generator : default_seed_pairs(T.xi());
  std::mt19937_64 rng(rng_seed);
  const IndexRange sites{0, cf_depth + blocks};
  RenormOptions opts;
  opts.cf_depth = cf_depth;

  ProbeResult result;
  result.delta = contraction_delta(T);
  result.closing_bound = closing_coupling_bound(T);
  if (auto w = T.contractivity_warning()) result.warnings.push_back(*w);
  for (int t = 0; t < trials; ++t) {
    const auto [a, b] = gen(rng, sites);
    const double din = section_opnorm_diff(a, b, sites);
    const auto ra = renorm_step(a, T, opts);
    const auto rb = renorm_step(b, T, opts);
    const double dout = section_opnorm_diff(ra, rb, ra.sites());
    const double ratio = din > 0.0 ? dout / din : 0.0;
    result.ratios.push_back(ratio);
    result.max_ratio = std::max(result.max_ratio, ratio);
  }
  return result;
}

}  // namespace apjac
