#include "apjac/renorm.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>

#include "apjac/errors.hpp"
#include "index_math.hpp"
#include "parallel.hpp"

namespace apjac {

void RenormOptions::validate(int d) const {
  if (cf_depth < 8) throw ValidationError("RenormOptions: cf_depth must be >= 8");
  if (epsilon < 0 || epsilon >= d) {
    std::ostringstream os;
    os << "RenormOptions: block offset " << epsilon << " outside [0, " << d - 1 << "]";
    throw ValidationError(os.str());
  }
  if (!(tolerance > 0.0)) throw ValidationError("RenormOptions: tolerance must be positive");
}

double left_resolvent_cf(const JacobiWindow& Jt, std::int64_t s, double w, int depth, double xi) {
  if (std::abs(w) < xi * (1.0 + 1e-3)) {
    std::ostringstream os;
    os << "left_resolvent_cf: |w| = " << std::abs(w) << " too close to [-xi, xi]";
    throw NearSpectrum(os.str());
  }
  if (!Jt.sites().contains(IndexRange{s - depth, s})) {
    std::ostringstream os;
    os << "left_resolvent_cf: window [" << Jt.first() << ", " << Jt.last() << "] does not contain sites ["
       << s - depth << ", " << s << "]";
    throw WindowTooShort(os.str());
  }
  double g = w - Jt.q(s - depth);
  for (std::int64_t k = s - depth + 1; k <= s; ++k) {
    const double p = Jt.p(k);
    g = w - Jt.q(k) - p * p / g;
  }
  return 1.0 / g;
}

RenormBlock renorm_block(const JacobiWindow& Jt, std::int64_t s, const ExpandingPolynomial& T, int depth,
                         double tolerance) {
  if (!Jt.sites().contains(IndexRange{s - depth, s + 1})) {
    std::ostringstream os;
    os << "renorm_block: block " << s << " needs sites [" << s - depth << ", " << s + 1 << "]";
    throw WindowTooShort(os.str());
  }
  const int d = T.degree();
  BlockCharPoly bp{T, T.center(), {}};
  bp.critical_values.reserve(T.critical_points().size());
  for (double t : T.critical_values())
    bp.critical_values.push_back(1.0 / left_resolvent_cf(Jt, s, t, depth, T.xi()));

  auto block = stieltjes(measure_from_resolvent(bp), d);

  // The first diagonal entry is the first moment of the block measure, which
  // the construction pins to the centre of T.
  if (std::abs(block.q(0) - bp.shift) > tolerance * std::max(1.0, T.xi())) {
    std::ostringstream os;
    os.precision(17);
    os << "renorm_block: first diagonal entry " << block.q(0) << " differs from " << bp.shift;
    throw NumericalError(os.str());
  }

  double inner = 1.0;
  for (double p : block.off_diagonal()) inner *= p;
  const double closing = Jt.p(s + 1) / inner;
  return {s, std::move(block), closing, std::move(bp)};
}

IndexRange renormalizable_blocks(const IndexRange& input_sites, int depth) {
  return {input_sites.lo + depth, input_sites.hi - 1};
}

std::vector<RenormBlock> renorm_blocks(const JacobiWindow& Jt, const ExpandingPolynomial& T,
                                       const RenormOptions& opts) {
  opts.validate(T.degree());
  const IndexRange blocks = renormalizable_blocks(Jt.sites(), opts.cf_depth);
  if (blocks.empty()) {
    std::ostringstream os;
    os << "renorm_step: window of " << Jt.size() << " sites is too short for continued-fraction depth "
       << opts.cf_depth;
    throw WindowTooShort(os.str());
  }
  std::vector<std::optional<RenormBlock>> slots(static_cast<std::size_t>(blocks.size()));
  detail::parallel_for(slots.size(), [&](std::size_t i) {
    slots[i] = renorm_block(Jt, blocks.lo + static_cast<std::int64_t>(i), T, opts.cf_depth, opts.tolerance);
  });
  std::vector<RenormBlock> out;
  out.reserve(slots.size());
  for (auto& b : slots) out.push_back(std::move(*b));
  return out;
}

JacobiWindow renorm_step(const JacobiWindow& Jt, const ExpandingPolynomial& T, const RenormOptions& opts) {
  const auto blocks = renorm_blocks(Jt, T, opts);
  const int d = T.degree();
  std::vector<double> q;
  std::vector<double> p;
  q.reserve(blocks.size() * static_cast<std::size_t>(d));
  p.reserve(q.capacity());
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const auto& b = blocks[i];
    if (i > 0) p.push_back(blocks[i - 1].closing_p);
    q.insert(q.end(), b.block.diagonal().begin(), b.block.diagonal().end());
    p.insert(p.end(), b.block.off_diagonal().begin(), b.block.off_diagonal().end());
  }
  return JacobiWindow(opts.epsilon + d * blocks.front().s, std::move(q), std::move(p));
}

namespace {

// Central block indices j (sites eps + d j .. eps + d j + d - 1 of J) on which
// both windows can be compared with L blocks of context.
IndexRange comparison_blocks(const JacobiWindow& J, const JacobiWindow& Jt, int d, int epsilon, int L,
                             std::int64_t pad_sites) {
  const IndexRange in_J{detail::ceil_div(J.first() + pad_sites - epsilon, d),
                        detail::floor_div(J.last() - pad_sites - epsilon - d + 1, d)};
  const IndexRange in_Jt{Jt.first() + 1, Jt.last() - 1};
  const IndexRange avail = intersect(in_J, in_Jt);
  if (avail.size() < L) {
    std::ostringstream os;
    os << "need " << L << " comparable blocks, windows provide " << std::max<std::int64_t>(0, avail.size());
    throw WindowTooShort(os.str());
  }
  const std::int64_t lo = avail.lo + (avail.size() - L) / 2;
  return {lo, lo + L - 1};
}

std::vector<double> multiply(const JacobiWindow& J, const std::vector<double>& v) {
  const std::size_t n = v.size();
  const auto q = J.diagonal();
  const auto p = J.off_diagonal();
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    double acc = q[k] * v[k];
    if (k > 0) acc += p[k - 1] * v[k - 1];
    if (k + 1 < n) acc += p[k] * v[k + 1];
    out[k] = acc;
  }
  return out;
}

double jacobi_entry(const JacobiWindow& Jt, std::int64_t i, std::int64_t j) {
  if (i == j) return Jt.q(i);
  if (std::abs(i - j) == 1) return Jt.p(std::max(i, j));
  return 0.0;
}

}  // namespace

double verify_renorm_identity(const JacobiWindow& J, const JacobiWindow& Jt, const ExpandingPolynomial& T,
                              int epsilon, const std::vector<double>& z_samples, int L) {
  const int d = T.degree();
  const double xi = T.xi();
  if (L < 2) throw ValidationError("verify_renorm_identity: L must be >= 2");
  for (double z : z_samples) {
    if (std::abs(z) < 2.0 * xi) {
      std::ostringstream os;
      os << "verify_renorm_identity: z = " << z << " is closer than xi to [-xi, xi]";
      throw NearSpectrum(os.str());
    }
  }
  const IndexRange blocks = comparison_blocks(J, Jt, d, epsilon, L, 0);
  const IndexRange j_sites{epsilon + d * blocks.lo, epsilon + d * blocks.hi + d - 1};
  const IndexRange central = central_half(blocks);

  double worst = 0.0;
  for (double z : z_samples) {
    const double w = T(z);
    const double scale = T.derivative(z) / d;
    for (std::int64_t j = central.lo; j <= central.hi; ++j) {
      std::vector<double> e(static_cast<std::size_t>(j_sites.size()), 0.0);
      e[static_cast<std::size_t>(epsilon + d * j - j_sites.lo)] = 1.0;
      const auto x = solve_shifted(J, j_sites, z, e);

      std::vector<double> et(static_cast<std::size_t>(blocks.size()), 0.0);
      et[static_cast<std::size_t>(j - blocks.lo)] = 1.0;
      const auto xt = solve_shifted(Jt, blocks, w, et);

      for (std::int64_t i = central.lo; i <= central.hi; ++i) {
        const double lhs = x[static_cast<std::size_t>(epsilon + d * i - j_sites.lo)];
        const double rhs = xt[static_cast<std::size_t>(i - blocks.lo)] * scale;
        worst = std::max(worst, std::abs(lhs - rhs));
      }
    }
  }
  return worst;
}

std::pair<double, double> verify_polynomial_forms(const JacobiWindow& J, const JacobiWindow& Jt,
                                                  const ExpandingPolynomial& T, int epsilon, int L) {
  const int d = T.degree();
  const double xi = T.xi();
  const auto a = T.coefficients();
  // T(J) spreads a unit vector by d sites; keep compared rows d sites clear of the edges.
  const IndexRange blocks = comparison_blocks(J, Jt, d, epsilon, L, d);
  const IndexRange central = central_half(blocks);
  const IndexRange sites = J.sites();
  const std::size_t n = J.size();
  auto unit = [&](std::int64_t site) {
    std::vector<double> e(n, 0.0);
    e[static_cast<std::size_t>(site - sites.lo)] = 1.0;
    return e;
  };

  double res1 = 0.0;
  for (std::int64_t j = central.lo; j <= central.hi; ++j) {
    const auto e = unit(epsilon + d * j);
    std::vector<double> y = e;
    for (int i = d - 1; i >= 0; --i) {
      y = multiply(J, y);
      for (std::size_t k = 0; k < n; ++k) y[k] += a[static_cast<std::size_t>(i)] * e[k];
    }
    for (std::size_t k = 0; k < n; ++k) {
      const std::int64_t site = sites.lo + static_cast<std::int64_t>(k);
      double expected = 0.0;
      const std::int64_t off = site - epsilon;
      if (detail::floor_mod(off, d) == 0) {
        const std::int64_t jp = detail::floor_div(off, d);
        if (std::abs(jp - j) <= 1) expected = jacobi_entry(Jt, j, jp);
      }
      res1 = std::max(res1, std::abs(y[k] - expected));
    }
  }

  const std::vector<double> zs{-1.5 * xi, -0.5 * xi, 0.0, 0.75 * xi, 1.5 * xi};
  double res2 = 0.0;
  for (double z : zs) {
    // (T(z) - T(w)) / (z - w) = sum_i h_i(z) w^i, h_i(z) = sum_{k>i} a_k z^{k-i-1}.
    std::vector<double> h(static_cast<std::size_t>(d), 0.0);
    for (int i = 0; i < d; ++i) {
      double acc = 0.0;
      for (int k = d; k > i; --k) acc = acc * z + a[static_cast<std::size_t>(k)];
      h[static_cast<std::size_t>(i)] = acc;
    }
    const double target = T.derivative(z) / d;
    for (std::int64_t j = central.lo; j <= central.hi; ++j) {
      const auto e = unit(epsilon + d * j);
      std::vector<double> y(n, 0.0);
      for (int i = d - 1; i >= 0; --i) {
        y = multiply(J, y);
        for (std::size_t k = 0; k < n; ++k) y[k] += h[static_cast<std::size_t>(i)] * e[k];
      }
      for (std::int64_t jp = central.lo; jp <= central.hi; ++jp) {
        const double v = y[static_cast<std::size_t>(epsilon + d * jp - sites.lo)];
        res2 = std::max(res2, std::abs(v - (jp == j ? target : 0.0)));
      }
    }
  }
  return {res1, res2};
}

}  // namespace apjac
