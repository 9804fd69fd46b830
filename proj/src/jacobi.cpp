#include "apjac/jacobi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "apjac/errors.hpp"

namespace apjac {

namespace {

constexpr double kNearSpectrum = 1e-8;

void require_inside(const JacobiWindow& J, const IndexRange& r, const char* what) {
  if (r.empty() || !J.sites().contains(r)) {
    std::ostringstream os;
    os << what << ": range [" << r.lo << ", " << r.hi << "] not inside window [" << J.first() << ", " << J.last()
       << "]";
    throw EmptyOverlap(os.str());
  }
}

void check_resolvent_point(const JacobiWindow& block, std::complex<double> z) {
  const auto ev = tridiagonal_eigenvalues(block.diagonal(), block.off_diagonal());
  for (double lambda : ev) {
    if (std::abs(z - lambda) < kNearSpectrum) {
      std::ostringstream os;
      os << "resolvent_00: z = " << z << " lies within " << kNearSpectrum << " of eigenvalue " << lambda;
      throw NearSpectrum(os.str());
    }
  }
}

template <typename Scalar>
Scalar block_continued_fraction(const JacobiWindow& block, Scalar z) {
  const auto q = block.diagonal();
  const auto p = block.off_diagonal();
  Scalar g = z - q.back();
  for (std::size_t k = q.size() - 1; k-- > 0;) g = z - q[k] - p[k] * p[k] / g;
  return Scalar(1) / g;
}

}  // namespace

IndexRange intersect(const IndexRange& a, const IndexRange& b) {
  return {std::max(a.lo, b.lo), std::min(a.hi, b.hi)};
}

IndexRange central_half(const IndexRange& r) {
  const std::int64_t n = r.size();
  const std::int64_t keep = (n + 1) / 2;
  const std::int64_t lo = r.lo + (n - keep) / 2;
  return {lo, lo + keep - 1};
}

JacobiWindow::JacobiWindow(std::int64_t base, std::vector<double> q, std::vector<double> p)
    : base_(base), q_(std::move(q)), p_(std::move(p)) {
  if (q_.empty()) throw ValidationError("JacobiWindow: window must contain at least one site");
  if (p_.size() + 1 != q_.size()) throw ValidationError("JacobiWindow: need exactly size-1 couplings");
  for (std::size_t i = 0; i < p_.size(); ++i) {
    if (!(p_[i] > 0.0) || !std::isfinite(p_[i])) {
      std::ostringstream os;
      os << "JacobiWindow: coupling p(" << base_ + static_cast<std::int64_t>(i) + 1 << ") = " << p_[i]
         << " is not positive";
      throw ValidationError(os.str());
    }
  }
  for (double x : q_)
    if (!std::isfinite(x)) throw ValidationError("JacobiWindow: non-finite diagonal entry");
}

JacobiWindow JacobiWindow::constant(IndexRange sites, double q, double p) {
  const auto n = static_cast<std::size_t>(sites.size());
  return JacobiWindow(sites.lo, std::vector<double>(n, q), std::vector<double>(n > 0 ? n - 1 : 0, p));
}

std::size_t JacobiWindow::index(std::int64_t k) const {
  if (k < first() || k > last()) {
    std::ostringstream os;
    os << "JacobiWindow: site " << k << " outside [" << first() << ", " << last() << "]";
    throw WindowTooShort(os.str());
  }
  return static_cast<std::size_t>(k - base_);
}

JacobiWindow JacobiWindow::section(const IndexRange& r) const {
  if (r.empty() || !sites().contains(r)) {
    std::ostringstream os;
    os << "section [" << r.lo << ", " << r.hi << "] not inside window [" << first() << ", " << last() << "]";
    throw WindowTooShort(os.str());
  }
  const auto a = static_cast<std::ptrdiff_t>(r.lo - base_);
  const auto n = static_cast<std::ptrdiff_t>(r.size());
  return JacobiWindow(r.lo, std::vector<double>(q_.begin() + a, q_.begin() + a + n),
                      std::vector<double>(p_.begin() + a, p_.begin() + a + n - 1));
}

JacobiWindow shift_conjugate(const JacobiWindow& J, std::int64_t m) {
  return JacobiWindow(J.first() - m, {J.diagonal().begin(), J.diagonal().end()},
                      {J.off_diagonal().begin(), J.off_diagonal().end()});
}

double coef_sup_dist(const JacobiWindow& a, const JacobiWindow& b, const IndexRange& overlap) {
  require_inside(a, overlap, "coef_sup_dist");
  require_inside(b, overlap, "coef_sup_dist");
  double m = 0.0;
  for (std::int64_t k = overlap.lo; k <= overlap.hi; ++k) {
    m = std::max(m, std::abs(a.q(k) - b.q(k)));
    if (k > overlap.lo) m = std::max(m, std::abs(a.p(k) - b.p(k)));
  }
  return m;
}

std::vector<double> tridiagonal_eigenvalues(std::span<const double> diag, std::span<const double> off) {
  const std::size_t n = diag.size();
  std::vector<double> d(diag.begin(), diag.end());
  std::vector<double> e(n, 0.0);
  for (std::size_t i = 0; i + 1 < n && i < off.size(); ++i) e[i] = off[i];
  if (n <= 1) return d;

  constexpr double eps = std::numeric_limits<double>::epsilon();
  for (std::size_t l = 0; l < n; ++l) {
    int iter = 0;
    std::size_t m;
    do {
      for (m = l; m + 1 < n; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= eps * dd) break;
      }
      if (m != l) {
        if (++iter > 64) throw NumericalError("tridiagonal QL did not converge");
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
        double s = 1.0;
        double c = 1.0;
        double p = 0.0;
        bool underflow = false;
        for (std::size_t i = m; i-- > l;) {
          double f = s * e[i];
          const double b = c * e[i];
          r = std::hypot(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            underflow = true;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
        }
        if (underflow) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
  std::sort(d.begin(), d.end());
  return d;
}

std::vector<double> section_spectrum(const JacobiWindow& J, const IndexRange& range) {
  const auto s = J.section(range);
  return tridiagonal_eigenvalues(s.diagonal(), s.off_diagonal());
}

double section_opnorm_diff(const JacobiWindow& a, const JacobiWindow& b, const IndexRange& range) {
  require_inside(a, range, "section_opnorm_diff");
  require_inside(b, range, "section_opnorm_diff");
  std::vector<double> dq;
  std::vector<double> dp;
  for (std::int64_t k = range.lo; k <= range.hi; ++k) {
    dq.push_back(a.q(k) - b.q(k));
    if (k > range.lo) dp.push_back(a.p(k) - b.p(k));
  }
  const auto ev = tridiagonal_eigenvalues(dq, dp);
  return std::max(std::abs(ev.front()), std::abs(ev.back()));
}

double resolvent_00(const JacobiWindow& block, double z) {
  check_resolvent_point(block, z);
  return block_continued_fraction(block, z);
}

std::complex<double> resolvent_00(const JacobiWindow& block, std::complex<double> z) {
  check_resolvent_point(block, z);
  return block_continued_fraction(block, z);
}

std::vector<double> solve_shifted(const JacobiWindow& J, const IndexRange& range, double w,
                                  std::span<const double> rhs) {
  const auto s = J.section(range);
  const auto q = s.diagonal();
  const auto p = s.off_diagonal();
  const std::size_t n = q.size();
  if (rhs.size() != n) throw ValidationError("solve_shifted: right-hand side has wrong length");
  // Thomas algorithm on the symmetric tridiagonal w - M (sub/super diagonal -p).
  std::vector<double> c(n, 0.0);
  std::vector<double> x(rhs.begin(), rhs.end());
  double denom = w - q[0];
  if (denom == 0.0) throw NearSpectrum("solve_shifted: singular pivot");
  if (n > 1) c[0] = -p[0] / denom;
  x[0] /= denom;
  for (std::size_t i = 1; i < n; ++i) {
    denom = (w - q[i]) + p[i - 1] * c[i - 1];
    if (denom == 0.0) throw NearSpectrum("solve_shifted: singular pivot");
    if (i + 1 < n) c[i] = -p[i] / denom;
    x[i] = (x[i] + p[i - 1] * x[i - 1]) / denom;
  }
  for (std::size_t i = n - 1; i-- > 0;) x[i] -= c[i] * x[i + 1];
  return x;
}

}  // namespace apjac
