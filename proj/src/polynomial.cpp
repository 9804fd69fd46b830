#include "apjac/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "apjac/errors.hpp"

namespace apjac::polynomial {

double magnitude(std::span<const double> c, double z) {
  double acc = 0.0;
  const double az = std::abs(z);
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * az + std::abs(*it);
  return acc;
}

Coeffs derivative(std::span<const double> c) {
  if (c.size() <= 1) return {0.0};
  Coeffs out(c.size() - 1);
  for (std::size_t k = 1; k < c.size(); ++k) out[k - 1] = static_cast<double>(k) * c[k];
  return out;
}

Coeffs add(std::span<const double> a, std::span<const double> b) {
  Coeffs out(std::max(a.size(), b.size()), 0.0);
  for (std::size_t k = 0; k < a.size(); ++k) out[k] += a[k];
  for (std::size_t k = 0; k < b.size(); ++k) out[k] += b[k];
  return out;
}

Coeffs multiply(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) return {};
  Coeffs out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

Coeffs scale(std::span<const double> a, double s) {
  Coeffs out(a.begin(), a.end());
  for (auto& x : out) x *= s;
  return out;
}

Coeffs compose(std::span<const double> outer, std::span<const double> inner) {
  Coeffs acc{outer.back()};
  for (int k = static_cast<int>(outer.size()) - 2; k >= 0; --k) {
    acc = multiply(acc, inner);
    acc[0] += outer[static_cast<std::size_t>(k)];
  }
  return acc;
}

Coeffs divide_linear(std::span<const double> c, double root, double& remainder) {
  const std::size_t n = c.size();
  if (n <= 1) {
    remainder = n == 1 ? c[0] : 0.0;
    return {0.0};
  }
  Coeffs q(n - 1);
  double carry = c[n - 1];
  for (std::size_t k = n - 1; k-- > 0;) {
    q[k] = carry;
    carry = c[k] + carry * root;
  }
  remainder = carry;
  return q;
}

double root_bound(std::span<const double> c) {
  const double lead = c.back();
  double m = 0.0;
  for (std::size_t k = 0; k + 1 < c.size(); ++k) m = std::max(m, std::abs(c[k] / lead));
  return 1.0 + m;
}

double bracketed_root(const std::function<double(double)>& f,
                      const std::function<double(double)>& df, double lo, double hi) {
  double flo = f(lo);
  double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0)) {
    std::ostringstream os;
    os << "no sign change on [" << lo << ", " << hi << "]";
    throw RootFindingError(os.str());
  }
  // Orient so that f(lo) < 0 < f(hi).
  const bool flip = flo > 0.0;
  auto g = [&](double z) { return flip ? -f(z) : f(z); };

  const double width0 = hi - lo;
  const double switch_width = df ? 1e-6 * std::max(1.0, width0) : 0.0;
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) return mid;
    if (hi - lo < switch_width) break;
    if (g(mid) < 0.0) lo = mid; else hi = mid;
  }
  if (!df) return 0.5 * (lo + hi);

  double z = 0.5 * (lo + hi);
  for (int it = 0; it < 100; ++it) {
    const double gz = g(z);
    if (gz == 0.0) return z;
    if (gz < 0.0) lo = z; else hi = z;
    const double slope = flip ? -df(z) : df(z);
    double next = slope != 0.0 ? z - gz / slope : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == z || next <= lo || next >= hi) return z;
    if (std::abs(next - z) <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(z)) return next;
    z = next;
  }
  return z;
}

std::vector<double> real_roots(std::span<const double> c) {
  const int n = degree(c);
  if (n < 1) throw RootFindingError("real_roots: constant polynomial");
  if (c.back() == 0.0) throw RootFindingError("real_roots: zero leading coefficient");
  if (n == 1) return {-c[0] / c[1]};

  const Coeffs dc = derivative(c);
  std::vector<double> crit;
  try {
    crit = real_roots(dc);
  } catch (const NonRealRoots&) {
    throw NonRealRoots("polynomial is not real-rooted (derivative has non-real roots)");
  }

  const double bound = root_bound(c);
  std::vector<double> edges;
  edges.reserve(crit.size() + 2);
  edges.push_back(-bound);
  edges.insert(edges.end(), crit.begin(), crit.end());
  edges.push_back(bound);

  auto f = [&](double z) { return eval(c, z); };
  auto df = [&](double z) { return eval(dc, z); };
  std::vector<double> roots;
  roots.reserve(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    const double a = edges[i];
    const double b = edges[i + 1];
    const double fa = f(a);
    const double fb = f(b);
    if (fa == 0.0 || fb == 0.0 || (fa > 0.0) == (fb > 0.0))
      throw NonRealRoots("polynomial is not real-rooted with simple roots");
    roots.push_back(bracketed_root(f, df, a, b));
  }
  return roots;
}

}  // namespace apjac::polynomial
