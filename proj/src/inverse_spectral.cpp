#include "apjac/inverse_spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "apjac/errors.hpp"

namespace apjac {

namespace {

constexpr double kNodeGap = 1e-10;
constexpr double kMassTol = 1e-10;

double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

}  // namespace

DiscreteMeasure::DiscreteMeasure(std::vector<double> nodes, std::vector<double> weights)
    : nodes_(std::move(nodes)), weights_(std::move(weights)) {
  check(true);
}

DiscreteMeasure DiscreteMeasure::unnormalized(std::vector<double> nodes, std::vector<double> weights) {
  DiscreteMeasure mu;
  mu.nodes_ = std::move(nodes);
  mu.weights_ = std::move(weights);
  mu.check(false);
  return mu;
}

double DiscreteMeasure::total_mass() const { return std::accumulate(weights_.begin(), weights_.end(), 0.0); }

void DiscreteMeasure::check(bool normalized) const {
  if (nodes_.empty() || nodes_.size() != weights_.size())
    throw ValidationError("DiscreteMeasure: need equally many nodes and weights, at least one");
  for (std::size_t j = 0; j < nodes_.size(); ++j) {
    if (!std::isfinite(nodes_[j])) throw ValidationError("DiscreteMeasure: non-finite node");
    if (!(weights_[j] > 0.0)) throw ValidationError("DiscreteMeasure: weights must be positive");
    if (j > 0 && !(nodes_[j] > nodes_[j - 1]))
      throw ValidationError("DiscreteMeasure: nodes must be strictly increasing");
  }
  if (normalized && std::abs(total_mass() - 1.0) > 1e-12) {
    std::ostringstream os;
    os << "DiscreteMeasure: weights sum to " << total_mass() << ", not 1";
    throw ValidationError(os.str());
  }
}

polynomial::Coeffs assemble_block_poly(const BlockCharPoly& bp) {
  const auto& T = bp.T;
  const int d = T.degree();
  const auto& crit = T.critical_points();
  if (bp.critical_values.size() != crit.size())
    throw ValidationError("assemble_block_poly: need one value per critical point");

  const auto dT = T.derivative_coefficients();
  auto out = polynomial::multiply(std::vector<double>{-bp.shift, 1.0}, polynomial::scale(dT, 1.0 / d));
  for (std::size_t i = 0; i < crit.size(); ++i) {
    const double c = crit[i];
    const double second = T.second_derivatives()[i];
    if (std::abs(second) < 1e-8) {
      std::ostringstream os;
      os << "assemble_block_poly: |T''(" << c << ")| = " << std::abs(second) << " < 1e-8";
      throw DegenerateCritical(os.str());
    }
    double rem = 0.0;
    const auto quotient = polynomial::divide_linear(dT, c, rem);
    if (std::abs(rem) > 1e-9 * std::max(1.0, polynomial::magnitude(dT, c))) {
      std::ostringstream os;
      os << "assemble_block_poly: T'(z)/(z - " << c << ") leaves remainder " << rem;
      throw ValidationError(os.str());
    }
    out = polynomial::add(out, polynomial::scale(quotient, bp.critical_values[i] / second));
  }
  out.back() = 1.0;
  return out;
}

DiscreteMeasure measure_from_rational(std::span<const double> numerator, std::span<const double> denominator) {
  const int n = polynomial::degree(denominator);
  if (n < 1 || polynomial::degree(numerator) != n - 1)
    throw ValidationError("measure_from_rational: numerator degree must be one less than denominator degree");

  std::vector<double> nodes;
  try {
    nodes = polynomial::real_roots(denominator);
  } catch (const NonRealRoots& e) {
    throw NonRealRoots(std::string("block polynomial has non-real or repeated roots: ") + e.what());
  }
  for (std::size_t j = 1; j < nodes.size(); ++j)
    if (nodes[j] - nodes[j - 1] <= kNodeGap) throw NodeCollision("block polynomial has (nearly) repeated roots");

  const auto dden = polynomial::derivative(denominator);
  std::vector<double> weights;
  weights.reserve(nodes.size());
  for (double x : nodes) {
    const double w = polynomial::eval(numerator, x) / polynomial::eval(dden, x);
    if (!(w > 0.0)) {
      std::ostringstream os;
      os << "non-positive spectral weight " << w << " at node " << x;
      throw NegativeWeight(os.str());
    }
    weights.push_back(w);
  }
  const double mass = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (std::abs(mass - 1.0) > kMassTol) {
    std::ostringstream os;
    os << "spectral weights sum to " << mass << ", expected 1";
    throw NumericalError(os.str());
  }
  // Remove the last rounding so the measure is exactly normalised.
  for (auto& w : weights) w /= mass;
  return DiscreteMeasure(std::move(nodes), std::move(weights));
}

DiscreteMeasure measure_from_resolvent(const BlockCharPoly& bp) {
  const auto den = assemble_block_poly(bp);
  const auto num = polynomial::scale(bp.T.derivative_coefficients(), 1.0 / bp.T.degree());
  return measure_from_rational(num, den);
}

JacobiWindow stieltjes(const DiscreteMeasure& mu, int d) {
  if (d < 1 || static_cast<std::size_t>(d) != mu.size())
    throw ValidationError("stieltjes: measure must have exactly d nodes");
  const auto& x = mu.nodes();
  for (std::size_t j = 1; j < x.size(); ++j)
    if (x[j] - x[j - 1] < kNodeGap) throw NodeCollision("stieltjes: node gap below 1e-10");

  const auto n = static_cast<std::size_t>(d);
  const double mass = mu.total_mass();
  std::vector<std::vector<double>> basis;
  basis.reserve(n);
  std::vector<double> v(n);
  for (std::size_t j = 0; j < n; ++j) v[j] = std::sqrt(mu.weights()[j] / mass);
  basis.push_back(v);

  std::vector<double> q;
  std::vector<double> p;
  for (std::size_t k = 0; k < n; ++k) {
    const auto& vk = basis.back();
    std::vector<double> u(n);
    for (std::size_t j = 0; j < n; ++j) u[j] = x[j] * vk[j];
    q.push_back(dot(vk, u));
    if (k + 1 == n) break;
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& b : basis) {
        const double h = dot(b, u);
        for (std::size_t j = 0; j < n; ++j) u[j] -= h * b[j];
      }
    }
    const double beta = std::sqrt(dot(u, u));
    if (!(beta > 0.0)) throw NumericalError("stieltjes: Lanczos breakdown");
    p.push_back(beta);
    for (auto& uj : u) uj /= beta;
    basis.push_back(std::move(u));
  }
  return JacobiWindow(0, std::move(q), std::move(p));
}

polynomial::Coeffs characteristic_polynomial(const JacobiWindow& block) {
  const auto q = block.diagonal();
  const auto p = block.off_diagonal();
  polynomial::Coeffs prev{1.0};
  polynomial::Coeffs cur{-q[0], 1.0};
  for (std::size_t k = 1; k < q.size(); ++k) {
    auto next = polynomial::multiply(cur, std::vector<double>{-q[k], 1.0});
    next = polynomial::add(next, polynomial::scale(prev, -p[k - 1] * p[k - 1]));
    prev = std::move(cur);
    cur = std::move(next);
  }
  return cur;
}

double wronskian_check(const JacobiWindow& block, const ExpandingPolynomial& T, double closing_p) {
  const std::size_t d = block.size();
  if (d < 2) return 0.0;
  const auto q = block.diagonal();
  std::vector<double> pp(block.off_diagonal().begin(), block.off_diagonal().end());
  pp.push_back(closing_p);

  double worst = 0.0;
  for (double c : T.critical_points()) {
    // First kind: P_0 = 1; second kind: Q_0 = 0, Q_1 = 1/p_1.
    double p_prev = 1.0;
    double p_cur = (c - q[0]) / pp[0];
    double q_prev = 0.0;
    double q_cur = 1.0 / pp[0];
    double q_dm1 = d == 2 ? q_cur : 0.0;
    for (std::size_t k = 1; k < d; ++k) {
      const double p_next = ((c - q[k]) * p_cur - pp[k - 1] * p_prev) / pp[k];
      const double q_next = ((c - q[k]) * q_cur - pp[k - 1] * q_prev) / pp[k];
      p_prev = p_cur;
      p_cur = p_next;
      q_prev = q_cur;
      q_cur = q_next;
      if (k + 1 == d - 1) q_dm1 = q_cur;
    }
    worst = std::max(worst, std::abs(closing_p * q_dm1 * p_cur + 1.0));
  }
  return worst;
}

ProductBound inner_coupling_bound(const JacobiWindow& block, const ExpandingPolynomial& T) {
  double prod = 1.0;
  for (double p : block.off_diagonal()) prod *= p;
  double bound = 0.0;
  for (double t : T.critical_values()) bound = std::max(bound, 1.0 / (std::abs(t) / T.xi() - 1.0));
  return {1.0 / prod, bound};
}

PerturbationGap perturbation_gap(const DiscreteMeasure& mu, std::span<const double> f, double eps) {
  if (f.size() != mu.size()) throw ValidationError("perturbation_gap: one multiplier per node required");
  std::vector<double> w;
  for (std::size_t j = 0; j < f.size(); ++j) {
    if (f[j] < 1.0 / (1.0 + eps) * (1 - 1e-15) || f[j] > (1.0 + eps) * (1 + 1e-15))
      throw ValidationError("perturbation_gap: multiplier outside [(1+eps)^-1, 1+eps]");
    w.push_back(f[j] * mu.weights()[j]);
  }
  const int d = static_cast<int>(mu.size());
  const auto J = stieltjes(mu, d);
  const auto Jt = stieltjes(DiscreteMeasure::unnormalized(mu.nodes(), std::move(w)), d);
  double dev = 0.0;
  for (std::size_t k = 0; k < J.off_diagonal().size(); ++k)
    dev = std::max(dev, std::abs(J.off_diagonal()[k] - Jt.off_diagonal()[k]));
  const auto ev = tridiagonal_eigenvalues(J.diagonal(), J.off_diagonal());
  const double norm = std::max(std::abs(ev.front()), std::abs(ev.back()));
  return {dev, eps * norm};
}

}  // namespace apjac
