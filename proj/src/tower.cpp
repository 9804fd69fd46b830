#include "apjac/tower.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "apjac/errors.hpp"
#include "apjac/renorm.hpp"
#include "index_math.hpp"

namespace apjac {

AdicInteger::AdicInteger(std::vector<int> radices, std::vector<int> digits)
    : radices_(std::move(radices)), digits_(std::move(digits)) {
  if (digits_.size() > radices_.size()) throw ValidationError("AdicInteger: more digits than radices");
  for (std::size_t k = 0; k < radices_.size(); ++k)
    if (radices_[k] < 2) throw ValidationError("AdicInteger: radices must be >= 2");
  for (std::size_t k = 0; k < digits_.size(); ++k) {
    if (digits_[k] < 0 || digits_[k] >= radices_[k]) {
      std::ostringstream os;
      os << "AdicInteger: digit e_" << k << " = " << digits_[k] << " outside [0, " << radices_[k] - 1 << "]";
      throw ValidationError(os.str());
    }
  }
}

AdicInteger AdicInteger::zero(std::vector<int> radices) {
  std::vector<int> digits(radices.size(), 0);
  return AdicInteger(std::move(radices), std::move(digits));
}

std::int64_t AdicInteger::value(std::size_t k) const {
  if (k > digits_.size()) throw ValidationError("AdicInteger: not enough stored digits");
  std::int64_t v = 0;
  std::int64_t place = 1;
  for (std::size_t i = 0; i < k; ++i) {
    v += digits_[i] * place;
    place *= radices_[i];
  }
  return v;
}

AdicInteger AdicInteger::truncated(std::size_t k) const {
  if (k > digits_.size()) throw ValidationError("AdicInteger: not enough stored digits");
  return AdicInteger({radices_.begin(), radices_.begin() + static_cast<std::ptrdiff_t>(k)},
                     {digits_.begin(), digits_.begin() + static_cast<std::ptrdiff_t>(k)});
}

AdicInteger adic_add(const AdicInteger& a, std::int64_t m) {
  std::vector<int> digits = a.digits();
  std::int64_t carry = m;
  for (std::size_t k = 0; k < digits.size() && carry != 0; ++k) {
    const std::int64_t r = a.radices()[k];
    const std::int64_t v = digits[k] + carry;
    digits[k] = static_cast<int>(detail::floor_mod(v, r));
    carry = detail::floor_div(v, r);
  }
  if (carry != 0) {
    std::ostringstream os;
    os << "adic_add: adding " << m << " carries beyond the " << digits.size() << " stored digits";
    throw DigitOverflowBeyondPrefix(os.str());
  }
  return AdicInteger(a.radices(), std::move(digits));
}

TowerConfig TowerConfig::truncated(std::size_t k) const {
  TowerConfig c = *this;
  c.levels.assign(levels.begin(), levels.begin() + static_cast<std::ptrdiff_t>(k));
  return c;
}

void TowerConfig::validate() const {
  if (!(xi > 0.0)) throw ValidationError("tower: xi must be positive");
  if (cf_depth < 8) throw ValidationError("tower: cf_depth must be >= 8");
  if (output.empty()) throw ValidationError("tower: empty output window");
  if (digits.size() < levels.size()) {
    std::ostringstream os;
    os << "tower: " << levels.size() << " levels need at least as many digits, got " << digits.size();
    throw ValidationError(os.str());
  }
  for (std::size_t k = 0; k < levels.size(); ++k) {
    if (std::abs(levels[k].xi() - xi) > 1e-12 * xi) throw ValidationError("tower: all levels must share xi");
    if (digits.radices()[k] != levels[k].degree()) {
      std::ostringstream os;
      os << "tower: radix d_" << k + 1 << " = " << digits.radices()[k] << " does not match deg T_" << k + 1
         << " = " << levels[k].degree();
      throw ValidationError(os.str());
    }
  }
  if (!(seed.p > 0.0)) throw ValidationError("tower: seed coupling p must be positive");
  if (std::abs(seed.q) + 2.0 * seed.p > xi * (1.0 + 1e-9)) {
    std::ostringstream os;
    os << "tower: seed |q| + 2p = " << std::abs(seed.q) + 2.0 * seed.p << " exceeds xi = " << xi;
    throw ValidationError(os.str());
  }
}

std::vector<IndexRange> required_window(const TowerConfig& config) {
  std::vector<IndexRange> out{config.output};
  for (std::size_t k = 0; k < config.depth(); ++k) {
    const IndexRange& w = out.back();
    const std::int64_t d = config.levels[k].degree();
    const std::int64_t e = config.digits.digits()[k];
    // Block s needs sites s - N .. s + 1 one level in.
    out.push_back({detail::floor_div(w.lo - e, d) - config.cf_depth, detail::ceil_div(w.hi - e, d) + 1});
  }
  return out;
}

TowerRun tower_run(const TowerConfig& config) {
  config.validate();
  const auto windows = required_window(config);
  const std::size_t n = config.depth();
  std::vector<JacobiWindow> levels(n + 1);
  levels[n] = JacobiWindow::constant(windows[n], config.seed.q, config.seed.p);
  for (std::size_t k = n; k-- > 0;) {
    RenormOptions opts;
    opts.cf_depth = config.cf_depth;
    opts.epsilon = config.digits.digits()[k];
    const auto next = renorm_step(levels[k + 1], config.levels[k], opts);
    if (!next.sites().contains(windows[k])) {
      std::ostringstream os;
      os << "tower: level " << k << " covers [" << next.first() << ", " << next.last() << "], need ["
         << windows[k].lo << ", " << windows[k].hi << "]";
      throw InsufficientWindow(os.str());
    }
    levels[k] = next.section(windows[k]);
  }
  return {std::move(levels)};
}

std::vector<std::string> tower_warnings(const TowerConfig& config) {
  std::vector<std::string> out;
  for (std::size_t k = 0; k < config.depth(); ++k)
    if (auto w = config.levels[k].contractivity_warning()) out.push_back("level " + std::to_string(k + 1) + ": " + *w);
  return out;
}

LogLinearFit fit_log_linear(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
    if (!(y[i] > 0.0) || !std::isfinite(y[i])) continue;
    const double ly = std::log(y[i]);
    sx += x[i];
    sy += ly;
    sxx += x[i] * x[i];
    sxy += x[i] * ly;
    ++n;
  }
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  if (n < 2) return {nan, nan, n};
  const double denom = static_cast<double>(n) * sxx - sx * sx;
  if (denom == 0.0) return {nan, nan, n};
  const double slope = (static_cast<double>(n) * sxy - sx * sy) / denom;
  const double intercept = (sy - slope * sx) / static_cast<double>(n);
  return {slope, intercept, n};
}

TowerResult tower_iterate(const TowerConfig& config) {
  config.validate();
  const std::size_t n = config.depth();
  const IndexRange central = central_half(config.output);

  TowerResult result{tower_run(config).output(), {}};
  JacobiWindow previous = JacobiWindow::constant(config.output, config.seed.q, config.seed.p);
  std::vector<double> ks;
  for (std::size_t k = 1; k <= n; ++k) {
    JacobiWindow current = k == n ? result.output : tower_run(config.truncated(k)).output();
    result.report.increments.push_back(coef_sup_dist(current, previous, central));
    ks.push_back(static_cast<double>(k));
    previous = std::move(current);
  }
  const auto fit = fit_log_linear(ks, result.report.increments);
  result.report.rate = std::exp(fit.slope);
  result.report.amplitude = std::exp(fit.intercept);
  result.report.warnings = tower_warnings(config);
  return result;
}

double chain_rule_check(const ExpandingPolynomial& T1, const ExpandingPolynomial& T2, int e0, int e1,
                        const Seed& seed, const IndexRange& window, int cf_depth) {
  TowerConfig nested;
  nested.xi = T1.xi();
  nested.levels = {T1, T2};
  nested.digits = AdicInteger({T1.degree(), T2.degree()}, {e0, e1});
  nested.output = window;
  nested.cf_depth = cf_depth;
  nested.seed = seed;

  const auto composite = compose(T2, T1);
  TowerConfig composed = nested;
  composed.levels = {composite};
  composed.digits = AdicInteger({composite.degree()}, {e0 + e1 * T1.degree()});

  const auto a = tower_run(nested).output();
  const auto b = tower_run(composed).output();
  return coef_sup_dist(a, b, central_half(window));
}

double translation_consistency(const TowerConfig& config, std::int64_t m) {
  if (m == 0) return 0.0;
  TowerConfig moved = config;
  moved.digits = adic_add(config.digits, m);

  TowerConfig original = config;
  original.output = config.output.shifted(-m);
  const auto reference = shift_conjugate(tower_run(original).output(), -m);
  const auto recomputed = tower_run(moved).output();
  return coef_sup_dist(recomputed, reference, central_half(config.output));
}

}  // namespace apjac
