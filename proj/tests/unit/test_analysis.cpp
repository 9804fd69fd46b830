#include <doctest.h>

#include <cmath>
#include <random>

#include "apjac/analysis.hpp"
#include "apjac/errors.hpp"
#include "support.hpp"

using namespace apjac;
using fixtures::kXi;

TEST_CASE("shift metric") {
  const auto C = JacobiWindow::constant({0, 99}, 0.0, 6.0);
  CHECK(shift_metric(C, 1, {20, 79}) == 0.0);

  std::vector<double> q(100);
  for (std::size_t i = 0; i < q.size(); ++i) q[i] = i % 2 ? -1.0 : 1.0;
  const JacobiWindow alt(0, q, std::vector<double>(99, 6.0));
  CHECK(shift_metric(alt, 2, {20, 79}) == 0.0);
  CHECK(shift_metric(alt, 1, {20, 79}) == doctest::Approx(2.0));

  std::mt19937_64 rng(1);
  const auto J = fixtures::random_window(rng, {0, 199});
  const IndexRange s{60, 139};
  for (std::int64_t a : {1, 3, 7})
    for (std::int64_t b : {2, 5}) CHECK(shift_metric(J, a + b, s) <= shift_metric(J, a, s) + shift_metric(J, b, s) + 1e-12);
  CHECK(shift_metric(J, 4, s) == doctest::Approx(shift_metric(J, -4, {s.lo + 4, s.hi + 4})));

  CHECK_THROWS_AS(shift_metric(J, 80, s), WindowTooShort);
}

TEST_CASE("shift metric of a tower output decays along the radices") {
  const std::vector<ExpandingPolynomial> levels(4, fixtures::quadratic132());
  const auto J = tower_run(fixtures::tower(levels, {1, 0, 1, 1}, {0, 511})).output();
  const auto r = padic_topology_table(J, {2, 2, 2, 2}, 3, {1, 3}, {128, 383});
  REQUIRE(r.entries.size() == 8);
  for (int l = 1; l <= 3; ++l) {
    const auto& prev = r.entries[static_cast<std::size_t>(2 * (l - 1))];
    const auto& cur = r.entries[static_cast<std::size_t>(2 * l)];
    CHECK(cur.shift == 2 * prev.shift);
    CHECK(cur.rho < prev.rho);
    const auto& three = r.entries[static_cast<std::size_t>(2 * l + 1)];
    CHECK(three.rho <= 10.0 * cur.rho);
    CHECK(cur.rho <= 10.0 * three.rho);
  }
  CHECK(r.decaying());
  CHECK(r.rate < 1.0);

  const auto P = tower_run(fixtures::tower({fixtures::quadratic132()}, {0}, {0, 511})).output();
  const auto periodic = padic_topology_table(P, {2}, 1, {1}, {128, 383});
  CHECK(periodic.entries[1].rho < 1e-12);
}

TEST_CASE("spectrum bands") {
  const auto T = fixtures::quadratic132();
  const auto zero = spectrum_bands({T}, 0);
  REQUIRE(zero.bands.size() == 1);
  CHECK(zero.bands[0].lo == -kXi);
  CHECK(zero.bands[0].hi == kXi);

  const auto one = spectrum_bands({T, T}, 1);
  REQUIRE(one.bands.size() == 2);
  CHECK(one.bands[1].lo == doctest::Approx(std::sqrt(120.0)));

  const auto two = spectrum_bands({T, T}, 2);
  REQUIRE(two.bands.size() == 4);
  CHECK(two.total_measure < one.total_measure);
  for (const auto& b : two.bands) {
    bool nested = false;
    for (const auto& a : one.bands) nested = nested || a.contains(b, 1e-12);
    CHECK(nested);
  }
  CHECK(spectrum_bands({T, fixtures::cubic75()}, 2).bands.size() == 6);
  CHECK_THROWS_AS(spectrum_bands({T}, 2), ValidationError);
}

TEST_CASE("eigenvalues of a tower output fill the bands") {
  const auto T = fixtures::quadratic132();
  const auto J = tower_run(fixtures::tower({T, T}, {1, 0}, {0, 399})).output();
  const IndexRange section{100, 299};
  const auto cov = eigenvalue_band_coverage(J, spectrum_bands({T, T}, 1), section);
  CHECK(cov.inside + cov.outliers == 200);
  CHECK(cov.inside >= 196);

  const auto free = eigenvalue_band_coverage(JacobiWindow::constant({0, 99}, 0.0, 6.0), spectrum_bands({T}, 0), {0, 99});
  CHECK(free.outliers == 0);

  std::mt19937_64 rng(2);
  const auto R = fixtures::random_window(rng, {0, 199}, 2.0, 2.0, 4.0);
  CHECK(eigenvalue_band_coverage(R, spectrum_bands({T, T}, 2), {0, 199}).outliers > 20);
}

TEST_CASE("contraction constants") {
  // margin 10: (10 + 1) / (10 - 1)^2
  const auto T10 = make_chebyshev_family(2, chebyshev_scale_for_critical_magnitude(2, 10.0 * kXi), kXi);
  CHECK(contraction_delta(T10) == doctest::Approx(11.0 / 81.0));
  CHECK(closing_coupling_bound(T10) == doctest::Approx((1.0 + 11.0 / 162.0) / 9.0));
  CHECK(contraction_delta(fixtures::quadratic132()) == doctest::Approx(0.12));
}

TEST_CASE("contraction probe") {
  const auto T = fixtures::quadratic132();
  const auto r = contraction_probe(T, 10, 3);
  REQUIRE(r.ratios.size() == 10);
  CHECK(r.max_ratio <= 0.2);
  CHECK(r.max_ratio > 0.0);
  CHECK(r.delta == doctest::Approx(0.12));
  CHECK(r.warnings.empty());
  CHECK(contraction_probe(T, 10, 3).ratios == r.ratios);

  const auto weak = make_chebyshev_family(2, chebyshev_scale_for_critical_magnitude(2, 2.0 * kXi), kXi);
  CHECK_FALSE(contraction_probe(weak, 4, 1).warnings.empty());
  CHECK_THROWS_AS(contraction_probe(T, 0, 1), ValidationError);
}

TEST_CASE("seed pairs are admissible") {
  std::mt19937_64 rng(4);
  const auto gen = default_seed_pairs(kXi);
  for (int i = 0; i < 20; ++i) {
    const auto [a, b] = gen(rng, {0, 50});
    for (const auto* J : {&a, &b})
      for (std::int64_t k = 0; k <= 50; ++k) {
        double row = std::abs(J->q(k));
        if (k > 0) row += J->p(k);
        if (k < 50) row += J->p(k + 1);
        CHECK(row <= kXi);
      }
  }
}
