#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "apjac/errors.hpp"
#include "apjac/renorm.hpp"
#include "support.hpp"

using namespace apjac;
using fixtures::kXi;

namespace {

const double kOddCoupling = std::sqrt((132.0 + std::sqrt(17280.0)) / 2.0);

// Admissible random input: |q| + 2 max p <= xi.
JacobiWindow admissible(std::mt19937_64& rng, IndexRange sites) {
  return fixtures::random_window(rng, sites, 0.2 * kXi, 0.15 * kXi, 0.35 * kXi);
}

}  // namespace

TEST_CASE("left continued fraction") {
  SUBCASE("unit couplings") {
    const auto Jt = JacobiWindow::constant({0, 40}, 0.0, 1.0);
    const double t = (-100.0 - std::sqrt(9996.0)) / 2.0;
    CHECK(left_resolvent_cf(Jt, 35, -100.0, 30, 2.0) == doctest::Approx(1.0 / t).epsilon(1e-12));
    CHECK(left_resolvent_cf(Jt, 35, -100.0, 30, 2.0) == doctest::Approx(-0.01000100).epsilon(1e-6));
  }
  SUBCASE("decoupled") {
    // Couplings small enough that p^2 vanishes in double precision.
    const JacobiWindow Jt(0, std::vector<double>(20, 0.0), std::vector<double>(19, 1e-200));
    CHECK(left_resolvent_cf(Jt, 15, -50.0, 10, kXi) == 1.0 / -50.0);
  }
  SUBCASE("fixed point of the quadratic family") {
    const auto Jt = JacobiWindow::constant({0, 50}, 0.0, 6.0);
    const double r = left_resolvent_cf(Jt, 45, -132.0, 40, kXi);
    CHECK(1.0 / r == doctest::Approx(-66.0 - std::sqrt(66.0 * 66.0 - 36.0)).epsilon(1e-13));
    CHECK(r == doctest::Approx(-0.0075915).epsilon(1e-4));
  }
  SUBCASE("errors") {
    const auto Jt = JacobiWindow::constant({0, 50}, 0.0, 6.0);
    CHECK_THROWS_AS(left_resolvent_cf(Jt, 45, 12.0, 40, kXi), NearSpectrum);
    CHECK_THROWS_AS(left_resolvent_cf(Jt, 20, -132.0, 40, kXi), WindowTooShort);
  }
}

TEST_CASE("block of the quadratic fixed point") {
  const auto T = fixtures::quadratic132();
  const auto Jt = JacobiWindow::constant({0, 40}, 0.0, 6.0);
  const auto b = renorm_block(Jt, 35, T, 32);
  CHECK(b.block.size() == 2);
  CHECK(std::abs(b.block.q(0)) < 1e-12);
  CHECK(std::abs(b.block.q(1)) < 1e-12);
  CHECK(b.block.p(1) == doctest::Approx(kOddCoupling).epsilon(1e-12));
  CHECK(b.closing_p == doctest::Approx(6.0 / kOddCoupling).epsilon(1e-12));
  CHECK(b.block.p(1) * b.closing_p == doctest::Approx(6.0).epsilon(1e-14));
  CHECK_THROWS_AS(renorm_block(Jt, 40, T, 32), WindowTooShort);
}

TEST_CASE("first diagonal entry is the centre of T") {
  // Decoupled input with q~_s = 1 at the block site: the value at the critical
  // point is -132 - 1, and the block polynomial is z^2 - 133. Its first
  // diagonal entry is the centre 0 of T, not q~_s.
  const auto T = fixtures::quadratic132();
  std::vector<double> q(41, 0.0);
  q[35] = 1.0;
  const JacobiWindow Jt(0, q, std::vector<double>(40, 1e-200));
  const auto b = renorm_block(Jt, 35, T, 32);
  REQUIRE(b.char_poly.critical_values.size() == 1);
  CHECK(b.char_poly.critical_values[0] == doctest::Approx(-133.0).epsilon(1e-15));
  CHECK(std::abs(b.block.q(0)) < 1e-12);
  CHECK(std::abs(b.block.q(1)) < 1e-12);
  CHECK(b.block.p(1) == doctest::Approx(std::sqrt(133.0)));
}

TEST_CASE("product of the couplings of a block") {
  std::mt19937_64 rng(1);
  for (const auto& T : {fixtures::quadratic132(), fixtures::cubic75()}) {
    const auto Jt = admissible(rng, {0, 100});
    for (const auto& b : renorm_blocks(Jt, T, {})) {
      double prod = b.closing_p;
      for (double p : b.block.off_diagonal()) prod *= p;
      CHECK(prod == doctest::Approx(Jt.p(b.s + 1)).epsilon(1e-9));
      CHECK(std::abs(b.block.q(0) - T.center()) <= 1e-10);
      const auto bands = preimage_intervals(T, {-kXi, kXi});
      for (double x : section_spectrum(b.block, b.block.sites()))
        CHECK(std::any_of(bands.begin(), bands.end(), [&](const Interval& r) { return r.contains(x, 1e-8); }));
    }
  }
}

TEST_CASE("renormalisation step") {
  const auto T = fixtures::quadratic132();
  SUBCASE("constant input gives a two-periodic output") {
    const auto J = renorm_step(JacobiWindow::constant({0, 99}, 0.0, 6.0), T, {});
    CHECK(J.first() == 64);
    CHECK(J.last() == 64 + 2 * 67 - 1);
    for (std::int64_t k = J.first() + 1; k <= J.last(); ++k) {
      CHECK(std::abs(J.q(k)) < 1e-12);
      CHECK(J.p(k) == doctest::Approx(k % 2 ? kOddCoupling : 6.0 / kOddCoupling).epsilon(1e-12));
    }
  }
  SUBCASE("offset digit is a shift") {
    std::mt19937_64 rng(2);
    const auto Jt = admissible(rng, {0, 80});
    RenormOptions one;
    one.epsilon = 1;
    const auto J0 = renorm_step(Jt, T, {});
    const auto J1 = renorm_step(Jt, T, one);
    CHECK(J1.first() == J0.first() + 1);
    CHECK(coef_sup_dist(J1, shift_conjugate(J0, -1), J1.sites()) == 0.0);
  }
  SUBCASE("commutes with shifts of the input") {
    std::mt19937_64 rng(3);
    const auto Jt = admissible(rng, {0, 90});
    for (std::int64_t m : {-3, 1, 5}) {
      const auto lhs = renorm_step(shift_conjugate(Jt, m), T, {});
      const auto rhs = shift_conjugate(renorm_step(Jt, T, {}), 2 * m);
      CHECK(coef_sup_dist(lhs, rhs, intersect(lhs.sites(), rhs.sites())) <= 1e-9);
    }
  }
  SUBCASE("deterministic") {
    std::mt19937_64 rng(4);
    const auto Jt = admissible(rng, {0, 300});
    CHECK(renorm_step(Jt, T, {}) == renorm_step(Jt, T, {}));
  }
  SUBCASE("options") {
    const auto Jt = JacobiWindow::constant({0, 99}, 0.0, 6.0);
    RenormOptions bad;
    bad.cf_depth = 7;
    CHECK_THROWS_AS(renorm_step(Jt, T, bad), ValidationError);
    bad = {};
    bad.epsilon = 2;
    CHECK_THROWS_AS(renorm_step(Jt, T, bad), ValidationError);
    bad = {};
    bad.epsilon = -1;
    CHECK_THROWS_AS(renorm_step(Jt, T, bad), ValidationError);
    CHECK_THROWS_AS(renorm_step(JacobiWindow::constant({0, 32}, 0.0, 6.0), T, {}), WindowTooShort);
  }
}

TEST_CASE("output spectrum lies in the preimage bands") {
  std::mt19937_64 rng(5);
  for (const auto& T : {fixtures::quadratic132(), fixtures::cubic75()}) {
    const auto J = renorm_step(admissible(rng, {0, 120}), T, {});
    const auto bands = preimage_intervals(T, {-kXi, kXi});
    const IndexRange section = central_half(J.sites());
    int outliers = 0;
    for (double x : section_spectrum(J, section))
      if (std::none_of(bands.begin(), bands.end(), [&](const Interval& b) { return b.contains(x, 1e-6); })) ++outliers;
    CHECK(outliers <= 4);
  }
}

TEST_CASE("renormalisation identity") {
  const auto T = fixtures::quadratic132();
  const auto Jt = JacobiWindow::constant({0, 150}, 0.0, 6.0);
  const auto J = renorm_step(Jt, T, {});
  CHECK(verify_renorm_identity(J, Jt, T, 0, {3 * kXi}, 64) <= 1e-6);

  std::vector<double> p(J.off_diagonal().begin(), J.off_diagonal().end());
  p[p.size() / 2] += 0.5;
  const JacobiWindow bad(J.first(), {J.diagonal().begin(), J.diagonal().end()}, p);
  CHECK(verify_renorm_identity(bad, Jt, T, 0, {-3 * kXi, -2 * kXi, 2 * kXi, 2.5 * kXi, 4 * kXi}, 64) >= 1e-4);

  CHECK_THROWS_AS(verify_renorm_identity(J, Jt, T, 0, {5.0}, 64), NearSpectrum);
  CHECK_THROWS_AS(verify_renorm_identity(J, Jt, T, 0, {3 * kXi}, 1000), WindowTooShort);
}

TEST_CASE("renormalisation identity on random inputs and offsets") {
  std::mt19937_64 rng(6);
  for (const auto& T : {fixtures::quadratic132(), fixtures::cubic75()}) {
    const auto Jt = admissible(rng, {0, 160});
    for (int e = 0; e < T.degree(); ++e) {
      RenormOptions opts;
      opts.epsilon = e;
      const auto J = renorm_step(Jt, T, opts);
      CHECK(verify_renorm_identity(J, Jt, T, e, {-3 * kXi, -2 * kXi, 2 * kXi, 2.5 * kXi, 4 * kXi}, 64) <= 1e-6);
      const auto [r1, r2] = verify_polynomial_forms(J, Jt, T, e, 64);
      CHECK(r1 <= 1e-6);
      CHECK(r2 <= 1e-6);
    }
  }
}

TEST_CASE("polynomial forms detect a diagonal shift") {
  const auto T = fixtures::quadratic132();
  const auto Jt = JacobiWindow::constant({0, 150}, 0.0, 6.0);
  const auto J = renorm_step(Jt, T, {});
  const JacobiWindow shifted = JacobiWindow::constant(Jt.sites(), 0.1, 6.0);
  const auto [r1, r2] = verify_polynomial_forms(J, shifted, T, 0, 64);
  CHECK(r1 == doctest::Approx(0.1).epsilon(1e-9));
  CHECK(r2 <= 1e-6);
}

TEST_CASE("one step contracts distances") {
  const auto T = fixtures::quadratic132();
  std::mt19937_64 rng(7);
  const IndexRange sites{0, 64};
  for (int i = 0; i < 10; ++i) {
    const auto a = admissible(rng, sites);
    const auto b = admissible(rng, sites);
    const auto ra = renorm_step(a, T, {});
    const auto rb = renorm_step(b, T, {});
    CHECK(section_opnorm_diff(ra, rb, ra.sites()) < 0.2 * section_opnorm_diff(a, b, sites));
  }
}
