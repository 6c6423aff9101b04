// Copyright 2026 The backflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "backflow/dqpt.hpp"

#include <numbers>

#include "catch_amalgamated.hpp"

using namespace backflow;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> k_grid(int n) {
  std::vector<double> k(n);
  for (int j = 0; j < n; ++j) k[j] = 2.0 * kPi * j / n;
  return k;
}

}  // namespace

TEST_CASE("toy closed form equals its defining integral") {
  for (double delta : {0.5, 1.0, 2.0})
    for (double tau : {-0.7, -0.01, 0.0, 0.003, 0.4, 1.5})
      CHECK(toy_closed_form(delta, tau) == Catch::Approx(toy_quadrature(delta, tau)).margin(1e-12));
}

TEST_CASE("toy value and one-sided slopes at the cusp") {
  for (double delta : {0.5, 1.0, 2.0}) {
    const auto c = toy_nonanalyticity(delta, {-0.1, 0.0, 0.1});
    CHECK(std::abs(c.G0 - 2.0 * delta / kPi * (std::log(delta) - 1.0)) < 1e-12);
    // The closed form falls into the cusp from the left and rises out of it.
    CHECK(c.left_derivative == Catch::Approx(-1.0).margin(1e-5));
    CHECK(c.right_derivative == Catch::Approx(1.0).margin(1e-5));
    REQUIRE(c.G.size() == 3);
  }
  CHECK_THROWS_AS(toy_nonanalyticity(0.0, {}), DomainError);
}

TEST_CASE("rate from returns skips and counts non-positive samples") {
  const std::vector<double> t{0.0, 1.0};
  const auto s = rate_from_returns(t, {0.0, 1.0}, {{1.0, std::exp(-2.0)}, {1.0, 0.0}});
  CHECK(s.flagged == 1);
  CHECK(s.G[0] == Catch::Approx(0.0).margin(1e-15));
  CHECK(s.G[1] == Catch::Approx(2.0));
}

TEST_CASE("cusp detector finds a kink and ignores smooth curves") {
  const auto times = uniform_grid(0.0, 4.0, 0.01);
  std::vector<double> kink, smooth;
  for (double t : times) {
    kink.push_back(std::sin(t) + 0.5 * std::abs(t - 2.005));
    smooth.push_back(std::sin(t) + 0.1 * t * t);
  }
  RateSeries a{times, {}, {}, kink, 0, {}};
  RateSeries b{times, {}, {}, smooth, 0, {}};
  const auto found = detect_cusps(a);
  REQUIRE(found.size() == 1);
  CHECK(std::abs(found[0] - 2.005) <= 0.01 + 1e-12);
  CHECK(detect_cusps(b).empty());
  CHECK_THROWS_AS(detect_cusps({0.0, 1.0, 3.0}, {0.0, 0.0, 0.0}, 3, 1.0), DomainError);
  CHECK_THROWS_AS(detect_cusps(times, kink, 1000, 1.0), DomainError);
}

TEST_CASE("pure loss: both two-band engines give the same rate") {
  const auto q = two_band_quench(0.2, 0.0);
  const auto times = uniform_grid(0.0, 2.0, 0.02);
  const auto ks = k_grid(16);
  const auto a = rate_function(q, ks, times, Method::exact);
  const auto b = rate_function(q, ks, times, Method::nonhermitian);
  for (std::size_t i = 0; i < times.size(); ++i) CHECK(std::abs(a.G[i] - b.G[i]) < 1e-10);
  CHECK_THROWS_AS(rate_function(q, ks, times, Method::dyson1), DomainError);
}

TEST_CASE("closed two-band quench has the known critical time") {
  // Unitary quench: where d0 is orthogonal to d1, g = cos^2(|d1| t), first
  // zero at t = pi / (2 |d1|).
  const auto q = two_band_quench(0.0, 0.0);
  // d0.d1 = (1/2 + cos k)(3/2 + cos k) + sin^2 k = 0  ->  cos k = -7/8.
  const double ks = std::acos(-7.0 / 8.0);
  const auto d = q.post.d(ks);
  const double tc = kPi / (2.0 * std::hypot(d[0], d[1]));
  CHECK(return_function(q, ks, tc, Method::exact) < 1e-12);
}

TEST_CASE("gain keeps the return probability away from zero") {
  const double ks = std::acos(-7.0 / 8.0);
  const auto q = two_band_quench(0.2, 0.01);
  const auto times = uniform_grid(0.0, 4.0, 0.01);
  const auto g = return_series(q, ks, times, Method::exact);
  CHECK(*std::min_element(g.begin(), g.end()) > 1e-5);
}

TEST_CASE("Fisher zeros solve the amplitude") {
  for (double k : {0.2, 1.3, 2.7}) {
    const auto c = fisher_coefficients(k, 0.5);
    CHECK(std::abs(c.c0 + c.cp + c.cm - 1.0) < 1e-12);
    for (int n = -1; n <= 3; ++n)
      for (const auto& t : fisher_times(c, n)) CHECK(std::abs(fisher_amplitude(c, t)) < 1e-10);
  }
  const auto z = fisher_zeros(k_grid(200), 0.5, 0, 3);
  CHECK(z.max_residual < 1e-8);
  CHECK(z.branches.size() == 8);
  const auto cross = fisher_crossings(z, 0.5, 8.0);
  CHECK(!cross.empty());
  for (const auto& x : cross) CHECK((x.t >= 0.0 && x.t <= 8.0));
}

TEST_CASE("Fisher amplitude follows the triplet dynamics") {
  const double k = 0.9, gg = 0.5;
  const auto c = fisher_coefficients(k, gg);
  const auto tri = hk_triplet_hamiltonian(k, gg);
  const Vec psi = hk_triplet_projector() * hk_two_particle_initial_state(k, hk_model(0.5));
  for (double t : {0.3, 1.7, 4.2}) {
    const cplx direct = psi.dot(expm(-I_unit * tri.h * t) * psi);
    CHECK(std::abs(direct - fisher_amplitude(c, t)) < 1e-12);
  }
}

TEST_CASE("pure-loss gap at k = 1") {
  const auto q = two_band_quench(0.2, 0.0);
  const cplx g = liouvillian_gap(q, 1.0);
  CHECK(g.real() == Catch::Approx(-0.1).margin(1e-10));
}

TEST_CASE("crossover deviation starts at zero and grows") {
  const auto c = crossover_time(two_band_quench(0.2, 1e-2), 1.0, 120.0, 0.05);
  CHECK(std::abs(c.deviation.front()) < 1e-14);
  REQUIRE(c.t_star.has_value());
  CHECK(*c.t_star > 0.0);
  CHECK(c.prediction == Catch::Approx(std::log(1e-2) / c.gap.real()));
}

TEST_CASE("flux average with one flux sample reduces to the Slater return") {
  const auto pre = chiral_model(0.5);
  const auto post = with_dissipators(chiral_model(1.5), 0.4, 0.0);
  const auto times = uniform_grid(0.0, 1.0, 0.05);
  const auto s = flux_averaged_rate(2, pre, post, 1, times);
  const auto chain = many_body_chain(2, post, 0.0);
  const Vec psi = slater_ground_state(2, pre, 0.0);
  const Mat heff = Mat(chain.heff);
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double g = std::norm(psi.dot(expm(-I_unit * heff * times[i]) * psi));
    CHECK(s.G[i] == Catch::Approx(-std::log(g)).margin(1e-10));
  }
  CHECK_THROWS_AS(flux_averaged_rate(kMaxCells + 1, pre, post, 1, times), CapacityError);
}
