// Copyright 2026 The backflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "backflow/propagator.hpp"

#include <random>

#include "backflow/models.hpp"
#include "catch_amalgamated.hpp"

using namespace backflow;

namespace {

struct TwoBand {
  Liouvillian L;
  Vec rho0;
  Mat heff;
  Vec psi0;
};

TwoBand two_band(double k, double gl, double gg) {
  const auto post = with_dissipators(chiral_model(1.5), gl, gg);
  const Mat H = single_k_hamiltonian(k, post);
  const auto jumps = single_k_jump_operators(post);
  TwoBand p;
  p.L = restrict_weak_symmetry(build_liouvillian(H, jumps, build_basis(2)), 0);
  p.psi0 = single_k_initial_state(k, chiral_model(0.5));
  p.rho0 = p.L.restrict(vectorize(p.psi0 * p.psi0.adjoint()));
  p.heff = effective_hamiltonian(H, jumps);
  return p;
}

}  // namespace

TEST_CASE("uniform grid endpoints") {
  const auto g = uniform_grid(0.0, 1.0, 0.1);
  REQUIRE(g.size() == 11);
  CHECK(g.back() == Catch::Approx(1.0));
  CHECK_THROWS_AS(uniform_grid(0.0, 1.0, 0.0), DomainError);
}

TEST_CASE("matrix exponential of a diagonal generator") {
  Mat a = Mat::Zero(2, 2);
  a(0, 0) = cplx(0.0, 1.0);
  a(1, 1) = -2.0;
  const Mat e = expm(a);
  CHECK(std::abs(e(0, 0) - std::exp(cplx(0.0, 1.0))) < 1e-15);
  CHECK(std::abs(e(1, 1) - std::exp(-2.0)) < 1e-15);
}

TEST_CASE("pure loss: Liouvillian and non-Hermitian returns coincide") {
  for (double k : {0.3, 1.7, 2.9}) {
    const auto p = two_band(k, 0.25, 0.0);
    const auto times = uniform_grid(0.0, 5.0, 0.05);
    const auto ov = exact_overlaps(p.L.matrix, p.rho0, p.rho0, times);
    const auto amp = nonhermitian_amplitudes(p.heff, p.psi0, times);
    for (std::size_t i = 0; i < times.size(); ++i) CHECK(std::abs(ov[i].real() - std::norm(amp[i])) < 1e-12);
  }
}

TEST_CASE("exact evolution preserves trace and matches overlaps") {
  const auto p = two_band(0.9, 0.3, 0.1);
  const auto times = uniform_grid(0.0, 3.0, 0.1);
  const auto r = evolve_exact(p.L.matrix, p.rho0, times);
  const auto ov = exact_overlaps(p.L.matrix, p.rho0, p.rho0, times);
  for (std::size_t i = 0; i < times.size(); ++i) {
    CHECK(std::abs(p.L.trace(r.states[i]) - 1.0) < 1e-12);
    CHECK(std::abs(inner(p.rho0, r.states[i]) - ov[i]) < 1e-12);
  }
}

TEST_CASE("non-Hermitian density evolution") {
  const auto p = two_band(0.5, 0.2, 0.0);
  const auto times = uniform_grid(0.0, 1.0, 0.25);
  const Mat rho0 = p.psi0 * p.psi0.adjoint();
  const auto r = evolve_nonhermitian(p.heff, rho0, times);
  for (std::size_t i = 0; i < times.size(); ++i) {
    const Mat U = expm(-I_unit * p.heff * times[i]);
    CHECK((r.densities[i] - U * rho0 * U.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("sparse Taylor stepper agrees with the dense exponential") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> N;
  Mat h(12, 12);
  for (int i = 0; i < 12; ++i)
    for (int j = 0; j < 12; ++j) h(i, j) = cplx(N(rng), N(rng)) * 0.3;
  h = 0.5 * (h + h.adjoint()).eval();
  h.diagonal() -= Vec::Constant(12, cplx(0.0, 0.2));
  Vec psi = Vec::Zero(12);
  psi(0) = 1.0;
  const auto times = uniform_grid(0.0, 2.0, 0.01);
  const auto dense = nonhermitian_amplitudes(h, psi, times);
  const auto sparse = nonhermitian_amplitudes(SpMat(h.sparseView()), psi, times);
  for (std::size_t i = 0; i < times.size(); ++i) CHECK(std::abs(dense[i] - sparse[i]) < 1e-12);
}

TEST_CASE("first-order backflow matches a finite difference in the gain strength") {
  const double k = 1.0, gl = 0.2, t = 3.0;
  std::vector<double> residual;
  for (double lambda : {2e-3, 1e-3}) {
    const auto p = two_band(k, gl, lambda);
    const auto blocks = block_decompose(p.L);
    const double g = exact_overlaps(p.L.matrix, p.rho0, p.rho0, {t}).front().real();
    const double g0 = zeroth_order(blocks, p.rho0, t).real();
    const cplx b = backflow_first_order(blocks, p.rho0, t, {32, 1e-10, 1024});
    CHECK(b.real() > 0.0);
    CHECK(std::abs(b.imag()) < 1e-12);
    residual.push_back(std::abs(g - g0 - b.real()));
  }
  // Second-order remainder: halving lambda quarters it.
  CHECK(residual[0] / residual[1] == Catch::Approx(4.0).epsilon(0.05));
}

TEST_CASE("backflow is zero at t = 0 and without gain") {
  const auto p = two_band(0.7, 0.2, 0.0);
  const auto blocks = block_decompose(p.L);
  CHECK(backflow_first_order(blocks, p.rho0, 0.0) == cplx(0.0));
  CHECK(std::abs(backflow_first_order(blocks, p.rho0, 2.0)) == 0.0);
}

TEST_CASE("vanishing check") {
  // Gain c_B^dag n_A needs A occupied; loss empties A, so loss-then-gain dies.
  const auto b = build_basis(2);
  const Mat nA = operator_matrix(b, 0, OpKind::number);
  const Mat nB = operator_matrix(b, 1, OpKind::number);
  const Mat H = 0.7 * nA - 0.4 * nB;
  const std::vector<Mat> jumps{std::sqrt(0.3) * operator_matrix(b, 0, OpKind::annihilation),
                               std::sqrt(0.2) * operator_matrix(b, 1, OpKind::creation) * nA};
  const auto L = restrict_weak_symmetry(build_liouvillian(H, jumps, b), 0);
  CHECK(backflow_vanishing_check(block_decompose(L)));
  const auto p = two_band(1.0, 0.2, 0.1);
  CHECK_FALSE(backflow_vanishing_check(block_decompose(p.L)));
}

TEST_CASE("propagators reject bad input") {
  const Mat L = Mat::Zero(2, 2);
  CHECK_THROWS_AS(evolve_exact(L, Vec::Zero(3), {0.0, 1.0}), DomainError);
  CHECK_THROWS_AS(evolve_exact(L, Vec::Zero(2), {1.0, 0.0}), DomainError);
}
