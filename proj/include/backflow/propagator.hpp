// Copyright 2026 The backflow Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "backflow/common.hpp"
#include "backflow/liouvillian.hpp"

namespace backflow {

enum class Method { exact, nonhermitian, dyson1 };

struct PropagationResult {
  std::vector<double> times;
  std::vector<Vec> states;      // exact: vectorized rho in the Liouvillian's rows
  std::vector<Mat> densities;   // nonhermitian: unnormalized e^{-iHt} rho e^{iH^dag t}
  Method method = Method::exact;
};

// t_k = t0 + k dt, k = 0..round((t1 - t0) / dt).
std::vector<double> uniform_grid(double t0, double t1, double dt);

Mat expm(const Mat& a);

// Throws DomainError for a bad grid, NumericError on non-finite output.
PropagationResult evolve_exact(const Mat& L, const Vec& rho0, const std::vector<double>& times);
PropagationResult evolve_nonhermitian(const Mat& heff, const Mat& rho0, const std::vector<double>& times);

// <<a| e^{L t} |b>> on a grid, without storing the states.
std::vector<cplx> exact_overlaps(const Mat& L, const Vec& bra, const Vec& ket, const std::vector<double>& times);

// Loschmidt amplitudes <psi0| e^{-i heff t} |psi0> with a dense stepper.
std::vector<cplx> nonhermitian_amplitudes(const Mat& heff, const Vec& psi0, const std::vector<double>& times);

// Taylor-series stepper for sparse generators: y <- e^{-i H dt} y, series
// truncated once the next term drops below tol * ||y||.
class TaylorStepper {
 public:
  TaylorStepper(const SpMat& h, double dt, double tol = 1e-15, int max_order = 60);
  void step(Vec& y) const;
  double dt() const { return dt_; }

 private:
  SpMat h_;
  double dt_;
  double tol_;
  int max_order_;
};

std::vector<cplx> nonhermitian_amplitudes(const SpMat& heff, const Vec& psi0, const std::vector<double>& times);

struct QuadratureSpec {
  int nodes = 32;          // Gauss-Legendre nodes per axis at the first level
  double rel_tol = 1e-6;   // relative change between successive doublings
  int max_nodes = 1024;
};

// First-order backflow term of the Dyson series in the Lu blocks: both
// nested time integrals (loss then gain, gain then loss) summed over every
// intermediate sector. rho0 lives in the rows of the decomposed Liouvillian
// and must sit inside one sector. Lu carries whatever gain strength the
// blocks were built with, so divide by it for the bare coefficient.
cplx backflow_first_order(const BlockSet& blocks, const Vec& rho0, double t, const QuadratureSpec& q = {});

// Zeroth-order return value <<rho0| e^{L0^(n) t} |rho0>> for the sector of rho0.
cplx zeroth_order(const BlockSet& blocks, const Vec& rho0, double t);

// True iff Lu Ld and Lu L0 Ld vanish (max-abs <= 1e-12) on every chain.
bool backflow_vanishing_check(const BlockSet& blocks);

}  // namespace backflow
