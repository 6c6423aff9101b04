// Copyright 2026 The backflow Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "backflow/common.hpp"
#include "backflow/liouvillian.hpp"
#include "backflow/models.hpp"
#include "backflow/propagator.hpp"

namespace backflow {

struct QuenchSpec {
  enum class System { two_band, hk } system = System::two_band;
  BlochModel pre;
  BlochModel post;  // carries dissipators and U
};

// t0 = 1/2 -> t1 = 3/2, w = 1, loss and gain on orbital A.
QuenchSpec two_band_quench(double gamma_l, double gamma_g);
// d0 = (1/2 + cos k, 0, sin k) -> d1 = (3/2 + cos k, 0, sin k), dissipators on A up.
QuenchSpec hk_quench(double U, double gamma_up_loss, double gamma_up_gain);

struct RateSeries {
  std::vector<double> times;
  std::vector<double> k_grid;             // momenta or flux samples
  std::vector<std::vector<double>> g;     // g[k][t]; may be left empty
  std::vector<double> G;
  long flagged = 0;                       // samples with g <= 0 or non-finite
  std::map<std::string, std::string> metadata;
};

// Single-k Liouvillian restricted to n_diff = 0 with its initial state.
struct SingleKProblem {
  Liouvillian L;
  Vec rho0;       // in the rows of L
  Mat heff;       // on the full single-k Fock space
  Vec psi0;       // full Fock vector
  std::vector<int> particle_numbers;
};
SingleKProblem single_k_problem(const QuenchSpec& q, double k);

std::vector<double> return_series(const QuenchSpec& q, double k, const std::vector<double>& times, Method method);
double return_function(const QuenchSpec& q, double k, double t, Method method);

// G(t) = -(1/N) sum_k ln g(k, t); non-positive samples are skipped and flagged.
RateSeries rate_from_returns(const std::vector<double>& times, const std::vector<double>& k_grid,
                             std::vector<std::vector<double>> g, bool keep_g = true);
RateSeries rate_function(const QuenchSpec& q, const std::vector<double>& k_grid, const std::vector<double>& times,
                         Method method, bool keep_g = false);

// Centered second difference |G[i+1] - 2 G[i] + G[i-1]| / dt, indexed by the
// middle point; the two end points are zero.
std::vector<double> cusp_statistic(const std::vector<double>& times, const std::vector<double>& G);

struct CuspDetector {
  int window = 5;
  double factor = 75.0;   // multiple of the median statistic
  double floor = 1e-8;    // absolute floor for series with a vanishing median
};
double calibrated_threshold(const std::vector<double>& stat, const CuspDetector& d = {});

// Times whose statistic exceeds threshold and is the maximum within the
// window. Throws DomainError for non-uniform grids or a window longer than
// the series.
std::vector<double> detect_cusps(const std::vector<double>& times, const std::vector<double>& G, int window,
                                 double threshold);
std::vector<double> detect_cusps(const RateSeries& s, const CuspDetector& d = {});

struct ToyCusp {
  std::vector<double> G;
  double G0 = 0.0;
  double left_derivative = 0.0;
  double right_derivative = 0.0;
};
// Closed form -(4D - 4 tau atan(D/tau) - 2 D ln(D^2 + tau^2)) / (2 pi).
double toy_closed_form(double delta, double tau);
// (1/2 pi) int_{-D}^{D} ln(q^2 + tau^2) dq by adaptive quadrature. This is the
// integral the closed form above evaluates; note its sign.
double toy_quadrature(double delta, double tau);
ToyCusp toy_nonanalyticity(double delta, const std::vector<double>& tau_grid, double h = 1e-7);

struct FisherCoefficients {
  double k = 0.0;
  cplx c0, cp, cm, eps;
  bool flagged = false;  // ill-conditioned eigenbasis
};
struct FisherCrossing {
  double t = 0.0;
  double k = 0.0;
  int branch = 0;
};
struct FisherZeroSet {
  std::vector<FisherCoefficients> coefficients;
  // branches[b][i]: point b of the curve at coefficients[i]
  std::vector<std::vector<cplx>> branches;
  std::vector<int> branch_index;  // n for each curve
  std::vector<FisherCrossing> crossings;
  double max_residual = 0.0;
};

FisherCoefficients fisher_coefficients(double k, double gamma_up_gain);
// Both roots of c+ z^2 + c0 z + c- = 0 with z = e^{-i eps t}; t = (2 pi n + i Log z) / eps.
std::vector<cplx> fisher_times(const FisherCoefficients& c, int n);
cplx fisher_amplitude(const FisherCoefficients& c, cplx t);
FisherZeroSet fisher_zeros(const std::vector<double>& k_grid, double gamma_up_gain, int n_min, int n_max);
// Real-axis crossings with 0 <= t <= t_max, sorted by time.
std::vector<FisherCrossing> fisher_crossings(const FisherZeroSet& z, double gamma_up_gain, double t_max);

struct Crossover {
  std::optional<double> t_star;
  double prediction = 0.0;  // ln(gamma_g) / Re gap
  cplx gap;
  std::vector<double> times;
  std::vector<double> deviation;  // -ln g_gain + ln g_0
};
// gap from the pure-loss n_diff = 0 Liouvillian at k.
cplx liouvillian_gap(const QuenchSpec& q, double k);
Crossover crossover_time(const QuenchSpec& q, double k, double horizon, double dt, double offset = 0.6931471805599453);

enum class FluxEngine { nonhermitian, mcwf };
struct FluxOptions {
  FluxEngine engine = FluxEngine::nonhermitian;
  int trajectories = 1000;
  unsigned long long seed = 1;
  int threads = 1;
};
// G(t) = -(1/F) sum_phi ln g(phi, t) with g = |<Psi0|e^{-i Heff t}|Psi0>|^2,
// or the trajectory estimate of the return probability for the mcwf engine.
RateSeries flux_averaged_rate(int n_cells, const BlochModel& pre, const BlochModel& post, int flux_samples,
                              const std::vector<double>& times, const FluxOptions& opt = {});

}  // namespace backflow
