// Copyright 2026 The backflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "backflow/propagator.hpp"

#include <cmath>
#include <memory>
#include <string>

#include <gsl/gsl_integration.h>
#include <unsupported/Eigen/MatrixFunctions>

namespace backflow {

namespace {

void check_grid(const std::vector<double>& times) {
  if (times.empty()) throw DomainError("time grid is empty");
  if (times.front() < 0.0) throw DomainError("time grid must start at t >= 0");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1])) throw DomainError("time grid must be strictly increasing");
}

bool same_step(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a)); }

void check_finite(const Vec& v, double t) {
  if (!v.allFinite()) throw NumericError("propagation overflow at t = " + std::to_string(t));
}

// Steps a vector along the grid, reusing the step exponential while the
// spacing stays constant.
template <class Gen, class Visit>
void march(const Gen& generator, Vec y, const std::vector<double>& times, Visit visit) {
  check_grid(times);
  Mat step;
  double last_dt = -1.0;
  y = expm(generator * times.front()) * y;
  visit(0, y);
  for (std::size_t k = 1; k < times.size(); ++k) {
    const double dt = times[k] - times[k - 1];
    if (!same_step(dt, last_dt)) {
      step = expm(generator * dt);
      last_dt = dt;
    }
    y = step * y;
    check_finite(y, times[k]);
    visit(k, y);
  }
}

struct GLTable {
  explicit GLTable(int n) : table(gsl_integration_glfixed_table_alloc(n), &gsl_integration_glfixed_table_free) {
    nodes.resize(n);
    weights.resize(n);
    for (int i = 0; i < n; ++i) gsl_integration_glfixed_point(0.0, 1.0, i, &nodes[i], &weights[i], table.get());
  }
  std::unique_ptr<gsl_integration_glfixed_table, decltype(&gsl_integration_glfixed_table_free)> table;
  std::vector<double> nodes, weights;
};

int sector_of(const BlockSet& blocks, const Vec& rho0) {
  int found = -1;
  for (std::size_t s = 0; s < blocks.sectors.size(); ++s) {
    for (int r : blocks.sectors[s].rows) {
      if (rho0(r) == cplx(0.0)) continue;
      if (found >= 0 && found != static_cast<int>(s)) throw DomainError("initial state spans several charge sectors");
      found = static_cast<int>(s);
    }
  }
  if (found < 0) throw DomainError("initial state is zero");
  const auto c = blocks.sectors[found].charge;
  if (c.n != c.nbar) throw DomainError("initial state must sit in an (n, n) sector");
  return found;
}

// One backflow path: bra e^{A (t - tau)} U e^{B tau_mid} D e^{A tau_first} ket
// The outer integral maps [0, 1] onto [0, t]; the inner one onto [0, tau]
// when the loss acts first and onto [0, t - tau] when the gain does.
cplx path_integral(const Mat& a, const Mat& b, const Mat& up, const Mat& down, const Vec& ket, double t, int n,
                   bool loss_first) {
  const GLTable gl(n);
  cplx total = 0.0;
  for (int i = 0; i < n; ++i) {
    const double tau = t * gl.nodes[i];
    const double wi = t * gl.weights[i];
    if (loss_first) {
      // int_0^tau dtau1 <<r| e^{A(t-tau)} U e^{B(tau-tau1)} D e^{A tau1} |r>>
      const Vec bra = (expm(a * (t - tau)).adjoint() * ket);
      const Vec bra_up = up.adjoint() * bra;
      cplx inner_sum = 0.0;
      for (int j = 0; j < n; ++j) {
        const double tau1 = tau * gl.nodes[j];
        const Vec v = down * (expm(a * tau1) * ket);
        inner_sum += tau * gl.weights[j] * bra_up.dot(expm(b * (tau - tau1)) * v);
      }
      total += wi * inner_sum;
    } else {
      // int_0^{t-tau} dtau1 <<r| e^{A(t-tau-tau1)} D e^{B tau1} U e^{A tau} |r>>
      const Vec v = up * (expm(a * tau) * ket);
      const double span = t - tau;
      cplx inner_sum = 0.0;
      for (int j = 0; j < n; ++j) {
        const double tau1 = span * gl.nodes[j];
        const Vec bra = down.adjoint() * (expm(a * (span - tau1)).adjoint() * ket);
        inner_sum += span * gl.weights[j] * bra.dot(expm(b * tau1) * v);
      }
      total += wi * inner_sum;
    }
  }
  return total;
}

}  // namespace

std::vector<double> uniform_grid(double t0, double t1, double dt) {
  if (!(dt > 0.0)) throw DomainError("uniform_grid: dt must be positive");
  if (t1 < t0) throw DomainError("uniform_grid: t1 < t0");
  const auto n = static_cast<std::size_t>(std::llround((t1 - t0) / dt));
  std::vector<double> out(n + 1);
  for (std::size_t k = 0; k <= n; ++k) out[k] = t0 + static_cast<double>(k) * dt;
  return out;
}

Mat expm(const Mat& a) { return a.exp(); }

PropagationResult evolve_exact(const Mat& L, const Vec& rho0, const std::vector<double>& times) {
  if (L.rows() != L.cols() || L.rows() != rho0.size()) throw DomainError("evolve_exact: dimension mismatch");
  PropagationResult out;
  out.method = Method::exact;
  out.times = times;
  out.states.resize(times.size());
  march(L, rho0, times, [&](std::size_t k, const Vec& y) { out.states[k] = y; });
  return out;
}

std::vector<cplx> exact_overlaps(const Mat& L, const Vec& bra, const Vec& ket, const std::vector<double>& times) {
  if (L.rows() != L.cols() || L.rows() != ket.size() || bra.size() != ket.size())
    throw DomainError("exact_overlaps: dimension mismatch");
  std::vector<cplx> out(times.size());
  march(L, ket, times, [&](std::size_t k, const Vec& y) { out[k] = bra.dot(y); });
  return out;
}

PropagationResult evolve_nonhermitian(const Mat& heff, const Mat& rho0, const std::vector<double>& times) {
  if (heff.rows() != heff.cols() || rho0.rows() != heff.rows() || rho0.cols() != heff.cols())
    throw DomainError("evolve_nonhermitian: dimension mismatch");
  check_grid(times);
  PropagationResult out;
  out.method = Method::nonhermitian;
  out.times = times;
  const Mat gen = -I_unit * heff;
  Mat u = expm(gen * times.front());
  Mat step;
  double last_dt = -1.0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (k > 0) {
      const double dt = times[k] - times[k - 1];
      if (!same_step(dt, last_dt)) {
        step = expm(gen * dt);
        last_dt = dt;
      }
      u = step * u;
    }
    Mat rho = u * rho0 * u.adjoint();
    if (!rho.allFinite()) throw NumericError("evolve_nonhermitian: overflow at t = " + std::to_string(times[k]));
    out.densities.push_back(std::move(rho));
  }
  return out;
}

std::vector<cplx> nonhermitian_amplitudes(const Mat& heff, const Vec& psi0, const std::vector<double>& times) {
  if (heff.rows() != heff.cols() || heff.rows() != psi0.size())
    throw DomainError("nonhermitian_amplitudes: dimension mismatch");
  std::vector<cplx> out(times.size());
  const Mat gen = -I_unit * heff;
  march(gen, psi0, times, [&](std::size_t k, const Vec& y) { out[k] = psi0.dot(y); });
  return out;
}

TaylorStepper::TaylorStepper(const SpMat& h, double dt, double tol, int max_order)
    : h_(h), dt_(dt), tol_(tol), max_order_(max_order) {
  if (h.rows() != h.cols()) throw DomainError("TaylorStepper: generator is not square");
  if (!(dt > 0.0)) throw DomainError("TaylorStepper: dt must be positive");
}

void TaylorStepper::step(Vec& y) const {
  Vec term = y;
  Vec sum = y;
  const double scale = y.norm();
  for (int k = 1; k <= max_order_; ++k) {
    term = (h_ * term) * (-I_unit * dt_ / double(k));
    sum += term;
    if (term.norm() <= tol_ * scale) {
      y = std::move(sum);
      return;
    }
  }
  throw NumericError("TaylorStepper: series did not converge; reduce dt");
}

std::vector<cplx> nonhermitian_amplitudes(const SpMat& heff, const Vec& psi0, const std::vector<double>& times) {
  check_grid(times);
  if (heff.rows() != psi0.size()) throw DomainError("nonhermitian_amplitudes: dimension mismatch");
  std::vector<cplx> out(times.size());
  Vec y = psi0;
  if (times.front() > 0.0) {
    const auto n = static_cast<int>(std::ceil(times.front() / 0.01));
    TaylorStepper pre(heff, times.front() / n);
    for (int i = 0; i < n; ++i) pre.step(y);
  }
  out[0] = psi0.dot(y);
  std::unique_ptr<TaylorStepper> stepper;
  for (std::size_t k = 1; k < times.size(); ++k) {
    const double dt = times[k] - times[k - 1];
    if (!stepper || !same_step(stepper->dt(), dt)) stepper = std::make_unique<TaylorStepper>(heff, dt);
    stepper->step(y);
    check_finite(y, times[k]);
    out[k] = psi0.dot(y);
  }
  return out;
}

cplx zeroth_order(const BlockSet& blocks, const Vec& rho0, double t) {
  const int s = sector_of(blocks, rho0);
  const Vec r = blocks.slice(rho0, s);
  return r.dot(expm(blocks.L0.at(s) * t) * r);
}

cplx backflow_first_order(const BlockSet& blocks, const Vec& rho0, double t, const QuadratureSpec& q) {
  if (t < 0.0) throw DomainError("backflow_first_order: t must be nonnegative");
  const int s0 = sector_of(blocks, rho0);
  if (t == 0.0) return 0.0;
  const Vec r = blocks.slice(rho0, s0);
  const Mat& a = blocks.L0.at(s0);

  struct Path {
    const Mat* b;
    const Mat* up;
    const Mat* down;
    bool loss_first;
  };
  std::vector<Path> paths;
  double scale = 0.0;
  for (int s = 0; s < static_cast<int>(blocks.sectors.size()); ++s) {
    if (s == s0) continue;
    // loss s0 -> s, then gain s -> s0
    auto d = blocks.Ld.find({s, s0});
    auto u = blocks.Lu.find({s0, s});
    if (d != blocks.Ld.end() && u != blocks.Lu.end()) {
      paths.push_back({&blocks.L0.at(s), &u->second, &d->second, true});
      scale += u->second.norm() * d->second.norm();
    }
    // gain s0 -> s, then loss s -> s0
    auto u2 = blocks.Lu.find({s, s0});
    auto d2 = blocks.Ld.find({s0, s});
    if (u2 != blocks.Lu.end() && d2 != blocks.Ld.end()) {
      paths.push_back({&blocks.L0.at(s), &u2->second, &d2->second, false});
      scale += u2->second.norm() * d2->second.norm();
    }
  }
  if (paths.empty()) return 0.0;

  auto evaluate = [&](int n) {
    cplx sum = 0.0;
    for (const auto& p : paths) sum += path_integral(a, *p.b, *p.up, *p.down, r, t, n, p.loss_first);
    return sum;
  };
  const double abs_floor = 1e-14 * scale * t * t * r.squaredNorm();
  cplx prev = evaluate(q.nodes);
  for (int n = 2 * q.nodes; n <= q.max_nodes; n *= 2) {
    const cplx next = evaluate(n);
    const double change = std::abs(next - prev);
    if (change <= q.rel_tol * std::abs(next) || change <= abs_floor) return next;
    prev = next;
  }
  throw NumericError("backflow_first_order: quadrature did not converge at t = " + std::to_string(t));
}

bool backflow_vanishing_check(const BlockSet& blocks) {
  for (const auto& [key, down] : blocks.Ld) {
    const auto [mid, top] = key;  // down: top -> mid
    auto up = blocks.Lu.find({top, mid});
    if (up == blocks.Lu.end()) continue;
    const Mat direct = up->second * down;
    const Mat dressed = up->second * blocks.L0.at(mid) * down;
    if (direct.cwiseAbs().maxCoeff() > 1e-12 || dressed.cwiseAbs().maxCoeff() > 1e-12) return false;
  }
  return true;
}

}  // namespace backflow
