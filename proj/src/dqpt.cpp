// Copyright 2026 The backflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "backflow/dqpt.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <thread>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

#include "backflow/mcwf.hpp"

namespace backflow {

namespace {

constexpr double kPi = std::numbers::pi;

BlochModel drop_gain(BlochModel m) {
  for (auto& d : m.dissipators)
    if (d.kind == Dissipator::Kind::gain) d.gamma = 0.0;
  return m;
}

double median(std::vector<double> v) {
  std::vector<double> finite;
  for (double x : v)
    if (std::isfinite(x)) finite.push_back(x);
  if (finite.empty()) return 0.0;
  const auto mid = finite.begin() + static_cast<long>(finite.size() / 2);
  std::nth_element(finite.begin(), mid, finite.end());
  if (finite.size() % 2) return *mid;
  const double hi = *mid;
  return 0.5 * (hi + *std::max_element(finite.begin(), mid));
}

double grid_step(const std::vector<double>& times) {
  if (times.size() < 3) throw DomainError("detect_cusps: series too short");
  const double dt = times[1] - times[0];
  for (std::size_t i = 1; i < times.size(); ++i)
    if (std::abs(times[i] - times[i - 1] - dt) > 1e-9 * std::max(1.0, std::abs(dt)))
      throw DomainError("detect_cusps: time grid is not uniform");
  return dt;
}

template <class F>
void parallel_for(int n, int threads, F f) {
  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  std::vector<std::thread> pool;
  for (int w = 0; w < threads; ++w)
    pool.emplace_back([&, w] {
      for (int i = w; i < n; i += threads) f(i);
    });
  for (auto& t : pool) t.join();
}

}  // namespace

QuenchSpec two_band_quench(double gamma_l, double gamma_g) {
  QuenchSpec q;
  q.system = QuenchSpec::System::two_band;
  q.pre = chiral_model(0.5);
  q.post = with_dissipators(chiral_model(1.5), gamma_l, gamma_g);
  return q;
}

QuenchSpec hk_quench(double U, double gamma_up_loss, double gamma_up_gain) {
  QuenchSpec q;
  q.system = QuenchSpec::System::hk;
  q.pre = hk_model(0.5);
  q.post = with_dissipators(hk_model(1.5), gamma_up_loss, gamma_up_gain);
  q.post.U = U;
  q.post.validate();
  return q;
}

SingleKProblem single_k_problem(const QuenchSpec& q, double k) {
  SingleKProblem p;
  Mat H;
  std::vector<Mat> jumps;
  if (q.system == QuenchSpec::System::two_band) {
    H = single_k_hamiltonian(k, q.post);
    jumps = single_k_jump_operators(q.post);
    p.psi0 = single_k_initial_state(k, q.pre);
    p.particle_numbers = build_basis(2).particle_numbers();
  } else {
    H = hk_fock_hamiltonian(k, q.post);
    jumps = hk_fock_jumps(q.post.gamma_loss(), q.post.gamma_gain());
    p.psi0 = hk_fock_initial_state(k, q.pre);
    p.particle_numbers = build_basis(4).particle_numbers();
  }
  p.heff = effective_hamiltonian(H, jumps);
  p.L = restrict_weak_symmetry(build_liouvillian(H, jumps, p.particle_numbers), 0);
  p.rho0 = p.L.restrict(vectorize(p.psi0 * p.psi0.adjoint()));
  return p;
}

std::vector<double> return_series(const QuenchSpec& q, double k, const std::vector<double>& times, Method method) {
  const auto p = single_k_problem(q, k);
  std::vector<double> g(times.size());
  if (method == Method::exact) {
    const auto ov = exact_overlaps(p.L.matrix, p.rho0, p.rho0, times);
    for (std::size_t i = 0; i < times.size(); ++i) g[i] = ov[i].real();
  } else if (method == Method::nonhermitian) {
    const auto amp = nonhermitian_amplitudes(p.heff, p.psi0, times);
    for (std::size_t i = 0; i < times.size(); ++i) g[i] = std::norm(amp[i]);
  } else {
    throw DomainError("return_series: method must be exact or nonhermitian");
  }
  return g;
}

double return_function(const QuenchSpec& q, double k, double t, Method method) {
  return return_series(q, k, {t}, method).front();
}

RateSeries rate_from_returns(const std::vector<double>& times, const std::vector<double>& k_grid,
                             std::vector<std::vector<double>> g, bool keep_g) {
  if (g.size() != k_grid.size()) throw DomainError("rate_from_returns: one series per k expected");
  RateSeries s;
  s.times = times;
  s.k_grid = k_grid;
  s.G.assign(times.size(), 0.0);
  for (std::size_t t = 0; t < times.size(); ++t) {
    double sum = 0.0;
    long used = 0;
    for (std::size_t k = 0; k < k_grid.size(); ++k) {
      const double x = g[k].at(t);
      if (!(x > 0.0) || !std::isfinite(x)) {
        ++s.flagged;
        continue;
      }
      sum += std::log(x);
      ++used;
    }
    s.G[t] = used ? -sum / double(used) : std::numeric_limits<double>::infinity();
  }
  if (keep_g) s.g = std::move(g);
  return s;
}

RateSeries rate_function(const QuenchSpec& q, const std::vector<double>& k_grid, const std::vector<double>& times,
                         Method method, bool keep_g) {
  std::vector<std::vector<double>> g(k_grid.size());
  for (std::size_t i = 0; i < k_grid.size(); ++i) g[i] = return_series(q, k_grid[i], times, method);
  auto s = rate_from_returns(times, k_grid, std::move(g), keep_g);
  s.metadata["method"] = method == Method::exact ? "exact" : "nonhermitian";
  return s;
}

std::vector<double> cusp_statistic(const std::vector<double>& times, const std::vector<double>& G) {
  if (times.size() != G.size()) throw DomainError("cusp_statistic: size mismatch");
  const double dt = grid_step(times);
  std::vector<double> stat(G.size(), 0.0);
  for (std::size_t i = 1; i + 1 < G.size(); ++i) {
    const double d2 = G[i + 1] - 2.0 * G[i] + G[i - 1];
    stat[i] = std::isfinite(d2) ? std::abs(d2) / dt : std::numeric_limits<double>::infinity();
  }
  return stat;
}

double calibrated_threshold(const std::vector<double>& stat, const CuspDetector& d) {
  std::vector<double> interior(stat.begin() + 1, stat.end() - 1);
  return std::max(d.factor * median(interior), d.floor);
}

std::vector<double> detect_cusps(const std::vector<double>& times, const std::vector<double>& G, int window,
                                 double threshold) {
  if (window < 1 || static_cast<std::size_t>(window) > G.size())
    throw DomainError("detect_cusps: window exceeds the series");
  const auto stat = cusp_statistic(times, G);
  const long half = window / 2;
  const long n = static_cast<long>(stat.size());
  std::vector<double> out;
  for (long i = 1; i + 1 < n; ++i) {
    if (!(stat[i] > threshold)) continue;
    bool peak = true;
    for (long j = std::max(1L, i - half); j <= std::min(n - 2, i + half) && peak; ++j) {
      if (j < i && stat[j] >= stat[i]) peak = false;
      if (j > i && stat[j] > stat[i]) peak = false;
    }
    if (peak) out.push_back(times[i]);
  }
  return out;
}

std::vector<double> detect_cusps(const RateSeries& s, const CuspDetector& d) {
  const auto stat = cusp_statistic(s.times, s.G);
  return detect_cusps(s.times, s.G, d.window, calibrated_threshold(stat, d));
}

double toy_closed_form(double delta, double tau) {
  const double arc = tau == 0.0 ? 0.0 : tau * std::atan(delta / tau);
  return -(4.0 * delta - 4.0 * arc - 2.0 * delta * std::log(delta * delta + tau * tau)) / (2.0 * kPi);
}

double toy_quadrature(double delta, double tau) {
  if (!(delta > 0.0)) throw DomainError("toy_quadrature: cutoff must be positive");
  struct Params {
    double tau2;
  } par{tau * tau};
  gsl_function f;
  f.function = [](double q, void* p) { return std::log(q * q + static_cast<Params*>(p)->tau2); };
  f.params = &par;
  std::unique_ptr<gsl_integration_workspace, decltype(&gsl_integration_workspace_free)> ws(
      gsl_integration_workspace_alloc(1000), &gsl_integration_workspace_free);
  const auto old = gsl_set_error_handler_off();
  // Integrate (0, delta] and double: the integrand is even with a log singularity at q = 0 when tau = 0.
  double result = 0.0, err = 0.0;
  const int status = gsl_integration_qags(&f, 0.0, delta, 1e-14, 1e-12, 1000, ws.get(), &result, &err);
  gsl_set_error_handler(old);
  if (status != GSL_SUCCESS && err > 1e-9) throw NumericError("toy_quadrature: integration did not converge");
  return 2.0 * result / (2.0 * kPi);
}

ToyCusp toy_nonanalyticity(double delta, const std::vector<double>& tau_grid, double h) {
  if (!(delta > 0.0)) throw DomainError("toy_nonanalyticity: cutoff must be positive");
  ToyCusp out;
  for (double tau : tau_grid) out.G.push_back(toy_closed_form(delta, tau));
  out.G0 = toy_closed_form(delta, 0.0);
  out.left_derivative = (out.G0 - toy_closed_form(delta, -h)) / h;
  out.right_derivative = (toy_closed_form(delta, h) - out.G0) / h;
  return out;
}

FisherCoefficients fisher_coefficients(double k, double gamma_up_gain) {
  const auto tri = hk_triplet_hamiltonian(k, gamma_up_gain);
  const Vec psi = hk_triplet_projector() * hk_two_particle_initial_state(k, hk_model(0.5));
  Eigen::ComplexEigenSolver<Mat> es(tri.h, true);
  const Mat V = es.eigenvectors();
  FisherCoefficients c;
  c.k = k;
  c.eps = tri.eps;
  Eigen::JacobiSVD<Mat> svd(V);
  const auto& sv = svd.singularValues();
  c.flagged = sv(2) < 1e-8 * sv(0);
  const Mat W = V.inverse();
  // Match numerical eigenvalues to (0, +eps, -eps).
  const std::array<cplx, 3> target = {0.0, tri.eps, -tri.eps};
  std::array<int, 3> perm = {0, 1, 2}, best = perm;
  double best_cost = std::numeric_limits<double>::infinity();
  do {
    double cost = 0.0;
    for (int j = 0; j < 3; ++j) cost += std::abs(es.eigenvalues()(perm[j]) - target[j]);
    if (cost < best_cost) best_cost = cost, best = perm;
  } while (std::next_permutation(perm.begin(), perm.end()));
  std::array<cplx, 3> coef;
  for (int j = 0; j < 3; ++j) coef[j] = psi.dot(V.col(best[j])) * (W.row(best[j]) * psi).value();
  c.c0 = coef[0];
  c.cp = coef[1];
  c.cm = coef[2];
  return c;
}

std::vector<cplx> fisher_times(const FisherCoefficients& c, int n) {
  const cplx disc = std::sqrt(c.c0 * c.c0 - 4.0 * c.cp * c.cm);
  const cplx qa = -0.5 * (c.c0 + disc), qb = -0.5 * (c.c0 - disc);
  const cplx q = std::abs(qa) >= std::abs(qb) ? qa : qb;
  const std::array<cplx, 2> z = {q / c.cp, c.cm / q};
  std::vector<cplx> out;
  for (const auto& zz : z) out.push_back((2.0 * kPi * n + I_unit * std::log(zz)) / c.eps);
  return out;
}

cplx fisher_amplitude(const FisherCoefficients& c, cplx t) {
  return c.c0 + c.cp * std::exp(-I_unit * c.eps * t) + c.cm * std::exp(I_unit * c.eps * t);
}

namespace {

std::vector<cplx> candidates(const FisherCoefficients& c, int n_min, int n_max) {
  std::vector<cplx> out;
  for (int n = n_min; n <= n_max; ++n)
    for (const auto& t : fisher_times(c, n)) out.push_back(t);
  return out;
}

cplx nearest(const std::vector<cplx>& pool, cplx target) {
  cplx best = pool.front();
  for (const auto& x : pool)
    if (std::abs(x - target) < std::abs(best - target)) best = x;
  return best;
}

}  // namespace

FisherZeroSet fisher_zeros(const std::vector<double>& k_grid, double gamma_up_gain, int n_min, int n_max) {
  if (k_grid.empty()) throw DomainError("fisher_zeros: empty k grid");
  if (n_max < n_min) throw DomainError("fisher_zeros: empty branch range");
  FisherZeroSet z;
  for (double k : k_grid) z.coefficients.push_back(fisher_coefficients(k, gamma_up_gain));

  // Seed one curve per (n, root) at the first k, then follow by nearest match.
  for (int n = n_min; n <= n_max; ++n) {
    for (const auto& t : fisher_times(z.coefficients.front(), n)) {
      z.branches.push_back({t});
      z.branch_index.push_back(n);
    }
  }
  for (std::size_t i = 1; i < k_grid.size(); ++i) {
    const auto pool = candidates(z.coefficients[i], n_min - 2, n_max + 2);
    for (auto& curve : z.branches) curve.push_back(nearest(pool, curve.back()));
  }
  for (std::size_t b = 0; b < z.branches.size(); ++b)
    for (std::size_t i = 0; i < k_grid.size(); ++i)
      z.max_residual = std::max(z.max_residual, std::abs(fisher_amplitude(z.coefficients[i], z.branches[b][i])));
  return z;
}

std::vector<FisherCrossing> fisher_crossings(const FisherZeroSet& z, double gamma_up_gain, double t_max) {
  std::vector<FisherCrossing> out;
  const auto& cs = z.coefficients;
  for (std::size_t b = 0; b < z.branches.size(); ++b) {
    const auto& curve = z.branches[b];
    for (std::size_t i = 0; i + 1 < curve.size(); ++i) {
      if ((curve[i].imag() > 0.0) == (curve[i + 1].imag() > 0.0)) continue;
      double ka = cs[i].k, kb = cs[i + 1].k;
      cplx ta = curve[i], tb = curve[i + 1];
      const int n = z.branch_index[b];
      for (int it = 0; it < 60 && kb - ka > 1e-13; ++it) {
        const double km = 0.5 * (ka + kb);
        const auto pool = candidates(fisher_coefficients(km, gamma_up_gain), n - 3, n + 3);
        const cplx tm = nearest(pool, 0.5 * (ta + tb));
        if ((tm.imag() > 0.0) == (ta.imag() > 0.0))
          ka = km, ta = tm;
        else
          kb = km, tb = tm;
      }
      const double t = 0.5 * (ta.real() + tb.real());
      if (t < 0.0 || t > t_max) continue;
      bool dup = false;
      for (const auto& c : out) dup = dup || std::abs(c.t - t) < 1e-9;
      if (!dup) out.push_back({t, 0.5 * (ka + kb), n});
    }
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.t < b.t; });
  return out;
}

cplx liouvillian_gap(const QuenchSpec& q, double k) {
  QuenchSpec lossy = q;
  lossy.post = drop_gain(q.post);
  return gap(spectrum(single_k_problem(lossy, k).L.matrix));
}

Crossover crossover_time(const QuenchSpec& q, double k, double horizon, double dt, double offset) {
  QuenchSpec base = q;
  base.post = drop_gain(q.post);
  Crossover c;
  c.times = uniform_grid(0.0, horizon, dt);
  const auto g = return_series(q, k, c.times, Method::exact);
  const auto g0 = return_series(base, k, c.times, Method::exact);
  c.deviation.resize(c.times.size());
  for (std::size_t i = 0; i < c.times.size(); ++i) {
    c.deviation[i] = -std::log(g[i]) + std::log(g0[i]);
    if (!c.t_star && std::abs(c.deviation[i]) > offset) c.t_star = c.times[i];
  }
  c.gap = liouvillian_gap(q, k);
  const double gg = q.post.gamma_gain();
  c.prediction = gg > 0.0 ? std::log(gg) / c.gap.real() : std::numeric_limits<double>::quiet_NaN();
  return c;
}

RateSeries flux_averaged_rate(int n_cells, const BlochModel& pre, const BlochModel& post, int flux_samples,
                              const std::vector<double>& times, const FluxOptions& opt) {
  if (flux_samples < 1) throw DomainError("flux_averaged_rate: flux_samples must be >= 1");
  if (n_cells > kMaxCells) throw CapacityError("flux_averaged_rate: too many cells");
  std::vector<double> fluxes(flux_samples);
  for (int f = 0; f < flux_samples; ++f) fluxes[f] = 2.0 * kPi * f / flux_samples;

  std::vector<std::vector<double>> g(flux_samples);
  auto one = [&](int f, int inner_threads) {
    const auto chain = many_body_chain(n_cells, post, fluxes[f]);
    const Vec psi = slater_ground_state(n_cells, pre, fluxes[f]);
    const auto sys = SectorSystem::from_full(chain.heff, chain.jumps, chain.basis.particle_numbers());
    const int sector = sys.sector_with_label(n_cells);
    const auto& rows = sys.blocks[sector].rows;
    Vec local(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) local(static_cast<Eigen::Index>(i)) = psi(rows[i]);
    if (opt.engine == FluxEngine::nonhermitian) {
      const auto amp = nonhermitian_amplitudes(sys.blocks[sector].heff, local, times);
      g[f].resize(times.size());
      for (std::size_t t = 0; t < times.size(); ++t) g[f][t] = std::norm(amp[t]);
    } else {
      EnsembleOptions eo;
      eo.threads = inner_threads;
      const std::uint64_t seed = opt.seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(f + 1);
      g[f] = run_ensemble(sys, sector, local, times, opt.trajectories, seed, eo).g;
    }
  };
  if (opt.engine == FluxEngine::nonhermitian)
    parallel_for(flux_samples, opt.threads, [&](int f) { one(f, 1); });
  else
    for (int f = 0; f < flux_samples; ++f) one(f, opt.threads);

  auto s = rate_from_returns(times, fluxes, std::move(g), false);
  s.metadata["engine"] = opt.engine == FluxEngine::nonhermitian ? "nonhermitian" : "mcwf";
  s.metadata["n_cells"] = std::to_string(n_cells);
  s.metadata["flux_samples"] = std::to_string(flux_samples);
  return s;
}

}  // namespace backflow
