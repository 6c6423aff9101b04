// Copyright 2026 The backflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "backflow/mcwf.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <thread>

namespace backflow {

namespace {

std::uint64_t splitmix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

SpMat dense_to_sparse(const Mat& m) {
  SpMat s = m.sparseView();
  s.makeCompressed();
  return s;
}

double uniform_step(const std::vector<double>& times) {
  if (times.size() < 2) throw DomainError("run_ensemble: need at least two time points");
  if (std::abs(times.front()) > 1e-12) throw DomainError("run_ensemble: time grid must start at 0");
  const double dt = times[1] - times[0];
  if (!(dt > 0.0)) throw DomainError("run_ensemble: time grid must increase");
  for (std::size_t k = 1; k < times.size(); ++k)
    if (std::abs(times[k] - times[k - 1] - dt) > 1e-9 * dt) throw DomainError("run_ensemble: time grid is not uniform");
  return dt;
}

}  // namespace

double stream_uniform(std::uint64_t seed, std::uint64_t trajectory, std::uint64_t step) {
  const std::uint64_t key = splitmix(splitmix(seed) ^ trajectory);
  return static_cast<double>(splitmix(key ^ splitmix(step)) >> 11) * 0x1.0p-53;
}

SectorSystem SectorSystem::from_full(const SpMat& heff, const std::vector<SpMat>& jumps, const std::vector<int>& labels) {
  const auto n = static_cast<std::size_t>(heff.rows());
  if (heff.cols() != heff.rows() || labels.size() != n) throw DomainError("SectorSystem: dimension mismatch");
  SectorSystem sys;
  sys.full_dim = n;
  sys.num_jumps = jumps.size();

  std::map<int, int> block_of_label;
  for (int l : labels) block_of_label.emplace(l, 0);
  for (auto& [l, b] : block_of_label) {
    b = static_cast<int>(sys.labels.size());
    sys.labels.push_back(l);
  }
  sys.blocks.resize(sys.labels.size());
  std::vector<int> block(n), local(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int b = block_of_label.at(labels[i]);
    block[i] = b;
    local[i] = static_cast<int>(sys.blocks[b].rows.size());
    sys.blocks[b].rows.push_back(static_cast<int>(i));
  }

  std::vector<std::vector<Eigen::Triplet<cplx>>> trip(sys.blocks.size());
  for (int c = 0; c < heff.outerSize(); ++c)
    for (SpMat::InnerIterator it(heff, c); it; ++it) {
      if (block[it.row()] != block[c]) throw DomainError("SectorSystem: Heff couples different sectors");
      trip[block[c]].emplace_back(local[it.row()], local[c], it.value());
    }
  for (std::size_t b = 0; b < sys.blocks.size(); ++b) {
    const auto d = static_cast<Eigen::Index>(sys.blocks[b].rows.size());
    sys.blocks[b].heff.resize(d, d);
    sys.blocks[b].heff.setFromTriplets(trip[b].begin(), trip[b].end());
    sys.blocks[b].jumps.resize(jumps.size());
  }

  for (std::size_t mu = 0; mu < jumps.size(); ++mu) {
    const SpMat& op = jumps[mu];
    if (op.rows() != heff.rows() || op.cols() != heff.cols()) throw DomainError("SectorSystem: jump dimension mismatch");
    std::vector<int> target(sys.blocks.size(), -1);
    std::vector<std::vector<Eigen::Triplet<cplx>>> jt(sys.blocks.size());
    for (int c = 0; c < op.outerSize(); ++c)
      for (SpMat::InnerIterator it(op, c); it; ++it) {
        if (it.value() == cplx(0.0)) continue;
        const int src = block[c], dst = block[it.row()];
        if (target[src] >= 0 && target[src] != dst) throw DomainError("SectorSystem: jump splits a sector");
        target[src] = dst;
        jt[src].emplace_back(local[it.row()], local[c], it.value());
      }
    for (std::size_t b = 0; b < sys.blocks.size(); ++b) {
      auto& j = sys.blocks[b].jumps[mu];
      j.target = target[b];
      if (j.target < 0) continue;
      j.op.resize(static_cast<Eigen::Index>(sys.blocks[j.target].rows.size()),
                  static_cast<Eigen::Index>(sys.blocks[b].rows.size()));
      j.op.setFromTriplets(jt[b].begin(), jt[b].end());
      j.dagger_op = SpMat(j.op.adjoint()) * j.op;
      j.dagger_op.prune(cplx(0.0));
    }
  }
  for (auto& b : sys.blocks) {
    const auto d = static_cast<Eigen::Index>(b.rows.size());
    b.rate.resize(d, d);
    for (const auto& j : b.jumps)
      if (j.target >= 0) b.rate += j.dagger_op;
  }
  return sys;
}

SectorSystem SectorSystem::dense(const Mat& heff, const std::vector<Mat>& jumps) {
  std::vector<SpMat> sj;
  for (const auto& j : jumps) sj.push_back(dense_to_sparse(j));
  return from_full(dense_to_sparse(heff), sj, std::vector<int>(static_cast<std::size_t>(heff.rows()), 0));
}

int SectorSystem::sector_with_label(int label) const {
  for (std::size_t b = 0; b < labels.size(); ++b)
    if (labels[b] == label) return static_cast<int>(b);
  throw DomainError("SectorSystem: no sector with label " + std::to_string(label));
}

Vec SectorSystem::embed(int sector, const Vec& v) const {
  Vec out = Vec::Zero(static_cast<Eigen::Index>(full_dim));
  const auto& rows = blocks[sector].rows;
  for (std::size_t i = 0; i < rows.size(); ++i) out(rows[i]) = v(static_cast<Eigen::Index>(i));
  return out;
}

std::vector<double> jump_probabilities(const TrajectoryState& s, const SectorSystem& sys, double dt) {
  const auto& b = sys.blocks[s.sector];
  std::vector<double> p(b.jumps.size(), 0.0);
  for (std::size_t mu = 0; mu < b.jumps.size(); ++mu)
    if (b.jumps[mu].target >= 0) p[mu] = dt * s.psi.dot(b.jumps[mu].dagger_op * s.psi).real();
  return p;
}

void mcwf_step(TrajectoryState& s, const SectorSystem& sys, double dt, NoJump mode) {
  const auto& b = sys.blocks[s.sector];
  // Total first; the individual p_mu are only needed when the draw falls below it.
  const double total = dt * s.psi.dot(b.rate * s.psi).real();
  if (total >= 1.0)
    throw NumericError("mcwf_step: total jump probability " + std::to_string(total) + " >= 1; reduce dt");

  const double u = stream_uniform(s.seed, s.trajectory, s.step);
  int chosen = -1;
  if (u < total) {
    const auto p = jump_probabilities(s, sys, dt);
    double q = 0.0;
    for (std::size_t mu = 0; mu < p.size(); ++mu) {
      q += p[mu];
      if (u < q) {
        chosen = static_cast<int>(mu);
        break;
      }
    }
  }

  if (chosen >= 0) {
    const auto& j = b.jumps[chosen];
    s.psi = j.op * s.psi;
    s.sector = j.target;
    s.jump_log.push_back({s.time + dt, chosen});
  } else if (mode == NoJump::euler) {
    s.psi -= (I_unit * dt) * (b.heff * s.psi);
  } else {
    Vec term = s.psi;
    const double scale = s.psi.norm();
    for (int k = 1; k <= 60; ++k) {
      term = (b.heff * term) * (-I_unit * dt / double(k));
      s.psi += term;
      if (term.norm() <= 1e-15 * scale) break;
    }
  }
  const double nrm = s.psi.norm();
  if (!(nrm > 0.0) || !std::isfinite(nrm)) throw NumericError("mcwf_step: state norm vanished");
  s.psi /= nrm;
  s.time += dt;
  ++s.step;
}

TrajectoryState mcwf_step(const TrajectoryState& s, const Mat& heff, const std::vector<Mat>& jumps, double dt) {
  const auto sys = SectorSystem::dense(heff, jumps);
  TrajectoryState out = s;
  out.sector = 0;
  mcwf_step(out, sys, dt);
  return out;
}

EnsembleResult run_ensemble(const SectorSystem& sys, int sector, const Vec& psi0, const std::vector<double>& times,
                            int M, std::uint64_t seed, const EnsembleOptions& opt) {
  if (M < 1) throw DomainError("run_ensemble: M must be >= 1");
  if (sector < 0 || sector >= static_cast<int>(sys.blocks.size())) throw DomainError("run_ensemble: bad sector");
  if (psi0.size() != static_cast<Eigen::Index>(sys.blocks[sector].rows.size()))
    throw DomainError("run_ensemble: initial state does not match the sector dimension");
  const double dt = uniform_step(times);
  const std::size_t nt = times.size();

  std::vector<std::size_t> check_idx;
  for (double c : opt.checkpoints) {
    const auto k = static_cast<std::size_t>(std::llround(c / dt));
    if (k >= nt || std::abs(times[k] - c) > 1e-9) throw DomainError("run_ensemble: checkpoint not on the time grid");
    check_idx.push_back(k);
  }

  const Vec ref = psi0.normalized();
  std::vector<std::vector<double>> overlap(M);
  std::vector<std::vector<Vec>> snaps(M);
  std::vector<std::vector<JumpEvent>> logs(M);
  std::vector<char> failed(M, 0);

  auto run_one = [&](int m) {
    TrajectoryState s;
    s.psi = ref;
    s.sector = sector;
    s.seed = seed;
    s.trajectory = static_cast<std::uint64_t>(m);
    auto& ov = overlap[m];
    ov.assign(nt, 0.0);
    std::size_t next_check = 0;
    try {
      for (std::size_t k = 0; k < nt; ++k) {
        if (k > 0) mcwf_step(s, sys, dt, opt.no_jump);
        ov[k] = s.sector == sector ? std::norm(ref.dot(s.psi)) : 0.0;
        while (next_check < check_idx.size() && check_idx[next_check] == k) {
          snaps[m].push_back(sys.embed(s.sector, s.psi));
          ++next_check;
        }
      }
    } catch (const NumericError&) {
      failed[m] = 1;
    }
    logs[m] = std::move(s.jump_log);
  };

  const int nthreads = std::max(1, std::min(opt.threads, M));
  if (nthreads == 1) {
    for (int m = 0; m < M; ++m) run_one(m);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < nthreads; ++w)
      pool.emplace_back([&, w] {
        for (int m = w; m < M; m += nthreads) run_one(m);
      });
    for (auto& th : pool) th.join();
  }

  EnsembleResult r;
  r.M = M;
  r.times = times;
  r.checkpoints = opt.checkpoints;
  r.aborted = static_cast<int>(std::count(failed.begin(), failed.end(), 1));
  if (r.aborted > 0.01 * M)
    throw NumericError("run_ensemble: " + std::to_string(r.aborted) + " of " + std::to_string(M) +
                       " trajectories aborted");
  const int good = M - r.aborted;
  r.g.assign(nt, 0.0);
  r.g_stderr.assign(nt, 0.0);
  for (int m = 0; m < M; ++m)
    if (!failed[m])
      for (std::size_t k = 0; k < nt; ++k) r.g[k] += overlap[m][k];
  for (auto& x : r.g) x /= good;
  if (good > 1) {
    for (std::size_t k = 0; k < nt; ++k) {
      double ss = 0.0;
      for (int m = 0; m < M; ++m)
        if (!failed[m]) ss += (overlap[m][k] - r.g[k]) * (overlap[m][k] - r.g[k]);
      r.g_stderr[k] = std::sqrt(ss / (good - 1) / good);
    }
  }
  r.mean_jumps.assign(sys.num_jumps, 0.0);
  for (int m = 0; m < M; ++m)
    if (!failed[m])
      for (const auto& e : logs[m]) r.mean_jumps[e.jump] += 1.0 / good;
  r.states.assign(check_idx.size(), {});
  for (std::size_t c = 0; c < check_idx.size(); ++c)
    for (int m = 0; m < M; ++m)
      if (!failed[m]) r.states[c].push_back(snaps[m][c]);
  if (opt.keep_logs) r.logs = std::move(logs);
  return r;
}

EnsembleResult run_ensemble(const Vec& psi0, const Mat& heff, const std::vector<Mat>& jumps,
                            const std::vector<double>& times, int M, std::uint64_t seed, const EnsembleOptions& opt) {
  return run_ensemble(SectorSystem::dense(heff, jumps), 0, psi0, times, M, seed, opt);
}

std::vector<Mat> reconstruct_density(const EnsembleResult& e, const std::vector<double>& checkpoints) {
  std::vector<Mat> out;
  for (double c : checkpoints) {
    std::size_t idx = e.checkpoints.size();
    for (std::size_t i = 0; i < e.checkpoints.size(); ++i)
      if (std::abs(e.checkpoints[i] - c) <= 1e-9) idx = i;
    if (idx == e.checkpoints.size()) throw DomainError("reconstruct_density: time was not recorded");
    const auto& st = e.states[idx];
    if (st.empty()) throw DomainError("reconstruct_density: no trajectories");
    Mat rho = Mat::Zero(st.front().size(), st.front().size());
    for (const auto& v : st) rho.noalias() += v * v.adjoint();
    out.push_back(rho / double(st.size()));
  }
  return out;
}

}  // namespace backflow
