// Copyright 2026 The backflow Authors
// SPDX-License-Identifier: Apache-2.0

// Monte-Carlo wavefunction trajectories with the first-order step
//   p_mu = dt <psi|L_mu^dag L_mu|psi>,  M0 = 1 - i Heff dt,
// one uniform draw per step compared against the cumulative p_mu.

#pragma once

#include <cstdint>
#include <vector>

#include "backflow/common.hpp"
#include "backflow/fockspace.hpp"

namespace backflow {

// Counter-based uniform in [0, 1): a pure function of (seed, trajectory, step).
double stream_uniform(std::uint64_t seed, std::uint64_t trajectory, std::uint64_t step);

struct JumpEvent {
  double time;
  int jump;
};

struct TrajectoryState {
  Vec psi;
  int sector = 0;
  double time = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t trajectory = 0;
  std::uint64_t step = 0;
  std::vector<JumpEvent> jump_log;
};

// Generators split into particle-number sectors so trajectories only touch
// the sector they currently occupy.
struct SectorSystem {
  struct Jump {
    int target = -1;  // -1: annihilates this sector
    SpMat op;         // target x source
    SpMat dagger_op;  // op^dag op, source x source
  };
  struct Block {
    std::vector<int> rows;  // indices into the full basis
    SpMat heff;
    std::vector<Jump> jumps;  // one per jump operator, for this source sector
    SpMat rate;               // sum of dagger_op over jumps
  };
  std::size_t full_dim = 0;
  std::vector<Block> blocks;
  std::size_t num_jumps = 0;

  // Split full-space matrices by labels (e.g. particle numbers). Heff must
  // not couple different labels; jumps must map each label to one label.
  static SectorSystem from_full(const SpMat& heff, const std::vector<SpMat>& jumps, const std::vector<int>& labels);
  static SectorSystem dense(const Mat& heff, const std::vector<Mat>& jumps);
  int sector_with_label(int label) const;
  std::vector<int> labels;  // label per block
  Vec embed(int sector, const Vec& v) const;
};

enum class NoJump { euler, taylor };

// One step of the listed algorithm. Throws NumericError when sum p_mu >= 1.
void mcwf_step(TrajectoryState& s, const SectorSystem& sys, double dt, NoJump mode = NoJump::euler);
// Dense single-sector convenience form.
TrajectoryState mcwf_step(const TrajectoryState& s, const Mat& heff, const std::vector<Mat>& jumps, double dt);

// p_mu for the current state, in jump order.
std::vector<double> jump_probabilities(const TrajectoryState& s, const SectorSystem& sys, double dt);

struct EnsembleOptions {
  std::vector<double> checkpoints;  // subset of the time grid for density reconstruction
  int threads = 1;
  NoJump no_jump = NoJump::euler;
  bool keep_logs = false;
};

struct EnsembleResult {
  int M = 0;
  int aborted = 0;
  std::vector<double> times;
  std::vector<double> g;          // mean |<psi(0)|psi_m(t)>|^2
  std::vector<double> g_stderr;
  std::vector<double> checkpoints;
  // states[c][m]: full-space state of trajectory m at checkpoint c
  std::vector<std::vector<Vec>> states;
  std::vector<double> mean_jumps;  // per jump operator
  std::vector<std::vector<JumpEvent>> logs;
};

// Throws DomainError for M < 1 or non-uniform grids, NumericError when more
// than 1% of trajectories abort.
EnsembleResult run_ensemble(const SectorSystem& sys, int sector, const Vec& psi0, const std::vector<double>& times,
                            int M, std::uint64_t seed, const EnsembleOptions& opt = {});
EnsembleResult run_ensemble(const Vec& psi0, const Mat& heff, const std::vector<Mat>& jumps,
                            const std::vector<double>& times, int M, std::uint64_t seed,
                            const EnsembleOptions& opt = {});

// (1/M) sum_m |psi_m><psi_m| at each requested checkpoint.
std::vector<Mat> reconstruct_density(const EnsembleResult& e, const std::vector<double>& checkpoints);

}  // namespace backflow
