// Copyright 2026 The backflow Authors
// SPDX-License-Identifier: Apache-2.0

// Lattice models.
//
// Two-band Bloch Hamiltonians d(k).sigma on orbitals (A, B). Single-k Fock
// spaces use modes (A, B). The spinful Hatsugai-Kohmoto model uses modes
// (A up, B up, A down, B down). Chains use mode 2x + orbital for cell x.

#pragma once

#include <array>
#include <vector>

#include "backflow/common.hpp"
#include "backflow/fockspace.hpp"

namespace backflow {

enum class Orbital { A = 0, B = 1 };

struct Dissipator {
  enum class Kind { loss, gain } kind = Kind::loss;
  Orbital orbital = Orbital::A;
  double gamma = 0.0;
};

struct BlochModel {
  // chiral: d = (t + w cos k, w sin k, 0)
  // hk:     d = (t + w cos k, 0, w sin k)
  enum class Form { chiral, hk } form = Form::chiral;
  double t = 0.5;
  double w = 1.0;
  std::vector<Dissipator> dissipators;
  double U = 0.0;
  double flux = 0.0;

  std::array<double, 3> d(double k) const;
  double gamma_loss() const;
  double gamma_gain() const;
  // Throws DomainError on negative strengths.
  void validate() const;
};

BlochModel chiral_model(double t, double w = 1.0);
BlochModel hk_model(double t);
BlochModel with_dissipators(BlochModel m, double gamma_l, double gamma_g, Orbital orb = Orbital::A);

Mat two_band_bloch(double k, const BlochModel& m);
// Eigenvector of d.sigma at -|d|, first nonzero component real positive.
// Throws DomainError when |d| < 1e-12.
Vec lower_band_state(double k, const BlochModel& m);

// Winding of (d_x, d_y) about the origin, accumulated over npts samples.
int winding_number(const BlochModel& m, int npts = 400);

// Single-k two-mode Fock space (A, B).
Mat single_k_hamiltonian(double k, const BlochModel& m);
std::vector<Mat> single_k_jump_operators(const BlochModel& m);
Vec single_k_initial_state(double k, const BlochModel& pre);

// Hatsugai-Kohmoto model at one k. The two-particle block uses the basis
// |1010>, |1001>, |0110>, |0101> and the post-quench d = (3/2 + cos k, 0, sin k)
// unless a model is supplied.
Mat hk_two_particle_heff(double k, double U, double gamma_up_gain);
Mat hk_two_particle_heff(double k, double U, double gamma_up_gain, const BlochModel& post);
Vec hk_two_particle_initial_state(double k, const BlochModel& pre);

struct TripletHamiltonian {
  Mat h;       // 3x3
  Vec values;  // {0, +eps, -eps}
  cplx eps;
};
// Rows of the 3x4 projector onto |1010>, (|1001> + |0110>)/sqrt2, |0101>.
Mat hk_triplet_projector();
TripletHamiltonian hk_triplet_hamiltonian(double k, double gamma_up_gain);
TripletHamiltonian hk_triplet_hamiltonian(double k, double gamma_up_gain, const BlochModel& post);

// Full 16-state Fock space: spin-diagonal hopping plus 4U N_left N_right with
// c_left = (c_up - c_down)/sqrt2, c_right = (c_up + c_down)/sqrt2. Its
// two-particle block reproduces hk_two_particle_heff at gamma = 0.
Mat hk_fock_hamiltonian(double k, const BlochModel& post);
// sqrt(gamma_l) c_{A up} and sqrt(gamma_g) c^dag_{A up}, skipping zero strengths.
std::vector<Mat> hk_fock_jumps(double gamma_up_loss, double gamma_up_gain);
Vec hk_fock_initial_state(double k, const BlochModel& pre);

// Periodic chain of N cells with two-body loss sqrt(gl) c_xA c_xB and gain
// sqrt(gg) c^dag_xA c^dag_xB per cell. Flux shifts k_j = 2 pi j / N + phi / N.
struct ManyBodyChain {
  int n_cells = 0;
  OccupationBasis basis;
  SpMat H;
  SpMat heff;
  std::vector<SpMat> jumps;
};

inline constexpr int kMaxCells = 8;

// Real-space single-particle Hamiltonian (2N x 2N).
Mat chain_hopping(int n_cells, const BlochModel& m, double flux);
// Many-body sum_ij h_ij c^dag_i c_j on a full Fock basis.
SpMat one_body_operator(const OccupationBasis& basis, const Mat& h);
// Throws CapacityError for n_cells > kMaxCells.
ManyBodyChain many_body_chain(int n_cells, const BlochModel& post, double flux);
// Slater determinant of the lower-band orbitals, as a full Fock vector.
Vec slater_ground_state(int n_cells, const BlochModel& pre, double flux);

}  // namespace backflow
