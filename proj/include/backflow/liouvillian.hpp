// Copyright 2026 The backflow Authors
// SPDX-License-Identifier: Apache-2.0

// Lindblad generators on the double Hilbert space.
//
// Density matrices are flattened row-major: rho(i, j) sits at i * D + j, and
// vec(A rho B) = (A kron B^T) vec(rho).

#pragma once

#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "backflow/common.hpp"
#include "backflow/fockspace.hpp"

namespace backflow {

Vec vectorize(const Mat& rho);
Mat devectorize(const Vec& v);
// <<A|B>> = tr(A^dag B)
inline cplx inner(const Vec& a, const Vec& b) { return a.dot(b); }

struct ChargeLabel {
  int n = 0;     // ket particle number
  int nbar = 0;  // bra particle number
  bool operator==(const ChargeLabel&) const = default;
  auto operator<=>(const ChargeLabel&) const = default;
};

struct Liouvillian {
  Mat matrix;
  std::size_t hilbert_dim = 0;
  // Row r of `matrix` is the double-space index double_index[r] = i * D + j.
  std::vector<std::size_t> double_index;
  // One label per row; empty when the Hilbert basis has no particle numbers.
  std::vector<ChargeLabel> charge_map;

  bool has_charges() const { return !charge_map.empty(); }
  std::size_t size() const { return static_cast<std::size_t>(matrix.rows()); }
  // Pick the rows of a full-space vector that this Liouvillian keeps.
  Vec restrict(const Vec& full) const;
  // Inverse of restrict; dropped rows are zero.
  Vec expand(const Vec& reduced) const;
  // <<I| in the kept rows.
  Vec identity() const;
  cplx trace(const Vec& reduced) const { return inner(identity(), reduced); }
};

Mat effective_hamiltonian(const Mat& H, const std::vector<Mat>& jumps);

// Throws DomainError on dimension mismatch. `particle_numbers`, if given,
// labels each Hilbert basis state and populates charge_map.
Liouvillian build_liouvillian(const Mat& H, const std::vector<Mat>& jumps,
                              const std::vector<int>& particle_numbers = {});
Liouvillian build_liouvillian(const Mat& H, const std::vector<Mat>& jumps,
                              const OccupationBasis& basis);

struct Sector {
  ChargeLabel charge;
  std::vector<int> rows;  // rows of the parent Liouvillian
};

// L = L0 + Ld + Lu. Off-diagonal keys are (to, from) sector indices.
struct BlockSet {
  std::size_t dim = 0;
  std::vector<Sector> sectors;
  std::map<int, Mat> L0;
  std::map<std::pair<int, int>, Mat> Ld;
  std::map<std::pair<int, int>, Mat> Lu;

  int find(ChargeLabel c) const;
  Mat reassemble() const;
  Vec slice(const Vec& v, int sector) const;
  Vec place(const Vec& part, int sector) const;
};

// Throws UnsupportedModelError without charges or when an entry couples
// sectors other than by an equal shift of ket and bra number.
BlockSet block_decompose(const Liouvillian& L);

Liouvillian restrict_weak_symmetry(const Liouvillian& L, int n_diff);

struct Spectrum {
  Vec values;        // descending real part; near-ties by ascending imaginary part
  Mat right;         // columns, unit norm
  Mat left;          // rows; left.row(m) * right.col(n) = delta_mn when diagonalizable
  bool diagonalizable = false;
  double min_singular = 0.0;  // of the unit-column eigenvector matrix
  RVec condition;             // per-eigenvalue condition numbers (inf if defective)
};

Spectrum spectrum(const Mat& L);
// Second-ranked eigenvalue.
cplx gap(const Spectrum& s);
// Right eigenvectors of eigenvalues within tol of zero, each scaled to unit
// trace. More than one entry means several steady states.
std::vector<Vec> steady_states(const Liouvillian& L, const Spectrum& s, double tol = 1e-9);
Vec steady_state(const Liouvillian& L);

}  // namespace backflow
