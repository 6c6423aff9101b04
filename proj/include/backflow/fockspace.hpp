// Copyright 2026 The backflow Authors
// SPDX-License-Identifier: Apache-2.0

// Fermionic occupation-number bases.
//
// Mode m is stored in bit m of the state word, and states are listed in
// ascending integer order. Written as occupation strings with mode 0 first,
// two modes read |00>, |10>, |01>, |11>.
//
// Jordan-Wigner order: |n> = prod_{m ascending} (c_m^dag)^{n_m} |0>, so
// c_m picks up (-1)^(occupied modes below m).

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "backflow/common.hpp"

namespace backflow {

using Word = std::uint32_t;

inline int popcount(Word w) { return __builtin_popcount(w); }

struct OccupationBasis {
  int num_modes = 0;
  std::optional<int> sector_filter;
  std::vector<Word> states;

  std::size_t size() const { return states.size(); }
  // -1 if the word is not in the basis.
  long index(Word w) const;
  int particle_number(std::size_t i) const { return popcount(states[i]); }
  std::vector<int> particle_numbers() const;
  // Occupation string with mode 0 first, e.g. "10" for mode 0 occupied.
  std::string label(std::size_t i) const;
};

enum class OpKind { annihilation, creation, number };

OccupationBasis build_basis(int num_modes, std::optional<int> particle_number = std::nullopt);

// Jordan-Wigner sign of c_m acting on w (assumes bit m set).
inline int jw_sign(Word w, int mode) {
  return (popcount(w & ((Word{1} << mode) - 1)) & 1) ? -1 : 1;
}

Mat operator_matrix(const OccupationBasis& basis, int mode, OpKind kind);
SpMat operator_sparse(const OccupationBasis& basis, int mode, OpKind kind);

Mat sector_projector(const OccupationBasis& basis, int n);

// Isometry (full.size() x sub.size()) embedding a sub-basis into a full basis.
Mat embedding(const OccupationBasis& full, const OccupationBasis& sub);

}  // namespace backflow
