// Copyright 2026 The backflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "backflow/fockspace.hpp"

#include <algorithm>

namespace backflow {

namespace {

constexpr int kMaxModes = 24;

void check_mode(const OccupationBasis& basis, int mode) {
  if (basis.sector_filter)
    throw DomainError("operator_matrix: basis is sector-filtered; build on the full space and project");
  if (mode < 0 || mode >= basis.num_modes)
    throw DomainError("operator_matrix: mode " + std::to_string(mode) + " out of range");
}

template <class Emit>
void for_each_entry(const OccupationBasis& basis, int mode, OpKind kind, Emit emit) {
  const Word bit = Word{1} << mode;
  for (std::size_t j = 0; j < basis.size(); ++j) {
    const Word w = basis.states[j];
    switch (kind) {
      case OpKind::annihilation:
        if (w & bit) emit(static_cast<std::size_t>(basis.index(w ^ bit)), j, jw_sign(w, mode));
        break;
      case OpKind::creation:
        if (!(w & bit)) emit(static_cast<std::size_t>(basis.index(w ^ bit)), j, jw_sign(w, mode));
        break;
      case OpKind::number:
        if (w & bit) emit(j, j, 1);
        break;
    }
  }
}

}  // namespace

long OccupationBasis::index(Word w) const {
  auto it = std::lower_bound(states.begin(), states.end(), w);
  if (it == states.end() || *it != w) return -1;
  return static_cast<long>(it - states.begin());
}

std::vector<int> OccupationBasis::particle_numbers() const {
  std::vector<int> out(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) out[i] = popcount(states[i]);
  return out;
}

std::string OccupationBasis::label(std::size_t i) const {
  std::string s(num_modes, '0');
  for (int m = 0; m < num_modes; ++m)
    if (states[i] >> m & 1) s[m] = '1';
  return s;
}

OccupationBasis build_basis(int num_modes, std::optional<int> particle_number) {
  if (num_modes < 1) throw DomainError("build_basis: num_modes must be >= 1");
  if (num_modes > kMaxModes) throw CapacityError("build_basis: too many modes");
  if (particle_number && (*particle_number < 0 || *particle_number > num_modes))
    throw DomainError("build_basis: particle_number must lie in [0, num_modes]");
  OccupationBasis b;
  b.num_modes = num_modes;
  b.sector_filter = particle_number;
  const Word end = Word{1} << num_modes;
  for (Word w = 0; w < end; ++w)
    if (!particle_number || popcount(w) == *particle_number) b.states.push_back(w);
  return b;
}

Mat operator_matrix(const OccupationBasis& basis, int mode, OpKind kind) {
  check_mode(basis, mode);
  Mat m = Mat::Zero(basis.size(), basis.size());
  for_each_entry(basis, mode, kind, [&](std::size_t i, std::size_t j, int s) { m(i, j) = s; });
  return m;
}

SpMat operator_sparse(const OccupationBasis& basis, int mode, OpKind kind) {
  check_mode(basis, mode);
  std::vector<Eigen::Triplet<cplx>> trip;
  for_each_entry(basis, mode, kind, [&](std::size_t i, std::size_t j, int s) {
    trip.emplace_back(static_cast<int>(i), static_cast<int>(j), cplx(s));
  });
  SpMat m(basis.size(), basis.size());
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

Mat sector_projector(const OccupationBasis& basis, int n) {
  if (n < 0 || n > basis.num_modes) throw DomainError("sector_projector: n out of range");
  Mat p = Mat::Zero(basis.size(), basis.size());
  for (std::size_t i = 0; i < basis.size(); ++i)
    if (basis.particle_number(i) == n) p(i, i) = 1.0;
  return p;
}

Mat embedding(const OccupationBasis& full, const OccupationBasis& sub) {
  if (full.num_modes != sub.num_modes) throw DomainError("embedding: mode counts differ");
  Mat e = Mat::Zero(full.size(), sub.size());
  for (std::size_t j = 0; j < sub.size(); ++j) {
    long i = full.index(sub.states[j]);
    if (i < 0) throw DomainError("embedding: state missing from full basis");
    e(i, j) = 1.0;
  }
  return e;
}

}  // namespace backflow
