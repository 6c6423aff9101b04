// Copyright 2026 The backflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "backflow/models.hpp"

#include <cmath>
#include <numbers>

namespace backflow {

namespace {

constexpr double kPi = std::numbers::pi;

Mat one_body_dense(const OccupationBasis& basis, const Mat& h) { return Mat(one_body_operator(basis, h)); }

// Index of an HK two-particle state in the 16-state Fock basis.
constexpr Word kHkTwo[4] = {0b0101, 0b1001, 0b0110, 0b1010};  // |1010>, |1001>, |0110>, |0101>

}  // namespace

std::array<double, 3> BlochModel::d(double k) const {
  if (form == Form::chiral) return {t + w * std::cos(k), w * std::sin(k), 0.0};
  return {t + w * std::cos(k), 0.0, w * std::sin(k)};
}

double BlochModel::gamma_loss() const {
  double g = 0.0;
  for (const auto& d : dissipators)
    if (d.kind == Dissipator::Kind::loss) g += d.gamma;
  return g;
}

double BlochModel::gamma_gain() const {
  double g = 0.0;
  for (const auto& d : dissipators)
    if (d.kind == Dissipator::Kind::gain) g += d.gamma;
  return g;
}

void BlochModel::validate() const {
  for (const auto& d : dissipators) {
    if (!(d.gamma >= 0.0))
      throw DomainError(d.kind == Dissipator::Kind::gain ? "gain strength must be nonnegative"
                                                         : "loss strength must be nonnegative");
  }
  if (!(U >= 0.0)) throw DomainError("interaction strength must be nonnegative");
}

BlochModel chiral_model(double t, double w) {
  BlochModel m;
  m.form = BlochModel::Form::chiral;
  m.t = t;
  m.w = w;
  return m;
}

BlochModel hk_model(double t) {
  BlochModel m;
  m.form = BlochModel::Form::hk;
  m.t = t;
  return m;
}

BlochModel with_dissipators(BlochModel m, double gamma_l, double gamma_g, Orbital orb) {
  m.dissipators = {{Dissipator::Kind::loss, orb, gamma_l}, {Dissipator::Kind::gain, orb, gamma_g}};
  m.validate();
  return m;
}

Mat two_band_bloch(double k, const BlochModel& m) {
  const auto d = m.d(k);
  Mat h(2, 2);
  h << d[2], cplx(d[0], -d[1]), cplx(d[0], d[1]), -d[2];
  return h;
}

Vec lower_band_state(double k, const BlochModel& m) {
  const auto d = m.d(k);
  if (std::hypot(d[0], d[1], d[2]) < 1e-12) throw DomainError("lower_band_state: gap closes at k = " + std::to_string(k));
  Eigen::SelfAdjointEigenSolver<Mat> es(two_band_bloch(k, m));
  Vec v = es.eigenvectors().col(0);
  const int lead = std::abs(v(0)) > 1e-14 ? 0 : 1;
  v *= std::conj(v(lead)) / std::abs(v(lead));
  v(lead) = std::abs(v(lead));
  return v;
}

int winding_number(const BlochModel& m, int npts) {
  auto angle = [&](double k) {
    const auto d = m.d(k);
    return m.form == BlochModel::Form::chiral ? std::atan2(d[1], d[0]) : std::atan2(d[2], d[0]);
  };
  double total = 0.0;
  double prev = angle(0.0);
  for (int i = 1; i <= npts; ++i) {
    const double cur = angle(2.0 * kPi * i / npts);
    total += std::remainder(cur - prev, 2.0 * kPi);
    prev = cur;
  }
  return static_cast<int>(std::lround(total / (2.0 * kPi)));
}

Mat single_k_hamiltonian(double k, const BlochModel& m) {
  return one_body_dense(build_basis(2), two_band_bloch(k, m));
}

std::vector<Mat> single_k_jump_operators(const BlochModel& m) {
  m.validate();
  const auto basis = build_basis(2);
  std::vector<Mat> out;
  for (const auto& d : m.dissipators) {
    const int mode = static_cast<int>(d.orbital);
    if (mode != 0 && mode != 1) throw DomainError("single_k_jump_operators: unknown orbital");
    const auto kind = d.kind == Dissipator::Kind::loss ? OpKind::annihilation : OpKind::creation;
    out.push_back(std::sqrt(d.gamma) * operator_matrix(basis, mode, kind));
  }
  return out;
}

Vec single_k_initial_state(double k, const BlochModel& pre) {
  const Vec v = lower_band_state(k, pre);
  Vec psi = Vec::Zero(4);
  psi(0b01) = v(0);
  psi(0b10) = v(1);
  return psi;
}

Mat hk_two_particle_heff(double k, double U, double gamma_up_gain) {
  return hk_two_particle_heff(k, U, gamma_up_gain, hk_model(1.5));
}

Mat hk_two_particle_heff(double k, double U, double gamma_up_gain, const BlochModel& post) {
  const auto d = post.d(k);
  const double V = U;
  const cplx g = -0.5 * I_unit * gamma_up_gain;
  Mat h(4, 4);
  h << 4 * V + 2 * d[2], d[0], d[0], 0.0,
       d[0], 2 * V, 2 * V, d[0],
       d[0], 2 * V, 2 * V + g, d[0],
       0.0, d[0], d[0], 4 * V - 2 * d[2] + g;
  return h;
}

Vec hk_two_particle_initial_state(double k, const BlochModel& pre) {
  const Vec v = lower_band_state(k, pre);
  Vec psi(4);
  psi << v(0) * v(0), v(0) * v(1), v(0) * v(1), v(1) * v(1);
  return psi;
}

Mat hk_triplet_projector() {
  const double r = 1.0 / std::sqrt(2.0);
  Mat p = Mat::Zero(3, 4);
  p(0, 0) = 1.0;
  p(1, 1) = r;
  p(1, 2) = r;
  p(2, 3) = 1.0;
  return p;
}

TripletHamiltonian hk_triplet_hamiltonian(double k, double gamma_up_gain) {
  return hk_triplet_hamiltonian(k, gamma_up_gain, hk_model(1.5));
}

TripletHamiltonian hk_triplet_hamiltonian(double k, double gamma_up_gain, const BlochModel& post) {
  // The sandwich is 4V + (V-independent part); drop the 4V - i gamma/4 shift.
  const Mat p = hk_triplet_projector();
  TripletHamiltonian out;
  out.h = p * hk_two_particle_heff(k, 0.0, gamma_up_gain, post) * p.adjoint();
  out.h += 0.25 * I_unit * gamma_up_gain * Mat::Identity(3, 3);
  const auto d = post.d(k);
  out.eps = std::sqrt(std::pow(2.0 * d[2] + 0.25 * I_unit * gamma_up_gain, 2) + 4.0 * d[0] * d[0]);
  out.values.resize(3);
  out.values << 0.0, out.eps, -out.eps;
  return out;
}

Mat hk_fock_hamiltonian(double k, const BlochModel& post) {
  const auto basis = build_basis(4);
  Mat h1 = Mat::Zero(4, 4);
  const Mat hk = two_band_bloch(k, post);
  h1.block(0, 0, 2, 2) = hk;
  h1.block(2, 2, 2, 2) = hk;
  Mat H = one_body_dense(basis, h1);
  if (post.U != 0.0) {
    // N_left, N_right as one-body operators in the (orbital, spin) modes.
    const double r = 0.5;
    Mat left = Mat::Zero(4, 4), right = Mat::Zero(4, 4);
    for (int o = 0; o < 2; ++o) {
      const int up = o, dn = 2 + o;
      left(up, up) += r, left(dn, dn) += r, left(up, dn) -= r, left(dn, up) -= r;
      right(up, up) += r, right(dn, dn) += r, right(up, dn) += r, right(dn, up) += r;
    }
    H += 4.0 * post.U * one_body_dense(basis, left) * one_body_dense(basis, right);
  }
  return H;
}

std::vector<Mat> hk_fock_jumps(double gamma_up_loss, double gamma_up_gain) {
  if (gamma_up_loss < 0.0) throw DomainError("loss strength must be nonnegative");
  if (gamma_up_gain < 0.0) throw DomainError("gain strength must be nonnegative");
  const auto basis = build_basis(4);
  std::vector<Mat> out;
  if (gamma_up_loss > 0.0) out.push_back(std::sqrt(gamma_up_loss) * operator_matrix(basis, 0, OpKind::annihilation));
  if (gamma_up_gain > 0.0) out.push_back(std::sqrt(gamma_up_gain) * operator_matrix(basis, 0, OpKind::creation));
  return out;
}

Vec hk_fock_initial_state(double k, const BlochModel& pre) {
  const Vec two = hk_two_particle_initial_state(k, pre);
  Vec psi = Vec::Zero(16);
  for (int i = 0; i < 4; ++i) psi(kHkTwo[i]) = two(i);
  return psi;
}

Mat chain_hopping(int n_cells, const BlochModel& m, double flux) {
  if (n_cells < 1) throw DomainError("chain_hopping: need at least one cell");
  Mat h = Mat::Zero(2 * n_cells, 2 * n_cells);
  for (int j = 0; j < n_cells; ++j) {
    const double k = 2.0 * kPi * j / n_cells + flux / n_cells;
    const Mat hk = two_band_bloch(k, m);
    for (int x = 0; x < n_cells; ++x)
      for (int y = 0; y < n_cells; ++y)
        h.block(2 * x, 2 * y, 2, 2) += std::exp(I_unit * (k * (x - y))) * hk / double(n_cells);
  }
  return h;
}

SpMat one_body_operator(const OccupationBasis& basis, const Mat& h) {
  if (basis.sector_filter) throw DomainError("one_body_operator: needs the full Fock basis");
  const int nm = basis.num_modes;
  if (h.rows() != nm || h.cols() != nm) throw DomainError("one_body_operator: matrix size differs from mode count");
  std::vector<Eigen::Triplet<cplx>> trip;
  for (std::size_t s = 0; s < basis.size(); ++s) {
    const Word w = basis.states[s];
    for (int j = 0; j < nm; ++j) {
      if (!(w >> j & 1)) continue;
      const Word wj = w ^ (Word{1} << j);
      const int sj = jw_sign(w, j);
      for (int i = 0; i < nm; ++i) {
        if (h(i, j) == cplx(0.0) || (wj >> i & 1)) continue;
        const Word wi = wj ^ (Word{1} << i);
        trip.emplace_back(static_cast<int>(basis.index(wi)), static_cast<int>(s),
                          h(i, j) * double(sj * jw_sign(wj, i)));
      }
    }
  }
  SpMat out(basis.size(), basis.size());
  out.setFromTriplets(trip.begin(), trip.end());
  return out;
}

ManyBodyChain many_body_chain(int n_cells, const BlochModel& post, double flux) {
  if (n_cells < 1) throw DomainError("many_body_chain: need at least one cell");
  if (n_cells > kMaxCells) throw CapacityError("many_body_chain: at most " + std::to_string(kMaxCells) + " cells");
  post.validate();
  ManyBodyChain c;
  c.n_cells = n_cells;
  c.basis = build_basis(2 * n_cells);
  c.H = one_body_operator(c.basis, chain_hopping(n_cells, post, flux));
  const double gl = post.gamma_loss(), gg = post.gamma_gain();
  for (int x = 0; x < n_cells; ++x) {
    const SpMat a = operator_sparse(c.basis, 2 * x, OpKind::annihilation);
    const SpMat b = operator_sparse(c.basis, 2 * x + 1, OpKind::annihilation);
    if (gl > 0.0) c.jumps.push_back(SpMat(std::sqrt(gl) * (a * b)));
    if (gg > 0.0) c.jumps.push_back(SpMat(std::sqrt(gg) * (SpMat(a.adjoint()) * SpMat(b.adjoint()))));
  }
  c.heff = c.H;
  for (const auto& l : c.jumps) c.heff -= SpMat(0.5 * I_unit * (SpMat(l.adjoint()) * l));
  c.heff.prune(cplx(0.0));
  return c;
}

Vec slater_ground_state(int n_cells, const BlochModel& pre, double flux) {
  if (n_cells > kMaxCells) throw CapacityError("slater_ground_state: too many cells");
  const int nm = 2 * n_cells;
  Mat phi(nm, n_cells);  // phi(i, j): orbital j on mode i
  for (int j = 0; j < n_cells; ++j) {
    const double k = 2.0 * kPi * j / n_cells + flux / n_cells;
    const Vec v = lower_band_state(k, pre);
    for (int x = 0; x < n_cells; ++x)
      for (int o = 0; o < 2; ++o) phi(2 * x + o, j) = std::exp(I_unit * (k * x)) * v(o) / std::sqrt(double(n_cells));
  }
  const auto basis = build_basis(nm);
  Vec psi = Vec::Zero(basis.size());
  Mat sub(n_cells, n_cells);
  for (std::size_t s = 0; s < basis.size(); ++s) {
    const Word w = basis.states[s];
    if (popcount(w) != n_cells) continue;
    int row = 0;
    for (int i = 0; i < nm; ++i)
      if (w >> i & 1) sub.row(row++) = phi.row(i);
    psi(s) = sub.determinant();
  }
  return psi / psi.norm();
}

}  // namespace backflow
