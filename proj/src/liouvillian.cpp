// Copyright 2026 The backflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "backflow/liouvillian.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include <unsupported/Eigen/KroneckerProduct>

namespace backflow {

Vec vectorize(const Mat& rho) {
  if (rho.rows() != rho.cols()) throw DomainError("vectorize: matrix is not square");
  const Eigen::Index d = rho.rows();
  Vec v(d * d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) v(i * d + j) = rho(i, j);
  return v;
}

Mat devectorize(const Vec& v) {
  const auto d = static_cast<Eigen::Index>(std::llround(std::sqrt(double(v.size()))));
  if (d * d != v.size()) throw DomainError("devectorize: length is not a perfect square");
  Mat rho(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) rho(i, j) = v(i * d + j);
  return rho;
}

Vec Liouvillian::restrict(const Vec& full) const {
  Vec out(double_index.size());
  for (std::size_t r = 0; r < double_index.size(); ++r) out(r) = full(double_index[r]);
  return out;
}

Vec Liouvillian::expand(const Vec& reduced) const {
  Vec out = Vec::Zero(hilbert_dim * hilbert_dim);
  for (std::size_t r = 0; r < double_index.size(); ++r) out(double_index[r]) = reduced(r);
  return out;
}

Vec Liouvillian::identity() const {
  Vec out = Vec::Zero(double_index.size());
  for (std::size_t r = 0; r < double_index.size(); ++r)
    if (double_index[r] / hilbert_dim == double_index[r] % hilbert_dim) out(r) = 1.0;
  return out;
}

Mat effective_hamiltonian(const Mat& H, const std::vector<Mat>& jumps) {
  Mat heff = H;
  for (const auto& l : jumps) heff -= 0.5 * I_unit * (l.adjoint() * l);
  return heff;
}

Liouvillian build_liouvillian(const Mat& H, const std::vector<Mat>& jumps,
                              const std::vector<int>& particle_numbers) {
  const Eigen::Index d = H.rows();
  if (H.cols() != d) throw DomainError("build_liouvillian: H is not square");
  for (const auto& l : jumps)
    if (l.rows() != d || l.cols() != d) throw DomainError("build_liouvillian: jump dimension mismatch");
  if (!particle_numbers.empty() && static_cast<Eigen::Index>(particle_numbers.size()) != d)
    throw DomainError("build_liouvillian: particle-number labels do not match the dimension");

  const Mat heff = effective_hamiltonian(H, jumps);
  const Mat id = Mat::Identity(d, d);
  Liouvillian out;
  out.hilbert_dim = static_cast<std::size_t>(d);
  out.matrix = -I_unit * (Mat(Eigen::kroneckerProduct(heff, id)) - Mat(Eigen::kroneckerProduct(id, heff.conjugate())));
  for (const auto& l : jumps) out.matrix += Mat(Eigen::kroneckerProduct(l, l.conjugate()));
  out.double_index.resize(d * d);
  std::iota(out.double_index.begin(), out.double_index.end(), std::size_t{0});
  if (!particle_numbers.empty()) {
    out.charge_map.resize(d * d);
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = 0; j < d; ++j) out.charge_map[i * d + j] = {particle_numbers[i], particle_numbers[j]};
  }
  return out;
}

Liouvillian build_liouvillian(const Mat& H, const std::vector<Mat>& jumps, const OccupationBasis& basis) {
  if (static_cast<Eigen::Index>(basis.size()) != H.rows())
    throw DomainError("build_liouvillian: basis size does not match H");
  return build_liouvillian(H, jumps, basis.particle_numbers());
}

int BlockSet::find(ChargeLabel c) const {
  for (std::size_t s = 0; s < sectors.size(); ++s)
    if (sectors[s].charge == c) return static_cast<int>(s);
  return -1;
}

Vec BlockSet::slice(const Vec& v, int sector) const {
  const auto& rows = sectors[sector].rows;
  Vec out(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) out(r) = v(rows[r]);
  return out;
}

Vec BlockSet::place(const Vec& part, int sector) const {
  Vec out = Vec::Zero(dim);
  const auto& rows = sectors[sector].rows;
  for (std::size_t r = 0; r < rows.size(); ++r) out(rows[r]) = part(r);
  return out;
}

Mat BlockSet::reassemble() const {
  Mat out = Mat::Zero(dim, dim);
  auto put = [&](int to, int from, const Mat& b) {
    const auto& rr = sectors[to].rows;
    const auto& cc = sectors[from].rows;
    for (std::size_t i = 0; i < rr.size(); ++i)
      for (std::size_t j = 0; j < cc.size(); ++j) out(rr[i], cc[j]) += b(i, j);
  };
  for (const auto& [s, b] : L0) put(s, s, b);
  for (const auto& [k, b] : Ld) put(k.first, k.second, b);
  for (const auto& [k, b] : Lu) put(k.first, k.second, b);
  return out;
}

BlockSet block_decompose(const Liouvillian& L) {
  if (!L.has_charges()) throw UnsupportedModelError("block_decompose: Liouvillian carries no charge labels");
  BlockSet bs;
  bs.dim = L.size();
  std::map<ChargeLabel, int> lookup;
  for (std::size_t r = 0; r < L.size(); ++r) {
    auto [it, fresh] = lookup.try_emplace(L.charge_map[r], static_cast<int>(bs.sectors.size()));
    if (fresh) bs.sectors.push_back({L.charge_map[r], {}});
    bs.sectors[it->second].rows.push_back(static_cast<int>(r));
  }
  // Sectors in ascending charge order for deterministic iteration.
  std::sort(bs.sectors.begin(), bs.sectors.end(), [](const Sector& a, const Sector& b) { return a.charge < b.charge; });

  const int ns = static_cast<int>(bs.sectors.size());
  for (int to = 0; to < ns; ++to) {
    for (int from = 0; from < ns; ++from) {
      const auto& rr = bs.sectors[to].rows;
      const auto& cc = bs.sectors[from].rows;
      Mat b(rr.size(), cc.size());
      for (std::size_t i = 0; i < rr.size(); ++i)
        for (std::size_t j = 0; j < cc.size(); ++j) b(i, j) = L.matrix(rr[i], cc[j]);
      const ChargeLabel ct = bs.sectors[to].charge, cf = bs.sectors[from].charge;
      const int dn = ct.n - cf.n, dnb = ct.nbar - cf.nbar;
      if (to == from) {
        bs.L0.emplace(to, std::move(b));
      } else if (b.cwiseAbs().maxCoeff() == 0.0) {
        continue;
      } else if (dn == dnb && dn < 0) {
        bs.Ld.emplace(std::make_pair(to, from), std::move(b));
      } else if (dn == dnb && dn > 0) {
        bs.Lu.emplace(std::make_pair(to, from), std::move(b));
      } else {
        throw UnsupportedModelError("block_decompose: generator mixes charge sectors unevenly");
      }
    }
  }
  return bs;
}

Liouvillian restrict_weak_symmetry(const Liouvillian& L, int n_diff) {
  if (!L.has_charges()) throw UnsupportedModelError("restrict_weak_symmetry: Liouvillian carries no charge labels");
  std::vector<int> keep;
  for (std::size_t r = 0; r < L.size(); ++r)
    if (L.charge_map[r].n - L.charge_map[r].nbar == n_diff) keep.push_back(static_cast<int>(r));
  if (keep.empty()) throw DomainError("restrict_weak_symmetry: empty subspace for n_diff " + std::to_string(n_diff));
  Liouvillian out;
  out.hilbert_dim = L.hilbert_dim;
  out.matrix.resize(keep.size(), keep.size());
  for (std::size_t i = 0; i < keep.size(); ++i) {
    for (std::size_t j = 0; j < keep.size(); ++j) out.matrix(i, j) = L.matrix(keep[i], keep[j]);
    out.double_index.push_back(L.double_index[keep[i]]);
    out.charge_map.push_back(L.charge_map[keep[i]]);
  }
  return out;
}

Spectrum spectrum(const Mat& L) {
  if (L.rows() != L.cols()) throw DomainError("spectrum: matrix is not square");
  Eigen::ComplexEigenSolver<Mat> es(L, true);
  if (es.info() != Eigen::Success) throw NumericError("spectrum: eigensolver did not converge");
  const Eigen::Index n = L.rows();

  // Descending real part; clusters of real parts within 1e-9 sorted by imaginary part.
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  const Vec& ev = es.eigenvalues();
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return ev(a).real() > ev(b).real(); });
  for (Eigen::Index start = 0; start < n;) {
    Eigen::Index stop = start + 1;
    while (stop < n && ev(order[stop - 1]).real() - ev(order[stop]).real() <= 1e-9) ++stop;
    std::stable_sort(order.begin() + start, order.begin() + stop,
                     [&](auto a, auto b) { return ev(a).imag() < ev(b).imag(); });
    start = stop;
  }

  Spectrum s;
  s.values.resize(n);
  s.right.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    s.values(k) = ev(order[k]);
    s.right.col(k) = es.eigenvectors().col(order[k]).normalized();
  }
  Eigen::BDCSVD<Mat> svd(s.right);
  s.min_singular = svd.singularValues()(n - 1);
  s.diagonalizable = s.min_singular > 1e-8;
  s.condition = RVec::Constant(n, std::numeric_limits<double>::infinity());
  if (s.diagonalizable) {
    s.left = s.right.inverse();
    const double bio = (s.left * s.right - Mat::Identity(n, n)).cwiseAbs().maxCoeff();
    if (bio > 1e-9) s.diagonalizable = false;
    for (Eigen::Index k = 0; k < n; ++k) s.condition(k) = s.left.row(k).norm();
  }
  return s;
}

cplx gap(const Spectrum& s) {
  if (s.values.size() < 2) throw DomainError("gap: need at least two eigenvalues");
  return s.values(1);
}

std::vector<Vec> steady_states(const Liouvillian& L, const Spectrum& s, double tol) {
  std::vector<Vec> out;
  for (Eigen::Index k = 0; k < s.values.size(); ++k) {
    if (std::abs(s.values(k)) > tol) continue;
    Vec v = s.right.col(k);
    const cplx tr = L.trace(v);
    if (std::abs(tr) > 1e-12) v /= tr;
    out.push_back(v);
  }
  return out;
}

Vec steady_state(const Liouvillian& L) {
  auto all = steady_states(L, spectrum(L.matrix));
  if (all.empty()) throw NumericError("steady_state: no eigenvalue at zero");
  return all.front();
}

}  // namespace backflow
