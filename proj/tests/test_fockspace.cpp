// Copyright 2026 The backflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "backflow/fockspace.hpp"

#include "catch_amalgamated.hpp"

using namespace backflow;

TEST_CASE("two-mode basis ordering and labels") {
  const auto b = build_basis(2);
  REQUIRE(b.size() == 4);
  CHECK(b.label(0) == "00");
  CHECK(b.label(1) == "10");
  CHECK(b.label(2) == "01");
  CHECK(b.label(3) == "11");
  CHECK(b.particle_numbers() == std::vector<int>{0, 1, 1, 2});
  CHECK(b.index(0b11) == 3);
  CHECK(b.index(0b100) == -1);
}

TEST_CASE("sector basis keeps only the requested particle number") {
  const auto b = build_basis(4, 2);
  REQUIRE(b.size() == 6);
  for (std::size_t i = 0; i < b.size(); ++i) CHECK(b.particle_number(i) == 2);
  CHECK(std::is_sorted(b.states.begin(), b.states.end()));
}

TEST_CASE("annihilating mode 1 on |11> gives -|10>") {
  const auto b = build_basis(2);
  const Mat c1 = operator_matrix(b, 1, OpKind::annihilation);
  Vec s = Vec::Zero(4);
  s(b.index(0b11)) = 1.0;
  const Vec r = c1 * s;
  CHECK(r(b.index(0b01)) == cplx(-1.0));
  CHECK(r.norm() == Catch::Approx(1.0));
}

TEST_CASE("canonical anticommutation relations") {
  for (int n : {1, 2, 3, 4}) {
    const auto b = build_basis(n);
    const auto dim = static_cast<Eigen::Index>(b.size());
    std::vector<Mat> c, cd;
    for (int m = 0; m < n; ++m) {
      c.push_back(operator_matrix(b, m, OpKind::annihilation));
      cd.push_back(operator_matrix(b, m, OpKind::creation));
    }
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const Mat id = i == j ? Mat(Mat::Identity(dim, dim)) : Mat(Mat::Zero(dim, dim));
        CHECK((c[i] * cd[j] + cd[j] * c[i] - id).cwiseAbs().maxCoeff() < 1e-14);
        CHECK((c[i] * c[j] + c[j] * c[i]).cwiseAbs().maxCoeff() < 1e-14);
      }
  }
}

TEST_CASE("number operator and sparse form agree with dense") {
  const auto b = build_basis(3);
  for (int m = 0; m < 3; ++m) {
    const Mat n = operator_matrix(b, m, OpKind::number);
    const Mat cdc = operator_matrix(b, m, OpKind::creation) * operator_matrix(b, m, OpKind::annihilation);
    CHECK((n - cdc).cwiseAbs().maxCoeff() < 1e-15);
    for (auto k : {OpKind::annihilation, OpKind::creation, OpKind::number})
      CHECK((Mat(operator_sparse(b, m, k)) - operator_matrix(b, m, k)).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("sector projector and embedding") {
  const auto full = build_basis(4);
  const auto sub = build_basis(4, 2);
  const Mat E = embedding(full, sub);
  CHECK((E.adjoint() * E - Mat::Identity(6, 6)).cwiseAbs().maxCoeff() < 1e-15);
  const Mat P = sector_projector(full, 2);
  CHECK((P - E * E.adjoint()).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("invalid inputs are rejected") {
  CHECK_THROWS_AS(build_basis(-1), DomainError);
  CHECK_THROWS_AS(build_basis(2, 3), DomainError);
  CHECK_THROWS_AS(build_basis(40), CapacityError);
  CHECK_THROWS_AS(operator_matrix(build_basis(2), 2, OpKind::creation), DomainError);
  CHECK_THROWS_AS(operator_matrix(build_basis(2, 1), 0, OpKind::creation), DomainError);
}
