#include "fiberwave/spin_algebra.hpp"

#include "doctest.h"
#include "test_helpers.hpp"

#include <complex>
#include <numbers>
#include <random>

using namespace fiberwave;
using Cplx = std::complex<double>;
constexpr double kPi = std::numbers::pi;

namespace {

double commutator_defect(const SpinRepresentation<double>& rep) {
  const CMatX<double>* J[3] = {&rep.J1, &rep.J2, &rep.J3};
  double worst = 0.0;
  auto check = [&](int a, int b, int c, double sign) {
    const CMatX<double> lhs = (*J[a]) * (*J[b]) - (*J[b]) * (*J[a]);
    const CMatX<double> rhs = Cplx(0, sign) * (*J[c]);
    worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff());
  };
  // [J1,J2] = iJ3 and cyclic, plus the reversed sign pairs
  check(0, 1, 2, 1.0);
  check(1, 2, 0, 1.0);
  check(2, 0, 1, 1.0);
  check(1, 0, 2, -1.0);
  check(2, 1, 0, -1.0);
  check(0, 2, 1, -1.0);
  return worst;
}

}  // namespace

TEST_CASE("make_spin_rep builds the j=1/2 matrices") {
  auto rep = make_spin_rep(0.5);
  CHECK(rep.dim == 2);
  CHECK(rep.J3(0, 0) == Cplx(0.5, 0));
  CHECK(rep.J3(1, 1) == Cplx(-0.5, 0));
  CHECK(std::abs(rep.J3.trace()) == 0.0);
}

TEST_CASE("j=1 ladder operator has sqrt(2) on the first superdiagonal") {
  auto rep = make_spin_rep(1.0);
  const double s2 = std::sqrt(2.0);
  CHECK(std::abs(rep.Jplus(0, 1) - Cplx(s2, 0)) < 1e-15);
  CHECK(std::abs(rep.Jplus(1, 2) - Cplx(s2, 0)) < 1e-15);
  double off = 0;
  for (Index r = 0; r < 3; ++r)
    for (Index c = 0; c < 3; ++c)
      if (c != r + 1) off = std::max(off, std::abs(rep.Jplus(r, c)));
  CHECK(off == 0.0);
  // ladder construction oracle: the commutation relations must follow
  CHECK(commutator_defect(rep) < 1e-12);
}

TEST_CASE("representation invariants for j = 1/2 .. 3") {
  for (double j : {0.5, 1.0, 1.5, 2.0, 2.5, 3.0}) {
    CAPTURE(j);
    auto rep = make_spin_rep(j);
    CHECK(rep.dim == Index(std::lround(2 * j)) + 1);
    CHECK(commutator_defect(rep) < 1e-12);

    const CMatX<double> casimir =
        rep.J1 * rep.J1 + rep.J2 * rep.J2 + rep.J3 * rep.J3 -
        j * (j + 1) * CMatX<double>::Identity(rep.dim, rep.dim);
    CHECK(casimir.cwiseAbs().maxCoeff() < 1e-12);

    CHECK((rep.J1 - rep.J1.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((rep.J2 - rep.J2.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((rep.J3 - rep.J3.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((rep.Jplus - rep.Jminus.adjoint()).cwiseAbs().maxCoeff() == 0.0);

    for (Index i = 0; i < rep.dim; ++i)
      CHECK(rep.J3(i, i).real() == doctest::Approx(j - double(i)).epsilon(1e-14));
  }
}

TEST_CASE("make_spin_rep rejects invalid spins") {
  CHECK_THROWS_AS(make_spin_rep(0.0), ValidationError);
  CHECK_THROWS_AS(make_spin_rep(-1.0), ValidationError);
  CHECK_THROWS_AS(make_spin_rep(0.7), ValidationError);
  CHECK_THROWS_AS(make_spin_rep(40.0), ValidationError);  // dim > 64
}

TEST_CASE("expm_skew of zero is the identity") {
  CMatX<double> zero = CMatX<double>::Zero(3, 3);
  CHECK((expm_skew(zero) - CMatX<double>::Identity(3, 3)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("expm_skew closed form: exp(-i pi J2) for j=1/2") {
  auto rep = make_spin_rep(0.5);
  const CMatX<double> A = Cplx(0, -kPi) * rep.J2;
  const CMatX<double> U = expm_skew(A);
  CMatX<double> expected(2, 2);
  expected << 0, -1, 1, 0;
  CHECK((U - expected).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("expm_skew agrees with a truncated Taylor series and inverts cleanly") {
  std::mt19937 rng(2024);
  for (int trial = 0; trial < 25; ++trial) {
    const Index dim = 2 + (trial % 4);
    CMatX<double> A = testing::random_skew_hermitian(rng, dim, 0.08);
    const CMatX<double> U = expm_skew(A);
    CHECK(unitarity_defect(U) < 1e-10);
    CHECK((U - testing::expm_taylor(A)).cwiseAbs().maxCoeff() < 1e-12);
    const CMatX<double> Uinv = expm_skew(CMatX<double>(-A));
    CHECK((U * Uinv - CMatX<double>::Identity(dim, dim)).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("expm_skew rejects bad input") {
  CMatX<double> rect = CMatX<double>::Zero(2, 3);
  CHECK_THROWS_AS(expm_skew(rect), ValidationError);
  CMatX<double> herm(2, 2);
  herm << Cplx(1, 0), Cplx(0, 0), Cplx(0, 0), Cplx(2, 0);
  CHECK_THROWS_AS(expm_skew(herm), ValidationError);
}

TEST_CASE("expm_skew is multiplicative on commuting generators") {
  std::mt19937 rng(7);
  auto rep = make_spin_rep(1.5);
  for (int trial = 0; trial < 10; ++trial) {
    const Vec3<double> axis = testing::random_unit_vector(rng);
    std::uniform_real_distribution<double> ud(-1.5, 1.5);
    const CMatX<double> A = Cplx(0, ud(rng)) * dot_j(rep, axis);
    const CMatX<double> B = Cplx(0, ud(rng)) * dot_j(rep, axis);  // same axis: [A,B]=0
    const CMatX<double> lhs = expm_skew(CMatX<double>(A + B));
    const CMatX<double> rhs = expm_skew(A) * expm_skew(B);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("su2_to_so3 closed forms") {
  const Vec3<double> z{0, 0, 1};
  CHECK((su2_to_so3(z, 0.0) - Mat3<double>::Identity()).cwiseAbs().maxCoeff() == 0.0);

  const double phi = 0.83;
  Mat3<double> expected;
  expected << std::cos(phi), -std::sin(phi), 0, std::sin(phi), std::cos(phi), 0, 0, 0, 1;
  CHECK((su2_to_so3(z, phi) - expected).cwiseAbs().maxCoeff() < 1e-15);

  CHECK_THROWS_AS(su2_to_so3<double>({0, 0, 0}, 1.0), ValidationError);
  CHECK_THROWS_AS(su2_to_so3<double>({0, 0, 2}, 1.0), ValidationError);
}

TEST_CASE("2pi rotation: identity in SO(3), minus identity in the spinor rep") {
  std::mt19937 rng(11);
  auto rep = make_spin_rep(0.5);
  for (int trial = 0; trial < 5; ++trial) {
    const Vec3<double> n = testing::random_unit_vector(rng);
    const Mat3<double> R = su2_to_so3(n, 2 * kPi);
    CHECK((R - Mat3<double>::Identity()).cwiseAbs().maxCoeff() < 1e-12);
    const CMatX<double> U = spin_rotation(rep, n, 2 * kPi);
    CHECK((U + CMatX<double>::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("adjoint consistency: U† J_i U = sum_j R_ij J_j") {
  std::mt19937 rng(42);
  std::uniform_real_distribution<double> angle(-kPi, kPi);
  for (double j : {0.5, 1.0, 1.5, 2.0}) {
    auto rep = make_spin_rep(j);
    const CMatX<double>* J[3] = {&rep.J1, &rep.J2, &rep.J3};
    for (int trial = 0; trial < 8; ++trial) {
      const Vec3<double> axis = testing::random_unit_vector(rng);
      const double a = angle(rng);
      const CMatX<double> U = spin_rotation(rep, axis, a);
      const Mat3<double> R = su2_to_so3(axis, a);
      for (int i = 0; i < 3; ++i) {
        CMatX<double> rhs = CMatX<double>::Zero(rep.dim, rep.dim);
        for (int jj = 0; jj < 3; ++jj) rhs += R(i, jj) * (*J[jj]);
        const CMatX<double> lhs = U.adjoint() * (*J[i]) * U;
        CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-10);
      }
    }
  }
}
