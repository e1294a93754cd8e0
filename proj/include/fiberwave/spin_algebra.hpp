#pragma once

#include "fiberwave/types.hpp"

#include <cmath>
#include <complex>
#include <numbers>

namespace fiberwave {

/// Matrices of the spin-j angular momentum algebra in the |j,m> basis,
/// ordered m = j, j-1, ..., -j, so J3 is diagonal with descending entries
/// and |m> is a unit coordinate vector. Units are hbar = 1 throughout.
///
/// Immutable after construction; safe to share across threads.
template <typename Scalar>
struct SpinRepresentation {
  Scalar j{};
  Index dim{};
  CMatX<Scalar> J1, J2, J3, Jplus, Jminus;

  /// Magnetic quantum number of basis index i (i = 0 is m = j).
  Scalar m_of(Index i) const { return j - static_cast<Scalar>(i); }

  /// Basis index of magnetic quantum number m (m = j maps to 0).
  Index index_of(Scalar m) const {
    return static_cast<Index>(std::llround(static_cast<double>(j - m)));
  }
};

namespace detail {

template <typename Scalar>
bool is_half_integer(Scalar x, Scalar tol = Scalar(1e-9)) {
  const Scalar two_x = Scalar(2) * x;
  return std::abs(two_x - std::round(two_x)) <= tol;
}

}  // namespace detail

/// Whether m is a valid magnetic quantum number for spin j (m in {j, ..., -j}).
template <typename Scalar>
bool valid_m(Scalar j, Scalar m) {
  if (!detail::is_half_integer(m)) return false;
  const Scalar steps = j - m;
  return std::abs(steps - std::round(steps)) <= Scalar(1e-9) &&
         m >= -j - Scalar(1e-9) && m <= j + Scalar(1e-9);
}

/// Builds the (2j+1)-dimensional representation from the ladder-operator
/// matrix elements <m+1|J+|m> = sqrt(j(j+1) - m(m+1)). The result satisfies
/// [J_i, J_j] = i eps_ijk J_k and J² = j(j+1)·I to rounding.
template <typename Scalar = double>
SpinRepresentation<Scalar> make_spin_rep(Scalar j) {
  using Cplx = std::complex<Scalar>;
  if (!(j > Scalar(0)))
    throw ValidationError("spin j must be positive, got " + std::to_string(static_cast<double>(j)));
  if (!detail::is_half_integer(j))
    throw ValidationError("spin j must be a half-integer (2j integral), got " +
                          std::to_string(static_cast<double>(j)));
  const Index dim = static_cast<Index>(std::llround(static_cast<double>(2 * j))) + 1;
  if (dim > 64)
    throw ValidationError("spin j gives dim = " + std::to_string(dim) +
                          " > 64; representations that large are unsupported");

  SpinRepresentation<Scalar> rep;
  rep.j = j;
  rep.dim = dim;
  rep.J3 = CMatX<Scalar>::Zero(dim, dim);
  rep.Jplus = CMatX<Scalar>::Zero(dim, dim);
  for (Index i = 0; i < dim; ++i) rep.J3(i, i) = Cplx(rep.m_of(i), 0);
  for (Index i = 1; i < dim; ++i) {
    const Scalar m = rep.m_of(i);  // raising |m> lands on row i-1
    rep.Jplus(i - 1, i) = Cplx(std::sqrt(j * (j + 1) - m * (m + 1)), 0);
  }
  rep.Jminus = rep.Jplus.adjoint();
  rep.J1 = (rep.Jplus + rep.Jminus) / Scalar(2);
  rep.J2 = (rep.Jplus - rep.Jminus) / Cplx(0, 2);
  return rep;
}

/// v·J = v1 J1 + v2 J2 + v3 J3 for a real 3-vector v. Hermitian.
template <typename Scalar, typename Derived>
CMatX<Scalar> dot_j(const SpinRepresentation<Scalar>& rep,
                    const Eigen::MatrixBase<Derived>& v) {
  return v(0) * rep.J1 + v(1) * rep.J2 + v(2) * rep.J3;
}

/// Max-norm of U·U† − I; zero for a unitary matrix.
template <typename Derived>
typename Derived::RealScalar unitarity_defect(const Eigen::MatrixBase<Derived>& U) {
  using Cplx = typename Derived::Scalar;
  Eigen::Matrix<Cplx, Eigen::Dynamic, Eigen::Dynamic> G = U * U.adjoint();
  G -= Eigen::Matrix<Cplx, Eigen::Dynamic, Eigen::Dynamic>::Identity(U.rows(), U.rows());
  return G.cwiseAbs().maxCoeff();
}

/// Unitary exponential exp(A) of a skew-Hermitian A, computed from the
/// eigendecomposition of the Hermitian matrix iA and reassembled as
/// W·exp(-i diag(λ))·W†. Exactly unitary up to rounding for the dims used
/// here. Rejects non-square or non-skew-Hermitian input (tolerance
/// configurable; relative to the largest entry).
template <typename Derived>
CMatX<typename Derived::RealScalar> expm_skew(
    const Eigen::MatrixBase<Derived>& A,
    typename Derived::RealScalar skew_tol = typename Derived::RealScalar(1e-12)) {
  using Real = typename Derived::RealScalar;
  using Cplx = std::complex<Real>;
  if (A.rows() != A.cols())
    throw ValidationError("expm_skew: matrix must be square, got " +
                          std::to_string(A.rows()) + "x" + std::to_string(A.cols()));
  const CMatX<Real> Ad = A.template cast<Cplx>();
  const Real scale = std::max(Real(1), Ad.cwiseAbs().maxCoeff());
  const Real skewness = (Ad + Ad.adjoint()).cwiseAbs().maxCoeff();
  if (skewness > skew_tol * scale)
    throw ValidationError("expm_skew: input is not skew-Hermitian (defect " +
                          std::to_string(static_cast<double>(skewness)) + ")");

  const CMatX<Real> H = Cplx(0, 1) * Ad;  // Hermitian
  Eigen::SelfAdjointEigenSolver<CMatX<Real>> es(H);
  CVecX<Real> phases(es.eigenvalues().size());
  for (Index i = 0; i < phases.size(); ++i)
    phases(i) = std::exp(Cplx(0, -es.eigenvalues()(i)));
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

/// Rodrigues rotation matrix R = I + sinα [n]× + (1−cosα) [n]ײ about the
/// unit axis n. Bridges the spin-space rotations to vector-level checks:
/// with U = expm_skew(-i α n·J), U† J_i U = Σ_j R_ij J_j.
template <typename Scalar>
Mat3<Scalar> su2_to_so3(const Vec3<Scalar>& axis, Scalar angle) {
  const Scalar nrm = axis.norm();
  if (nrm < Scalar(1e-12))
    throw ValidationError("su2_to_so3: axis must be a unit vector, got zero");
  if (std::abs(nrm - Scalar(1)) > Scalar(1e-12))
    throw ValidationError("su2_to_so3: axis must be a unit vector, |axis| = " +
                          std::to_string(static_cast<double>(nrm)));
  Mat3<Scalar> K;
  K << Scalar(0), -axis(2), axis(1),
       axis(2), Scalar(0), -axis(0),
       -axis(1), axis(0), Scalar(0);
  return Mat3<Scalar>::Identity() + std::sin(angle) * K +
         (Scalar(1) - std::cos(angle)) * (K * K);
}

/// exp(-i angle n·J) — the spin-space image of the rotation su2_to_so3(n, angle).
template <typename Scalar>
CMatX<Scalar> spin_rotation(const SpinRepresentation<Scalar>& rep,
                            const Vec3<Scalar>& axis, Scalar angle) {
  const CMatX<Scalar> gen = std::complex<Scalar>(0, -angle) * dot_j(rep, axis);
  return expm_skew(gen);
}

}  // namespace fiberwave
