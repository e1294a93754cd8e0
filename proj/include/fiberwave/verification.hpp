#pragma once

#include "fiberwave/analytic_solution.hpp"
#include "fiberwave/guide_geometry.hpp"
#include "fiberwave/spin_algebra.hpp"
#include "fiberwave/types.hpp"

#include <cmath>
#include <complex>
#include <string>

namespace fiberwave {

/// Coefficient matrix of the conjugation V†(t) p_i V(t) = Σ_j M_ij p_j for
/// any vector operator p, assembled from the trigonometric coefficient
/// expressions obtained by substituting β = −(θ/2)e^{−iφ} and p± = p1 ± ip2
/// (the θ in the denominator cancels, so the form is regular at θ = 0).
/// Orthogonal with det +1; equals the Rodrigues rotation about
/// (−sin φ, cos φ, 0) by θ.
template <typename Scalar>
Mat3<Scalar> conjugation_matrix(Scalar theta, Scalar phi) {
  const Scalar st = std::sin(theta), ct = std::cos(theta);
  const Scalar sp = std::sin(phi), cp = std::cos(phi);
  const Scalar v = Scalar(1) - ct;
  Mat3<Scalar> M;
  M << Scalar(1) - v * cp * cp, -v * sp * cp, st * cp,
       -v * sp * cp, Scalar(1) - v * sp * sp, st * sp,
       -st * cp, -st * sp, ct;
  return M;
}

/// Momentum eigenvalue vector of the transported state,
/// k sinθ (δ_1i cosφ + δ_2i sinφ) − k(1−cosθ) δ_3i + k_i(0), with the
/// initial momentum (0, 0, k). Equals the in-frame wave vector k(t).
template <typename Scalar>
Vec3<Scalar> momentum_eigenvalues(const WaveVectorTrack<Scalar>& track, Index node) {
  if (node < 0 || node >= track.samples())
    throw ValidationError("momentum_eigenvalues: node outside the grid");
  const Scalar k = track.k_mag;
  const Scalar th = track.theta(node), ph = track.phi(node);
  Vec3<Scalar> e;
  e(0) = k * std::sin(th) * std::cos(ph);
  e(1) = k * std::sin(th) * std::sin(ph);
  e(2) = -k * (Scalar(1) - std::cos(th)) + k;
  return e;
}

/// Helicity operator I = k̂·J; spectrum {j, ..., −j} for any unit k̂.
template <typename Scalar, typename Derived>
CMatX<Scalar> helicity(const SpinRepresentation<Scalar>& rep,
                       const Eigen::MatrixBase<Derived>& k_hat) {
  const Scalar nrm = Vec3<Scalar>(k_hat).norm();
  if (std::abs(nrm - Scalar(1)) > Scalar(1e-9))
    throw ValidationError("helicity: k_hat must be a unit vector, |k_hat| = " +
                          std::to_string(static_cast<double>(nrm)));
  return dot_j(rep, k_hat);
}

template <typename Scalar>
Scalar helicity_expectation(const SpinRepresentation<Scalar>& rep,
                            const Vec3<Scalar>& k_hat, const QuantumState<Scalar>& psi) {
  return psi.dot(helicity(rep, k_hat) * psi).real();
}

/// Populations |<V(θ,φ) e_m | ψ>|² in the instantaneous helicity eigenbasis,
/// indexed like the J3 basis (m = j .. −j). Stationary along the exact
/// evolution.
template <typename Scalar>
VecX<Scalar> helicity_populations(const SpinRepresentation<Scalar>& rep, Scalar theta,
                                  Scalar phi, const QuantumState<Scalar>& psi) {
  const CVecX<Scalar> proj = rotation_operator(theta, phi, rep).adjoint() * psi;
  return proj.cwiseAbs2();
}

/// Max-norm residual of the Liouville–von Neumann equation
/// ∂I/∂t − i[I, H] = 0 at the interior nodes, with ∂I/∂t by central
/// differences of I(t) = k̂(t)·J on the grid.
template <typename Scalar>
VecX<Scalar> lvn_residual_series(const WaveVectorTrack<Scalar>& track,
                                 const SpinRepresentation<Scalar>& rep) {
  using Cplx = std::complex<Scalar>;
  const Index n = track.samples();
  if (n < 3) throw ValidationError("lvn_residual_series: need at least 3 samples");
  const Scalar dt = track.dt();
  VecX<Scalar> r(n - 2);
  for (Index i = 1; i + 1 < n; ++i) {
    const CMatX<Scalar> dI =
        (dot_j(rep, track.k_hat(i + 1)) - dot_j(rep, track.k_hat(i - 1))) / (Scalar(2) * dt);
    const CMatX<Scalar> I = dot_j(rep, track.k_hat(i));
    const CMatX<Scalar> H = dot_j(rep, track.omega.col(i));
    const CMatX<Scalar> res = dI - Cplx(0, 1) * (I * H - H * I);
    r(i - 1) = res.cwiseAbs().maxCoeff();
  }
  return r;
}

template <typename Scalar>
Scalar lvn_residual(const WaveVectorTrack<Scalar>& track,
                    const SpinRepresentation<Scalar>& rep, Index interior_node) {
  if (interior_node < 1 || interior_node + 1 >= track.samples())
    throw ValidationError("lvn_residual: node must be interior");
  return lvn_residual_series(track, rep)(interior_node - 1);
}

}  // namespace fiberwave
