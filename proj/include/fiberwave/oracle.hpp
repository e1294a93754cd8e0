#pragma once

#include "fiberwave/evolution.hpp"
#include "fiberwave/guide_geometry.hpp"
#include "fiberwave/spin_algebra.hpp"

#include <complex>

namespace fiberwave {

/// Classical RK4 reference integrator for i ψ̇ = (ω·J) ψ, with per-step
/// renormalization. A deliberately independent code path from propagate():
/// direct H·ψ products, no matrix exponentials. Used for cross-checks only.
template <typename Scalar>
CMatX<Scalar> rk4_reference_states(const WaveVectorTrack<Scalar>& track,
                                   const SpinRepresentation<Scalar>& rep,
                                   const QuantumState<Scalar>& psi0) {
  using Cplx = std::complex<Scalar>;
  const Index n = track.samples();
  if (n < 2) throw ValidationError("rk4_reference_states: track needs >= 2 samples");
  if (psi0.size() != rep.dim)
    throw ValidationError("rk4_reference_states: state/rep dimension mismatch");
  const Scalar dt = track.dt();

  CMatX<Scalar> out(rep.dim, n);
  CVecX<Scalar> psi = psi0;
  out.col(0) = psi;
  for (Index i = 0; i + 1 < n; ++i) {
    const CMatX<Scalar> H0 = dot_j(rep, track.omega.col(i));
    const CMatX<Scalar> Hm = dot_j(rep, track.omega_mid.col(i));
    const CMatX<Scalar> H1 = dot_j(rep, track.omega.col(i + 1));
    const CVecX<Scalar> k1 = Cplx(0, -1) * (H0 * psi);
    const CVecX<Scalar> k2 = Cplx(0, -1) * (Hm * (psi + (dt / Scalar(2)) * k1));
    const CVecX<Scalar> k3 = Cplx(0, -1) * (Hm * (psi + (dt / Scalar(2)) * k2));
    const CVecX<Scalar> k4 = Cplx(0, -1) * (H1 * (psi + dt * k3));
    psi += (dt / Scalar(6)) * (k1 + Scalar(2) * k2 + Scalar(2) * k3 + k4);
    psi /= psi.norm();
    out.col(i + 1) = psi;
  }
  return out;
}

}  // namespace fiberwave
