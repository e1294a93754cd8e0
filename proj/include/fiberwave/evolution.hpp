#pragma once

#include "fiberwave/guide_geometry.hpp"
#include "fiberwave/spin_algebra.hpp"
#include "fiberwave/types.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <string>

namespace fiberwave {

/// Unit-norm amplitude vector over the J3 eigenbasis (m = j .. -j).
template <typename Scalar>
using QuantumState = CVecX<Scalar>;

/// |m> as a coordinate basis state of the representation.
template <typename Scalar>
QuantumState<Scalar> basis_state(const SpinRepresentation<Scalar>& rep, Scalar m) {
  if (!valid_m(rep.j, m))
    throw ValidationError("basis_state: m = " + std::to_string(static_cast<double>(m)) +
                          " is not a magnetic quantum number of spin j = " +
                          std::to_string(static_cast<double>(rep.j)));
  QuantumState<Scalar> psi = QuantumState<Scalar>::Zero(rep.dim);
  psi(rep.index_of(m)) = std::complex<Scalar>(1, 0);
  return psi;
}

/// H(t) = ω·J, the coupling of the wave-vector rotation rate to the total
/// angular momentum. Hermitian for real ω.
template <typename Scalar, typename Derived>
CMatX<Scalar> hamiltonian_at(const Eigen::MatrixBase<Derived>& omega,
                             const SpinRepresentation<Scalar>& rep) {
  return dot_j(rep, omega);
}

template <typename Scalar>
struct EvolutionReport {
  VecX<Scalar> times;
  CMatX<Scalar> states;  // dim x (N+1), column n is ψ(t_n)
  VecX<Scalar> norms;
  VecX<Scalar> helicity_expect;  // <ψ| k̂·J |ψ>
  VecX<Scalar> energy_expect;    // <ψ| H |ψ>
  VecX<Scalar> fidelity;              // optional, grid length when present
  VecX<Scalar> schrodinger_residual;  // optional, NaN at the end nodes
  VecX<Scalar> lvn_residual;          // optional, NaN at the end nodes
};

/// Integrates i ψ̇ = (ω·J) ψ by composing the per-interval rotation steps
/// exp[-i Δt ω(t_{n+1/2})·J], with ω taken from the track's midpoint
/// samples. Unitary by construction; global error O(Δt²).
template <typename Scalar>
EvolutionReport<Scalar> propagate(const WaveVectorTrack<Scalar>& track,
                                  const SpinRepresentation<Scalar>& rep,
                                  const QuantumState<Scalar>& psi0) {
  using Cplx = std::complex<Scalar>;
  const Index n = track.samples();
  if (n < 2) throw ValidationError("propagate: track needs at least 2 samples");
  if (track.omega_mid.cols() != n - 1)
    throw ValidationError("propagate: track has no midpoint rotation-rate samples");
  if (psi0.size() != rep.dim)
    throw ValidationError("propagate: state dimension " + std::to_string(psi0.size()) +
                          " does not match representation dim " + std::to_string(rep.dim));
  if (std::abs(psi0.norm() - Scalar(1)) > Scalar(1e-10))
    throw ValidationError("propagate: initial state is not unit norm");

  const Scalar dt = track.dt();
  EvolutionReport<Scalar> rep_out;
  rep_out.times = track.times;
  rep_out.states.resize(rep.dim, n);
  rep_out.norms.resize(n);
  rep_out.helicity_expect.resize(n);
  rep_out.energy_expect.resize(n);

  QuantumState<Scalar> psi = psi0;
  for (Index i = 0; i < n; ++i) {
    if (i > 0) {
      const CMatX<Scalar> step =
          expm_skew(CMatX<Scalar>(Cplx(0, -dt) * dot_j(rep, track.omega_mid.col(i - 1))));
      psi = step * psi;
    }
    rep_out.states.col(i) = psi;
    rep_out.norms(i) = psi.norm();
    const CMatX<Scalar> H = dot_j(rep, track.omega.col(i));
    rep_out.energy_expect(i) = psi.dot(H * psi).real();
    rep_out.helicity_expect(i) = psi.dot(dot_j(rep, track.k_hat(i)) * psi).real();
  }
  return rep_out;
}

/// Discrete residual of the time-dependent Schrödinger equation,
/// ‖ i (ψ_{n+1} − ψ_{n−1})/(2Δt) − H(t_n) ψ_n ‖, at the interior nodes.
/// Applies to any state history on the track grid (numeric or analytic).
template <typename Scalar>
VecX<Scalar> schrodinger_residual(const CMatX<Scalar>& states,
                                  const WaveVectorTrack<Scalar>& track,
                                  const SpinRepresentation<Scalar>& rep) {
  using Cplx = std::complex<Scalar>;
  const Index n = track.samples();
  if (states.cols() != n)
    throw ValidationError("schrodinger_residual: state history does not match track grid");
  if (n < 3) throw ValidationError("schrodinger_residual: need at least 3 samples");
  const Scalar dt = track.dt();
  VecX<Scalar> r(n - 2);
  for (Index i = 1; i + 1 < n; ++i) {
    const CVecX<Scalar> dpsi =
        Cplx(0, 1) * (states.col(i + 1) - states.col(i - 1)) / (Scalar(2) * dt);
    r(i - 1) = (dpsi - dot_j(rep, track.omega.col(i)) * states.col(i)).norm();
  }
  return r;
}

}  // namespace fiberwave
