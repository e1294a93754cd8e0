#pragma once

#include "fiberwave/evolution.hpp"
#include "fiberwave/guide_geometry.hpp"
#include "fiberwave/spin_algebra.hpp"
#include "fiberwave/types.hpp"

#include <cmath>
#include <complex>
#include <string>

namespace fiberwave {

/// Accumulated phase m ∫ φ̇ (1 − cos θ) dt' of the |m> component.
template <typename Scalar>
struct PhaseSeries {
  VecX<Scalar> times;
  VecX<Scalar> phase;
  Scalar m{};
};

/// Cumulative ∫ φ̇ (1 − cos θ) dt on the track grid — the solid angle swept
/// by k̂ about ẑ, accumulated with sign. Trapezoidal rule; φ̇ from
/// second-order differences of the unwrapped azimuth. The integrand is
/// evaluated as φ̇ · 2 sin²(θ/2), which is exact and avoids cancellation
/// near θ ≈ 0.
template <typename Scalar>
VecX<Scalar> solid_angle_series(const WaveVectorTrack<Scalar>& track) {
  const Index n = track.samples();
  if (n < 3) throw ValidationError("solid_angle_series: need at least 3 samples");
  const Scalar dt = track.dt();
  VecX<Scalar> phidot(n);
  phidot(0) = (Scalar(-3) * track.phi(0) + Scalar(4) * track.phi(1) - track.phi(2)) /
              (Scalar(2) * dt);
  for (Index i = 1; i + 1 < n; ++i)
    phidot(i) = (track.phi(i + 1) - track.phi(i - 1)) / (Scalar(2) * dt);
  phidot(n - 1) = (Scalar(3) * track.phi(n - 1) - Scalar(4) * track.phi(n - 2) +
                   track.phi(n - 3)) / (Scalar(2) * dt);

  VecX<Scalar> integrand(n);
  for (Index i = 0; i < n; ++i) {
    const Scalar s_half = std::sin(track.theta(i) / Scalar(2));
    integrand(i) = phidot(i) * Scalar(2) * s_half * s_half;
  }
  VecX<Scalar> acc(n);
  acc(0) = Scalar(0);
  for (Index i = 1; i < n; ++i)
    acc(i) = acc(i - 1) + (integrand(i - 1) + integrand(i)) * dt / Scalar(2);
  return acc;
}

/// Geometric phase φ_m(t_node) = m ∫ φ̇ (1 − cos θ) dt'.
template <typename Scalar>
Scalar geometric_phase(const WaveVectorTrack<Scalar>& track, Scalar m, Index node) {
  if (!detail::is_half_integer(m))
    throw ValidationError("geometric_phase: m must be a half-integer");
  if (node < 0 || node >= track.samples())
    throw ValidationError("geometric_phase: node " + std::to_string(node) +
                          " outside the grid");
  return m * solid_angle_series(track)(node);
}

template <typename Scalar>
PhaseSeries<Scalar> phase_series(const WaveVectorTrack<Scalar>& track, Scalar m) {
  if (!detail::is_half_integer(m))
    throw ValidationError("phase_series: m must be a half-integer");
  PhaseSeries<Scalar> out;
  out.times = track.times;
  out.phase = m * solid_angle_series(track);
  out.m = m;
  return out;
}

/// V(θ, φ) = exp[β J+ − β* J−] with β = −(θ/2) e^{-iφ}. Rotates ẑ to
/// k̂(θ, φ): equivalently exp[−iθ n̂·J] for n̂ = (−sin φ, cos φ, 0), and
/// V|m> is the k̂·J eigenvector with eigenvalue m.
template <typename Scalar>
CMatX<Scalar> rotation_operator(Scalar theta, Scalar phi,
                                const SpinRepresentation<Scalar>& rep) {
  using Cplx = std::complex<Scalar>;
  const Cplx beta = -(theta / Scalar(2)) * std::exp(Cplx(0, -phi));
  const CMatX<Scalar> gen = beta * rep.Jplus - std::conj(beta) * rep.Jminus;
  return expm_skew(gen);
}

/// State amplitudes at grid node `node` for an initial J3-basis coefficient
/// vector c: Σ_m c_m e^{−i φ_m(t)} V(t)|m>. For a single |m> start this is
/// the closed-form solution e^{−i φ_m(t)} V(θ(t), φ(t)) |m>.
template <typename Scalar>
CMatX<Scalar> analytic_states(const WaveVectorTrack<Scalar>& track,
                              const SpinRepresentation<Scalar>& rep,
                              const CVecX<Scalar>& coeffs) {
  using Cplx = std::complex<Scalar>;
  if (coeffs.size() != rep.dim)
    throw ValidationError("analytic_states: coefficient vector does not match rep dim");
  const Index n = track.samples();
  const VecX<Scalar> solid = solid_angle_series(track);
  CMatX<Scalar> out(rep.dim, n);
  CVecX<Scalar> phased(rep.dim);
  for (Index t = 0; t < n; ++t) {
    for (Index i = 0; i < rep.dim; ++i)
      phased(i) = coeffs(i) * std::exp(Cplx(0, -rep.m_of(i) * solid(t)));
    out.col(t) = rotation_operator(track.theta(t), track.phi(t), rep) * phased;
  }
  return out;
}

template <typename Scalar>
QuantumState<Scalar> analytic_state(const WaveVectorTrack<Scalar>& track,
                                    const SpinRepresentation<Scalar>& rep, Scalar m,
                                    Index node) {
  using Cplx = std::complex<Scalar>;
  if (node < 0 || node >= track.samples())
    throw ValidationError("analytic_state: node outside the grid");
  const Scalar phase = geometric_phase(track, m, node);
  return std::exp(Cplx(0, -phase)) *
         (rotation_operator(track.theta(node), track.phi(node), rep) *
          basis_state(rep, m));
}

/// |<a_n|b_n>| per node for two state histories on the same grid.
template <typename Scalar>
VecX<Scalar> fidelity_series(const CMatX<Scalar>& a, const CMatX<Scalar>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ValidationError("fidelity_series: mismatched state histories");
  VecX<Scalar> f(a.cols());
  for (Index i = 0; i < a.cols(); ++i) f(i) = std::abs(a.col(i).dot(b.col(i)));
  return f;
}

}  // namespace fiberwave
