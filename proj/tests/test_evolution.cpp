#include "fiberwave/evolution.hpp"

#include "fiberwave/analytic_solution.hpp"
#include "fiberwave/oracle.hpp"

#include "doctest.h"
#include "test_helpers.hpp"

#include <complex>
#include <numbers>
#include <vector>

using namespace fiberwave;
using Cplx = std::complex<double>;
constexpr double kPi = std::numbers::pi;

namespace {

WaveVectorTrack<double> cone_track(double theta0, long steps, double turns = 1.0) {
  auto helix = HelixPath<double>::with_cone_angle(1.0, theta0, turns, 1.0);
  return sample_track<double>(helix, 1.0, helix.length(), steps, {FrameConvention::lab});
}

WaveVectorTrack<double> equator_track(double rate, double t_end, long steps) {
  CircularArcPath<double> circle(1.0, rate * t_end / (2 * kPi) + 1.0, rate);
  return sample_track<double>(circle, 1.0, t_end, steps, {FrameConvention::lab});
}

}  // namespace

TEST_CASE("hamiltonian_at assembles omega . J") {
  auto rep = make_spin_rep(1.0);
  CHECK(hamiltonian_at(Vec3<double>{0, 0, 0}, rep).cwiseAbs().maxCoeff() == 0.0);
  const double Om = 0.6;
  CHECK((hamiltonian_at(Vec3<double>{0, 0, Om}, rep) - Om * rep.J3).cwiseAbs().maxCoeff() ==
        0.0);
  const Vec3<double> w{0.1, -0.2, 0.3};
  const CMatX<double> H = hamiltonian_at(w, rep);
  CHECK((H - H.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("dynamical phase vanishes on the analytic state") {
  auto rep = make_spin_rep(1.5);
  auto track = cone_track(kPi / 4, 300);
  auto states = analytic_states(track, rep, basis_state(rep, 0.5));
  for (Index i = 0; i < track.samples(); i += 13) {
    const CVecX<double> psi = states.col(i);
    const double e = psi.dot(hamiltonian_at(track.omega.col(i), rep) * psi).real();
    CHECK(std::abs(e) < 1e-9);
  }
}

TEST_CASE("straight guide leaves the state untouched") {
  auto rep = make_spin_rep(0.5);
  StraightPath<double> path({0, 0, 1}, 1.0);
  auto track = sample_track<double>(path, 1.0, 1.0, 64);
  QuantumState<double> psi0(2);
  psi0 << Cplx(0.6, 0), Cplx(0, 0.8);
  auto report = propagate(track, rep, psi0);
  for (Index i = 0; i < track.samples(); ++i)
    CHECK((report.states.col(i) - psi0).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("constant omega about z gives the diagonal phases e^{-i m Om t}") {
  auto rep = make_spin_rep(1.0);
  const double Om = 0.9;
  auto track = equator_track(Om, 2.0, 500);  // omega = Om * z-hat, constant
  for (double m : {1.0, 0.0, -1.0}) {
    auto report = propagate(track, rep, basis_state(rep, m));
    for (Index i = 0; i < track.samples(); i += 50) {
      const Cplx expected = std::exp(Cplx(0, -m * Om * track.times(i)));
      CHECK(std::abs(report.states(rep.index_of(m), i) - expected) < 1e-10);
    }
  }
}

TEST_CASE("propagate conserves the norm to rounding") {
  auto rep = make_spin_rep(2.0);
  auto track = cone_track(kPi / 3, 2000);
  QuantumState<double> psi0 =
      rotation_operator(track.theta(0), track.phi(0), rep) * basis_state(rep, 2.0);
  auto report = propagate(track, rep, psi0);
  CHECK((report.norms.array() - 1.0).abs().maxCoeff() < 1e-12);
}

TEST_CASE("cone track: numeric evolution meets the analytic solution") {
  auto rep = make_spin_rep(1.0);
  auto track = cone_track(kPi / 3, 10000);
  QuantumState<double> psi0 =
      rotation_operator(track.theta(0), track.phi(0), rep) * basis_state(rep, 1.0);
  auto report = propagate(track, rep, psi0);
  auto ana = analytic_states(track, rep, basis_state(rep, 1.0));
  CHECK(fidelity_series(ana, report.states).minCoeff() >= 1.0 - 1e-8);
}

TEST_CASE("state defect converges at second order") {
  auto rep = make_spin_rep(1.0);
  std::vector<double> dt, defect;
  for (long steps : {250L, 500L, 1000L, 2000L}) {
    auto track = cone_track(kPi / 3, steps);
    QuantumState<double> psi0 =
        rotation_operator(track.theta(0), track.phi(0), rep) * basis_state(rep, 1.0);
    auto report = propagate(track, rep, psi0);
    auto ana = analytic_states(track, rep, basis_state(rep, 1.0));
    dt.push_back(track.dt());
    defect.push_back((ana.col(steps) - report.states.col(steps)).norm());
  }
  const double slope = testing::loglog_slope(dt, defect);
  CHECK(slope > 1.8);
  CHECK(slope < 2.2);
}

TEST_CASE("zero dynamical phase along numeric helicity-eigenstate evolution") {
  auto rep = make_spin_rep(2.0);
  auto track = cone_track(kPi / 3, 10000);
  QuantumState<double> psi0 =
      rotation_operator(track.theta(0), track.phi(0), rep) * basis_state(rep, 2.0);
  auto report = propagate(track, rep, psi0);
  double omega_max = 0;
  for (Index i = 0; i < track.samples(); ++i)
    omega_max = std::max(omega_max, track.omega.col(i).norm());
  CHECK(report.energy_expect.cwiseAbs().maxCoeff() < 1e-6 * omega_max);
}

TEST_CASE("schrodinger residual: zero on straight guides, O(dt^2) elsewhere") {
  auto rep = make_spin_rep(0.5);
  SUBCASE("straight") {
    StraightPath<double> path({0, 0, 1}, 1.0);
    auto track = sample_track<double>(path, 1.0, 1.0, 32);
    auto report = propagate(track, rep, basis_state(rep, 0.5));
    CHECK(schrodinger_residual(report.states, track, rep).maxCoeff() < 1e-12);
  }
  SUBCASE("constant omega decays with slope -2") {
    std::vector<double> dt, resid;
    for (long steps : {200L, 400L, 800L, 1600L}) {
      auto track = equator_track(0.8, 1.0, steps);
      auto report = propagate(track, rep, basis_state(rep, 0.5));
      dt.push_back(track.dt());
      resid.push_back(schrodinger_residual(report.states, track, rep).maxCoeff());
    }
    const double slope = testing::loglog_slope(dt, resid);
    CHECK(slope > 1.8);
    CHECK(slope < 2.2);
  }
  SUBCASE("cone residual drops by at least 3.6x per step doubling") {
    auto rep1 = make_spin_rep(1.0);
    double previous = -1;
    for (long steps : {500L, 1000L, 2000L}) {
      auto track = cone_track(kPi / 3, steps);
      QuantumState<double> psi0 =
          rotation_operator(track.theta(0), track.phi(0), rep1) * basis_state(rep1, 1.0);
      auto report = propagate(track, rep1, psi0);
      const double r = schrodinger_residual(report.states, track, rep1).maxCoeff();
      if (previous > 0) CHECK(previous / r >= 3.6);
      previous = r;
    }
  }
}

TEST_CASE("independent RK4 oracle agrees with the midpoint propagator") {
  auto rep = make_spin_rep(1.0);
  auto track = cone_track(kPi / 3, 10000);
  QuantumState<double> psi0 =
      rotation_operator(track.theta(0), track.phi(0), rep) * basis_state(rep, 1.0);
  auto report = propagate(track, rep, psi0);
  auto oracle = rk4_reference_states(track, rep, psi0);
  double worst = 0;
  for (Index i = 0; i < track.samples(); ++i)
    worst = std::max(worst, (oracle.col(i) - report.states.col(i)).norm());
  CHECK(worst < 1e-7);
}

TEST_CASE("propagate validates its inputs") {
  auto rep = make_spin_rep(0.5);
  auto track = cone_track(kPi / 3, 16);
  QuantumState<double> wrong_dim = QuantumState<double>::Zero(3);
  wrong_dim(0) = 1.0;
  CHECK_THROWS_AS(propagate(track, rep, wrong_dim), ValidationError);
  QuantumState<double> not_normalized(2);
  not_normalized << Cplx(0.9, 0), Cplx(0, 0);
  CHECK_THROWS_AS(propagate(track, rep, not_normalized), ValidationError);
  CHECK_THROWS_AS(basis_state(rep, 0.3), ValidationError);
  CHECK_THROWS_AS(basis_state(rep, 1.5), ValidationError);
}
