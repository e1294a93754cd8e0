#include "fiberwave/verification.hpp"

#include "fiberwave/oracle.hpp"

#include "doctest.h"
#include "test_helpers.hpp"

#include <complex>
#include <numbers>
#include <vector>

using namespace fiberwave;
using Cplx = std::complex<double>;
constexpr double kPi = std::numbers::pi;

TEST_CASE("conjugation matrix: identity at theta = 0") {
  for (double phi : {-2.0, 0.0, 1.3})
    CHECK((conjugation_matrix(0.0, phi) - Mat3<double>::Identity()).cwiseAbs().maxCoeff() ==
          0.0);
}

TEST_CASE("conjugation matrix equals the Rodrigues rotation on a 100-point grid") {
  for (int a = 0; a < 10; ++a) {
    for (int b = 0; b < 10; ++b) {
      const double theta = kPi * double(a) / 9.0;
      const double phi = -kPi + 2 * kPi * double(b) / 9.0;
      const Mat3<double> M = conjugation_matrix(theta, phi);
      const Mat3<double> R = su2_to_so3<double>({-std::sin(phi), std::cos(phi), 0}, theta);
      CHECK((M - R).cwiseAbs().maxCoeff() < 1e-12);
      CHECK((M * M.transpose() - Mat3<double>::Identity()).cwiseAbs().maxCoeff() < 1e-10);
      CHECK(M.determinant() == doctest::Approx(1.0).epsilon(1e-10));
    }
  }
}

TEST_CASE("conjugation acts on J as on any vector operator") {
  std::mt19937 rng(21);
  std::uniform_real_distribution<double> thd(0.0, kPi), phd(-kPi, kPi);
  for (double j : {0.5, 1.0, 1.5}) {
    auto rep = make_spin_rep(j);
    const CMatX<double>* J[3] = {&rep.J1, &rep.J2, &rep.J3};
    for (int trial = 0; trial < 10; ++trial) {
      const double th = thd(rng), ph = phd(rng);
      const CMatX<double> V = rotation_operator(th, ph, rep);
      const Mat3<double> M = conjugation_matrix(th, ph);
      for (int i = 0; i < 3; ++i) {
        CMatX<double> rhs = CMatX<double>::Zero(rep.dim, rep.dim);
        for (int c = 0; c < 3; ++c) rhs += M(i, c) * (*J[c]);
        CHECK((V.adjoint() * (*J[i]) * V - rhs).cwiseAbs().maxCoeff() < 1e-10);
      }
    }
  }
}

TEST_CASE("momentum eigenvalues reproduce the wave vector") {
  SUBCASE("initial node gives (0, 0, k)") {
    StraightPath<double> path({0, 1, 0}, 1.0);
    auto track = sample_track<double>(path, 2.0, 1.0, 16);
    CHECK((momentum_eigenvalues(track, 0) - Vec3<double>{0, 0, 2.0}).norm() < 1e-12);
  }
  SUBCASE("quarter great-circle gives (k, 0, 0)") {
    // meridian track: theta = Om t with phi = 0 in the working frame
    const Index n = 101;
    VecX<double> times = VecX<double>::LinSpaced(n, 0.0, 1.0);
    Mat3X<double> k(3, n);
    const double k_mag = 1.4;
    for (Index i = 0; i < n; ++i)
      k.col(i) = k_mag * Vec3<double>{std::sin(kPi / 2 * times(i)), 0,
                                      std::cos(kPi / 2 * times(i))};
    auto track = track_from_samples<double>(times, k, {FrameConvention::lab});
    const Vec3<double> e = momentum_eigenvalues(track, n - 1);
    CHECK((e - Vec3<double>{k_mag, 0, 0}).norm() < 1e-9 * k_mag);
  }
  SUBCASE("matches k(t) on every node of built-in kinds, in both frames") {
    CircularArcPath<double> circle(1.0, 1.0, 2 * kPi);
    auto helix = HelixPath<double>::with_cone_angle(1.0, kPi / 3, 1.0, 1.0);
    ArchimedeanSpiralPath<double> spiral(0.2, 1.0, 1.25, 1.0);
    struct Case {
      const GuidePath<double>* path;
      FrameConvention frame;
      double t_end;
    };
    std::vector<Case> cases = {{&circle, FrameConvention::lab, 1.0},
                               {&helix, FrameConvention::lab, helix.length()},
                               {&helix, FrameConvention::working, helix.length()},
                               {&spiral, FrameConvention::lab, spiral.length()}};
    for (const auto& c : cases) {
      auto track = sample_track<double>(*c.path, 1.3, c.t_end, 700, {c.frame});
      for (Index i = 0; i < track.samples(); ++i)
        CHECK((momentum_eigenvalues(track, i) - Vec3<double>(track.k.col(i))).norm() <
              1e-9 * track.k_mag);
    }
  }
}

TEST_CASE("helicity operator: J3 along z-hat, spectrum {j..-j} anywhere") {
  auto rep = make_spin_rep(1.5);
  CHECK((helicity(rep, Vec3<double>{0, 0, 1}) - rep.J3).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(helicity(rep, Vec3<double>{0.5, 0, 0}), ValidationError);

  std::mt19937 rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    const Vec3<double> k_hat = testing::random_unit_vector(rng);
    Eigen::SelfAdjointEigenSolver<CMatX<double>> es(helicity(rep, k_hat));
    for (Index i = 0; i < rep.dim; ++i)
      CHECK(std::abs(es.eigenvalues()(i) - (-rep.j + double(i))) < 1e-10);
  }
}

TEST_CASE("helicity expectation stays at m along the numeric evolution") {
  auto rep = make_spin_rep(1.0);
  auto helix = HelixPath<double>::with_cone_angle(1.0, kPi / 3, 1.0, 1.0);
  auto track = sample_track<double>(helix, 1.0, helix.length(), 10000,
                                    {FrameConvention::lab});
  QuantumState<double> psi0 =
      rotation_operator(track.theta(0), track.phi(0), rep) * basis_state(rep, 1.0);
  auto report = propagate(track, rep, psi0);
  CHECK((report.helicity_expect.array() - 1.0).abs().maxCoeff() < 1e-8);

  // full distribution over helicity eigenstates is stationary
  for (Index node : {0L, 3000L, 10000L}) {
    const VecX<double> pops =
        helicity_populations(rep, track.theta(node), track.phi(node),
                             QuantumState<double>(report.states.col(node)));
    CHECK(std::abs(pops(rep.index_of(1.0)) - 1.0) < 1e-8);
    CHECK(pops(rep.index_of(0.0)) < 1e-8);
    CHECK(pops(rep.index_of(-1.0)) < 1e-8);
  }
}

TEST_CASE("helicity eigenvalue equation holds for the analytic state") {
  auto rep = make_spin_rep(1.5);
  auto helix = HelixPath<double>::with_cone_angle(1.0, 0.9, 1.0, 1.0);
  auto track = sample_track<double>(helix, 1.0, helix.length(), 300,
                                    {FrameConvention::working});
  const double m = -0.5;
  auto states = analytic_states(track, rep, basis_state(rep, m));
  for (Index i = 0; i < track.samples(); ++i) {
    const CMatX<double> I = dot_j(rep, track.k_hat(i));
    CHECK((I * states.col(i) - m * states.col(i)).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("Liouville-von Neumann residual") {
  auto rep = make_spin_rep(1.0);
  SUBCASE("vanishes identically on a straight guide") {
    StraightPath<double> path({0, 0, 1}, 1.0);
    auto track = sample_track<double>(path, 1.0, 1.0, 32);
    CHECK(lvn_residual_series(track, rep).maxCoeff() < 1e-12);
  }
  SUBCASE("slow constant-rate rotation in the plane stays below 1e-10") {
    CircularArcPath<double> circle(1.0, 1.0, 0.1);  // Omega = 0.1
    auto track = sample_track<double>(circle, 1.0, 1.0, 10000, {FrameConvention::lab});
    CHECK(lvn_residual_series(track, rep).maxCoeff() < 1e-10);
  }
  SUBCASE("second-order decay on the cone track") {
    auto helix = HelixPath<double>::with_cone_angle(1.0, kPi / 3, 1.0, 1.0);
    std::vector<double> dt, resid;
    for (long steps : {250L, 500L, 1000L, 2000L}) {
      auto track = sample_track<double>(helix, 1.0, helix.length(), steps,
                                        {FrameConvention::lab});
      dt.push_back(track.dt());
      resid.push_back(lvn_residual_series(track, rep).maxCoeff());
    }
    const double slope = testing::loglog_slope(dt, resid);
    CHECK(slope > 1.8);
    CHECK(slope < 2.2);
    CHECK_THROWS_AS(lvn_residual(sample_track<double>(helix, 1.0, helix.length(), 16,
                                                      {FrameConvention::lab}),
                                 rep, 0),
                    ValidationError);
  }
}
