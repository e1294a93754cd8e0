#pragma once

#include "fiberwave/spin_algebra.hpp"
#include "fiberwave/types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

namespace fiberwave {

/// Local geometry of a guide at one arc-length station.
template <typename Scalar>
struct PathSample {
  Vec3<Scalar> position;
  Vec3<Scalar> unit_tangent;
  Vec3<Scalar> tangent_derivative;  // d(unit tangent)/ds; valid when analytic
};

/// A guide curve traversed at constant speed, exposed through arc length s.
/// The perfect-guide model needs only the unit tangent (the wave vector
/// direction) and, where a closed form exists, its arc-length derivative.
template <typename Scalar>
class GuidePath {
 public:
  virtual ~GuidePath() = default;
  virtual std::string kind() const = 0;
  /// Arc length traversed per unit time (constant along the path).
  virtual Scalar speed() const = 0;
  /// Total arc length; +infinity for unbounded paths.
  virtual Scalar length() const = 0;
  virtual Vec3<Scalar> position(Scalar s) const = 0;
  virtual Vec3<Scalar> unit_tangent(Scalar s) const = 0;
  /// d(unit tangent)/ds. Only meaningful when has_analytic_derivative().
  virtual Vec3<Scalar> tangent_derivative(Scalar s) const = 0;
  virtual bool has_analytic_derivative() const { return true; }
  /// One-stop evaluation; kinds with an expensive parameter lookup override
  /// this to do the inversion once.
  virtual PathSample<Scalar> sample(Scalar s) const {
    return {position(s), unit_tangent(s), tangent_derivative(s)};
  }
};

template <typename Scalar>
class StraightPath final : public GuidePath<Scalar> {
 public:
  StraightPath(Vec3<Scalar> direction, Scalar speed,
               Scalar length = std::numeric_limits<Scalar>::infinity())
      : speed_(speed), length_(length) {
    const Scalar nrm = direction.norm();
    if (nrm < Scalar(1e-12)) throw ValidationError("straight path: direction must be nonzero");
    if (!(speed > Scalar(0))) throw ValidationError("straight path: speed must be positive");
    if (!(length > Scalar(0))) throw ValidationError("straight path: length must be positive");
    dir_ = direction / nrm;
  }
  std::string kind() const override { return "straight"; }
  Scalar speed() const override { return speed_; }
  Scalar length() const override { return length_; }
  Vec3<Scalar> position(Scalar s) const override { return s * dir_; }
  Vec3<Scalar> unit_tangent(Scalar) const override { return dir_; }
  Vec3<Scalar> tangent_derivative(Scalar) const override { return Vec3<Scalar>::Zero(); }

 private:
  Vec3<Scalar> dir_;
  Scalar speed_, length_;
};

/// Planar arc of a circle in the z = 0 plane, starting at (R, 0, 0) with
/// tangent +ŷ; `turns` may be fractional.
template <typename Scalar>
class CircularArcPath final : public GuidePath<Scalar> {
 public:
  CircularArcPath(Scalar radius, Scalar turns, Scalar speed)
      : radius_(radius), turns_(turns), speed_(speed) {
    if (!(radius > Scalar(0))) throw ValidationError("circular arc: radius must be positive");
    if (!(turns > Scalar(0))) throw ValidationError("circular arc: turns must be positive");
    if (!(speed > Scalar(0))) throw ValidationError("circular arc: speed must be positive");
  }
  std::string kind() const override { return "circular_arc"; }
  Scalar speed() const override { return speed_; }
  Scalar length() const override {
    return radius_ * turns_ * Scalar(2) * std::numbers::pi_v<Scalar>;
  }
  Vec3<Scalar> position(Scalar s) const override {
    const Scalar a = s / radius_;
    return {radius_ * std::cos(a), radius_ * std::sin(a), Scalar(0)};
  }
  Vec3<Scalar> unit_tangent(Scalar s) const override {
    const Scalar a = s / radius_;
    return {-std::sin(a), std::cos(a), Scalar(0)};
  }
  Vec3<Scalar> tangent_derivative(Scalar s) const override {
    const Scalar a = s / radius_;
    return {-std::cos(a) / radius_, -std::sin(a) / radius_, Scalar(0)};
  }

 private:
  Scalar radius_, turns_, speed_;
};

/// Helix about the z axis: r(a) = (R cos a, R sin a, c a) with c = pitch/2π.
/// Its tangent sweeps a cone of opening angle θ0, cos θ0 = c/√(R²+c²), so a
/// helix is the geometric source of the constant-θ "cone" track.
template <typename Scalar>
class HelixPath final : public GuidePath<Scalar> {
 public:
  HelixPath(Scalar radius, Scalar pitch, Scalar turns, Scalar speed)
      : radius_(radius), turns_(turns), speed_(speed) {
    if (!(radius > Scalar(0))) throw ValidationError("helix: radius must be positive");
    if (!(turns > Scalar(0))) throw ValidationError("helix: turns must be positive");
    if (!(speed > Scalar(0))) throw ValidationError("helix: speed must be positive");
    if (pitch < Scalar(0)) throw ValidationError("helix: pitch must be nonnegative");
    c_ = pitch / (Scalar(2) * std::numbers::pi_v<Scalar>);
    w_ = std::sqrt(radius_ * radius_ + c_ * c_);
  }

  /// Helix whose tangent cone has the given opening angle θ0 ∈ (0, π/2].
  static HelixPath with_cone_angle(Scalar radius, Scalar theta0, Scalar turns, Scalar speed) {
    if (!(theta0 > Scalar(0) && theta0 <= std::numbers::pi_v<Scalar> / 2))
      throw ValidationError("helix: cone angle must lie in (0, pi/2]");
    const Scalar pitch = Scalar(2) * std::numbers::pi_v<Scalar> * radius /
                         std::tan(theta0);
    return HelixPath(radius, pitch, turns, speed);
  }

  std::string kind() const override { return "helix"; }
  Scalar speed() const override { return speed_; }
  Scalar length() const override {
    return w_ * turns_ * Scalar(2) * std::numbers::pi_v<Scalar>;
  }
  Vec3<Scalar> position(Scalar s) const override {
    const Scalar a = s / w_;
    return {radius_ * std::cos(a), radius_ * std::sin(a), c_ * a};
  }
  Vec3<Scalar> unit_tangent(Scalar s) const override {
    const Scalar a = s / w_;
    return {-radius_ * std::sin(a) / w_, radius_ * std::cos(a) / w_, c_ / w_};
  }
  Vec3<Scalar> tangent_derivative(Scalar s) const override {
    const Scalar a = s / w_;
    const Scalar q = radius_ / (w_ * w_);
    return {-q * std::cos(a), -q * std::sin(a), Scalar(0)};
  }

 private:
  Scalar radius_, turns_, speed_, c_{}, w_{};
};

/// Planar Archimedean spiral ρ(a) = ρ0 + b·a in the z = 0 plane,
/// a ∈ [0, 2π·turns], b = spacing/2π. Arc length has the closed form
/// s(ρ) = [ρ√(ρ²+b²) + b² asinh(ρ/b)]/(2b); the inverse map s → a needed
/// for constant-speed traversal is solved by bisection.
template <typename Scalar>
class ArchimedeanSpiralPath final : public GuidePath<Scalar> {
 public:
  ArchimedeanSpiralPath(Scalar inner_radius, Scalar spacing, Scalar turns, Scalar speed)
      : rho0_(inner_radius), turns_(turns), speed_(speed) {
    if (inner_radius < Scalar(0))
      throw ValidationError("spiral: inner_radius must be nonnegative");
    if (!(spacing > Scalar(0))) throw ValidationError("spiral: spacing must be positive");
    if (!(turns > Scalar(0))) throw ValidationError("spiral: turns must be positive");
    if (!(speed > Scalar(0))) throw ValidationError("spiral: speed must be positive");
    b_ = spacing / (Scalar(2) * std::numbers::pi_v<Scalar>);
    a_max_ = Scalar(2) * std::numbers::pi_v<Scalar> * turns_;
    length_ = arc_length_at(a_max_);
  }

  /// Spacing that gives the requested total arc length, by bisection on the
  /// monotone length(spacing) relation.
  static Scalar solve_spacing(Scalar target_length, Scalar inner_radius, Scalar turns) {
    if (!(target_length > Scalar(0)))
      throw ValidationError("spiral: length must be positive");
    auto len = [&](Scalar spacing) {
      return ArchimedeanSpiralPath(inner_radius, spacing, turns, Scalar(1)).length();
    };
    Scalar lo = target_length * Scalar(1e-8), hi = target_length;
    while (len(hi) < target_length) hi *= Scalar(2);
    for (int it = 0; it < 200 && (hi - lo) > Scalar(4) * std::numeric_limits<Scalar>::epsilon() * hi;
         ++it) {
      const Scalar mid = (lo + hi) / Scalar(2);
      (len(mid) < target_length ? lo : hi) = mid;
    }
    return (lo + hi) / Scalar(2);
  }

  std::string kind() const override { return "archimedean_spiral"; }
  Scalar speed() const override { return speed_; }
  Scalar length() const override { return length_; }
  Vec3<Scalar> position(Scalar s) const override { return sample(s).position; }
  Vec3<Scalar> unit_tangent(Scalar s) const override { return sample(s).unit_tangent; }
  Vec3<Scalar> tangent_derivative(Scalar s) const override {
    return sample(s).tangent_derivative;
  }

  PathSample<Scalar> sample(Scalar s) const override {
    const Scalar a = invert_arc_length(s);
    const Scalar rho = rho0_ + b_ * a;
    const Scalar ca = std::cos(a), sa = std::sin(a);
    const Scalar speed_a = std::sqrt(rho * rho + b_ * b_);  // |dr/da|
    PathSample<Scalar> out;
    out.position = {rho * ca, rho * sa, Scalar(0)};
    const Vec3<Scalar> rp{b_ * ca - rho * sa, b_ * sa + rho * ca, Scalar(0)};
    const Vec3<Scalar> rpp{-Scalar(2) * b_ * sa - rho * ca,
                           Scalar(2) * b_ * ca - rho * sa, Scalar(0)};
    out.unit_tangent = rp / speed_a;
    // du/ds = (r''/|r'| - r' (r'·r'')/|r'|³) / |r'|, with r'·r'' = b·ρ.
    out.tangent_derivative =
        (rpp / speed_a - rp * (b_ * rho) / (speed_a * speed_a * speed_a)) / speed_a;
    return out;
  }

 private:
  Scalar arc_length_at(Scalar a) const {
    auto antideriv = [this](Scalar rho) {
      return (rho * std::sqrt(rho * rho + b_ * b_) +
              b_ * b_ * std::asinh(rho / b_)) / (Scalar(2) * b_);
    };
    return antideriv(rho0_ + b_ * a) - antideriv(rho0_);
  }

  Scalar invert_arc_length(Scalar s) const {
    Scalar lo = Scalar(0), hi = a_max_;
    if (s <= Scalar(0)) return Scalar(0);
    if (s >= length_) return a_max_;
    for (int it = 0; it < 128 && (hi - lo) > Scalar(2) * std::numeric_limits<Scalar>::epsilon() *
                                                 std::max(Scalar(1), hi);
         ++it) {
      const Scalar mid = (lo + hi) / Scalar(2);
      (arc_length_at(mid) < s ? lo : hi) = mid;
    }
    return (lo + hi) / Scalar(2);
  }

  Scalar rho0_, turns_, speed_, b_{}, a_max_{}, length_{};
};

namespace detail {

/// Minimal rotation taking unit vector `from` to unit vector `to`.
/// Antipodal pairs have no minimal axis and are rejected.
template <typename Scalar>
Mat3<Scalar> align_rotation(const Vec3<Scalar>& from, const Vec3<Scalar>& to) {
  const Vec3<Scalar> axis = from.cross(to);
  const Scalar s = axis.norm();
  const Scalar c = from.dot(to);
  if (s < Scalar(1e-14)) {
    if (c > Scalar(0)) return Mat3<Scalar>::Identity();
    throw ValidationError("align_rotation: vectors are antipodal, no minimal rotation");
  }
  return su2_to_so3<Scalar>(axis / s, std::atan2(s, c));
}

}  // namespace detail

/// Segments welded end to end: each one is rigidly rotated so its start
/// tangent continues the previous end tangent, then translated to the
/// previous end point. Joints that reverse direction are rejected, so the
/// composite tangent is always continuous (curvature may jump).
template <typename Scalar>
class CompositePath final : public GuidePath<Scalar> {
 public:
  CompositePath(std::vector<std::unique_ptr<GuidePath<Scalar>>> segments, Scalar speed)
      : segments_(std::move(segments)), speed_(speed) {
    if (segments_.empty()) throw ValidationError("composite: needs at least one segment");
    if (!(speed > Scalar(0))) throw ValidationError("composite: speed must be positive");
    cumlen_.resize(segments_.size() + 1);
    cumlen_[0] = Scalar(0);
    rot_.resize(segments_.size());
    base_.resize(segments_.size());
    Vec3<Scalar> end_tan{0, 0, 0}, end_pos{0, 0, 0};
    for (std::size_t i = 0; i < segments_.size(); ++i) {
      const auto& seg = *segments_[i];
      if (!std::isfinite(static_cast<double>(seg.length())))
        throw ValidationError("composite: segment " + std::to_string(i + 1) +
                              " has unbounded length");
      cumlen_[i + 1] = cumlen_[i] + seg.length();
      if (i == 0) {
        rot_[0] = Mat3<Scalar>::Identity();
        base_[0] = Vec3<Scalar>::Zero();
      } else {
        try {
          rot_[i] = detail::align_rotation<Scalar>(seg.unit_tangent(Scalar(0)), end_tan);
        } catch (const ValidationError&) {
          throw ValidationError("composite: segment " + std::to_string(i + 1) +
                                " reverses direction at its joint");
        }
        base_[i] = end_pos;
      }
      end_tan = rot_[i] * seg.unit_tangent(seg.length());
      end_pos = base_[i] + rot_[i] * (seg.position(seg.length()) - seg.position(Scalar(0)));
    }
    analytic_ = true;
    for (const auto& seg : segments_) analytic_ = analytic_ && seg->has_analytic_derivative();
  }

  std::string kind() const override { return "composite"; }
  Scalar speed() const override { return speed_; }
  Scalar length() const override { return cumlen_.back(); }
  bool has_analytic_derivative() const override { return analytic_; }
  Vec3<Scalar> position(Scalar s) const override { return sample(s).position; }
  Vec3<Scalar> unit_tangent(Scalar s) const override { return sample(s).unit_tangent; }
  Vec3<Scalar> tangent_derivative(Scalar s) const override {
    return sample(s).tangent_derivative;
  }

  PathSample<Scalar> sample(Scalar s) const override {
    const auto [i, local] = locate(s);
    const auto& seg = *segments_[i];
    PathSample<Scalar> p = seg.sample(local);
    p.position = base_[i] + rot_[i] * (p.position - seg.position(Scalar(0)));
    p.unit_tangent = rot_[i] * p.unit_tangent;
    p.tangent_derivative = rot_[i] * p.tangent_derivative;
    return p;
  }

 private:
  std::pair<std::size_t, Scalar> locate(Scalar s) const {
    s = std::clamp(s, Scalar(0), cumlen_.back());
    auto it = std::upper_bound(cumlen_.begin(), cumlen_.end(), s);
    std::size_t i = static_cast<std::size_t>(std::distance(cumlen_.begin(), it));
    i = (i == 0) ? 0 : i - 1;
    if (i >= segments_.size()) i = segments_.size() - 1;
    return {i, s - cumlen_[i]};
  }

  std::vector<std::unique_ptr<GuidePath<Scalar>>> segments_;
  std::vector<Scalar> cumlen_;
  std::vector<Mat3<Scalar>> rot_;
  std::vector<Vec3<Scalar>> base_;
  Scalar speed_;
  bool analytic_{};
};

/// ω = (k × k̇)/|k|², the rotation rate of the wave vector direction.
/// Orthogonal to k by construction.
template <typename DerivedA, typename DerivedB>
Vec3<typename DerivedA::Scalar> angular_velocity(const Eigen::MatrixBase<DerivedA>& k,
                                                 const Eigen::MatrixBase<DerivedB>& kdot) {
  using Scalar = typename DerivedA::Scalar;
  const Scalar k2 = k.squaredNorm();
  if (!(k2 > Scalar(0))) throw ValidationError("angular_velocity: k must be nonzero");
  const Vec3<Scalar> kv = k, kd = kdot;
  return kv.cross(kd) / k2;
}

/// Rotation taking k̂0 to ẑ: about the axis k̂0 × ẑ by the angle between
/// them; identity for k̂0 = ẑ and a rotation by π about x̂ for k̂0 = −ẑ.
template <typename Scalar>
Mat3<Scalar> working_frame(const Vec3<Scalar>& k0) {
  const Scalar nrm = k0.norm();
  if (nrm < Scalar(1e-300)) throw ValidationError("working_frame: k0 must be nonzero");
  const Vec3<Scalar> u = k0 / nrm;
  const Vec3<Scalar> axis = u.cross(Vec3<Scalar>{0, 0, 1});
  const Scalar s = axis.norm();
  const Scalar c = u(2);
  if (s < Scalar(1e-14)) {
    if (c > Scalar(0)) return Mat3<Scalar>::Identity();
    Mat3<Scalar> flip = Mat3<Scalar>::Identity();
    flip(1, 1) = Scalar(-1);
    flip(2, 2) = Scalar(-1);
    return flip;  // rotation by π about x̂
  }
  return su2_to_so3<Scalar>(axis / s, std::atan2(s, c));
}

enum class FrameConvention { working, lab };
enum class DerivativeMode { analytic, central };

struct TrackOptions {
  FrameConvention frame = FrameConvention::working;
  DerivativeMode derivatives = DerivativeMode::analytic;
  double eps_pole = 1e-8;
};

/// Unwrapped spherical angles of a series of unit vectors.
///
/// θ ∈ [0, π] from atan2(hypot(x,y), z); φ by nearest-branch continuation.
/// Samples with sin θ ≤ eps_pole are pole samples: a leading run takes φ
/// from the first non-pole sample (the limit convention), a trailing run
/// holds the last known φ, and any pole sample in between — or a ~π azimuth
/// jump between consecutive samples — raises PolePassageError.
template <typename Scalar>
std::pair<VecX<Scalar>, VecX<Scalar>> spherical_angles(
    const Mat3X<Scalar>& unit_vectors, double eps_pole = 1e-8,
    const VecX<Scalar>* times = nullptr) {
  const Index n = unit_vectors.cols();
  if (n == 0) throw ValidationError("spherical_angles: empty input");
  const auto time_at = [&](Index i) {
    return times ? static_cast<double>((*times)(i)) : static_cast<double>(i);
  };
  VecX<Scalar> theta(n), phi(n);
  std::vector<bool> pole(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    const Scalar x = unit_vectors(0, i), y = unit_vectors(1, i), z = unit_vectors(2, i);
    const Scalar nrm = std::sqrt(x * x + y * y + z * z);
    if (std::abs(nrm - Scalar(1)) > Scalar(1e-10))
      throw ValidationError("spherical_angles: sample " + std::to_string(i) +
                            " is not a unit vector (|v| = " +
                            std::to_string(static_cast<double>(nrm)) + ")");
    const Scalar rxy = std::hypot(x, y);
    theta(i) = std::atan2(rxy, z);
    pole[static_cast<std::size_t>(i)] = (rxy <= Scalar(eps_pole));
  }

  Index first_np = -1, last_np = -1;
  for (Index i = 0; i < n; ++i)
    if (!pole[static_cast<std::size_t>(i)]) {
      if (first_np < 0) first_np = i;
      last_np = i;
    }
  if (first_np < 0) {  // never leaves the pole: constant direction along ±ẑ
    phi.setZero();
    return {theta, phi};
  }
  for (Index i = first_np + 1; i < last_np; ++i)
    if (pole[static_cast<std::size_t>(i)])
      throw PolePassageError("trajectory returns to a pole mid-run", time_at(i));

  const Scalar pi = std::numbers::pi_v<Scalar>;
  phi(first_np) = std::atan2(unit_vectors(1, first_np), unit_vectors(0, first_np));
  for (Index i = first_np + 1; i <= last_np; ++i) {
    const Scalar raw = std::atan2(unit_vectors(1, i), unit_vectors(0, i));
    Scalar d = raw - std::atan2(unit_vectors(1, i - 1), unit_vectors(0, i - 1));
    d -= Scalar(2) * pi * std::round(d / (Scalar(2) * pi));
    if (std::abs(d) >= pi - Scalar(1e-6))
      throw PolePassageError("azimuth jump of ~pi between samples; continuation ambiguous",
                             time_at(i));
    phi(i) = phi(i - 1) + d;
  }
  for (Index i = 0; i < first_np; ++i) phi(i) = phi(first_np);
  for (Index i = last_np + 1; i < n; ++i) phi(i) = phi(last_np);
  return {theta, phi};
}

/// Sampled wave-vector history of a guide traversal: k(t), k̇(t), the
/// rotation rate ω(t) at nodes and midpoints, and the unwrapped spherical
/// angles of k̂ in the chosen frame. Immutable once built.
template <typename Scalar>
struct WaveVectorTrack {
  Scalar k_mag{};
  Mat3<Scalar> frame;       // applied to every lab-frame vector
  VecX<Scalar> times;       // N+1 uniform nodes
  Mat3X<Scalar> k;          // in-frame wave vector, N+1 columns
  Mat3X<Scalar> kdot;       // in-frame derivative
  Mat3X<Scalar> omega;      // (k×k̇)/k² at nodes
  Mat3X<Scalar> omega_mid;  // same at the N interval midpoints
  VecX<Scalar> theta, phi;  // unwrapped angles of k̂
  double eps_pole{1e-8};

  Index samples() const { return times.size(); }
  Scalar dt() const { return times(1) - times(0); }
  Vec3<Scalar> k_hat(Index i) const { return k.col(i) / k_mag; }
};

namespace detail {

/// Second-order first derivative of uniformly sampled columns: central
/// differences inside, one-sided three-point stencils at the ends.
template <typename Scalar>
Mat3X<Scalar> grid_derivative(const Mat3X<Scalar>& v, Scalar h) {
  const Index n = v.cols();
  Mat3X<Scalar> d(3, n);
  if (n < 3) throw ValidationError("grid_derivative: need at least 3 samples");
  d.col(0) = (Scalar(-3) * v.col(0) + Scalar(4) * v.col(1) - v.col(2)) / (Scalar(2) * h);
  for (Index i = 1; i + 1 < n; ++i) d.col(i) = (v.col(i + 1) - v.col(i - 1)) / (Scalar(2) * h);
  d.col(n - 1) =
      (Scalar(3) * v.col(n - 1) - Scalar(4) * v.col(n - 2) + v.col(n - 3)) / (Scalar(2) * h);
  return d;
}

}  // namespace detail

/// Samples a guide traversal on `steps` uniform intervals over [0, t_end].
/// The wave vector is k_mag times the unit tangent (perfect-guide model),
/// rotated into the working frame (k̂(0) → ẑ) unless the lab frame is
/// requested. Derivatives come from the path's closed form when available,
/// otherwise from second-order differences on the doubled sampling grid.
template <typename Scalar>
WaveVectorTrack<Scalar> sample_track(const GuidePath<Scalar>& path, Scalar k_mag,
                                     Scalar t_end, Index steps,
                                     const TrackOptions& opts = {}) {
  if (!(k_mag > Scalar(0))) throw ValidationError("sample_track: k_mag must be positive");
  if (!(t_end > Scalar(0))) throw ValidationError("sample_track: t_end must be positive");
  if (steps < 2) throw ValidationError("sample_track: steps must be at least 2");
  const Scalar span = path.speed() * t_end;
  if (span > path.length() * (Scalar(1) + Scalar(1e-9)))
    throw ValidationError("sample_track: traversal needs arc length " +
                          std::to_string(static_cast<double>(span)) + " but path has " +
                          std::to_string(static_cast<double>(path.length())));

  const Index n = steps + 1;        // grid nodes
  const Index m = 2 * steps + 1;    // doubled grid (nodes + midpoints)
  const Scalar dt = t_end / static_cast<Scalar>(steps);
  const Scalar h = dt / Scalar(2);

  Mat3X<Scalar> u(3, m), dud_s(3, m);
  for (Index i = 0; i < m; ++i) {
    const Scalar t = static_cast<Scalar>(i) * h;
    const Scalar s = std::min(path.speed() * t, path.length());
    const PathSample<Scalar> ps = path.sample(s);
    const Scalar nrm = ps.unit_tangent.norm();
    if (nrm < Scalar(1e-12))
      throw ValidationError("sample_track: degenerate tangent at t = " +
                            std::to_string(static_cast<double>(t)));
    u.col(i) = ps.unit_tangent / nrm;
    dud_s.col(i) = ps.tangent_derivative;
  }

  const bool analytic = path.has_analytic_derivative() &&
                        opts.derivatives == DerivativeMode::analytic;
  Mat3X<Scalar> k_all = k_mag * u;
  Mat3X<Scalar> kdot_all = analytic ? Mat3X<Scalar>(k_mag * path.speed() * dud_s)
                                    : detail::grid_derivative<Scalar>(k_all, h);

  const Mat3<Scalar> frame = (opts.frame == FrameConvention::working)
                                 ? working_frame<Scalar>(u.col(0))
                                 : Mat3<Scalar>::Identity();
  k_all = frame * k_all;
  kdot_all = frame * kdot_all;

  WaveVectorTrack<Scalar> track;
  track.k_mag = k_mag;
  track.frame = frame;
  track.eps_pole = opts.eps_pole;
  track.times = VecX<Scalar>::LinSpaced(n, Scalar(0), t_end);
  track.k.resize(3, n);
  track.kdot.resize(3, n);
  track.omega.resize(3, n);
  track.omega_mid.resize(3, steps);
  for (Index i = 0; i < n; ++i) {
    track.k.col(i) = k_all.col(2 * i);
    track.kdot.col(i) = kdot_all.col(2 * i);
    track.omega.col(i) = angular_velocity(track.k.col(i), track.kdot.col(i));
  }
  for (Index i = 0; i < steps; ++i)
    track.omega_mid.col(i) = angular_velocity(k_all.col(2 * i + 1), kdot_all.col(2 * i + 1));

  Mat3X<Scalar> khat = track.k / k_mag;
  auto [theta, phi] = spherical_angles<Scalar>(khat, opts.eps_pole, &track.times);
  track.theta = std::move(theta);
  track.phi = std::move(phi);
  return track;
}

/// Builds a track from raw wave-vector samples (diagnostics and tests).
/// Derivatives are grid differences; midpoint ω is the neighbor average,
/// which keeps the midpoint propagator second order.
template <typename Scalar>
WaveVectorTrack<Scalar> track_from_samples(const VecX<Scalar>& times,
                                           const Mat3X<Scalar>& k_samples,
                                           const TrackOptions& opts = {}) {
  const Index n = times.size();
  if (n < 3 || k_samples.cols() != n)
    throw ValidationError("track_from_samples: need >= 3 matching samples");
  const Scalar k_mag = k_samples.col(0).norm();
  if (!(k_mag > Scalar(0))) throw ValidationError("track_from_samples: zero wave vector");
  for (Index i = 0; i < n; ++i)
    if (std::abs(k_samples.col(i).norm() - k_mag) > Scalar(1e-10) * k_mag)
      throw ValidationError("track_from_samples: |k| is not constant at sample " +
                            std::to_string(i));

  WaveVectorTrack<Scalar> track;
  track.k_mag = k_mag;
  track.eps_pole = opts.eps_pole;
  track.frame = (opts.frame == FrameConvention::working)
                    ? working_frame<Scalar>(Vec3<Scalar>(k_samples.col(0)))
                    : Mat3<Scalar>::Identity();
  track.times = times;
  track.k = track.frame * k_samples;
  track.kdot = detail::grid_derivative<Scalar>(track.k, times(1) - times(0));
  track.omega.resize(3, n);
  for (Index i = 0; i < n; ++i)
    track.omega.col(i) = angular_velocity(track.k.col(i), track.kdot.col(i));
  track.omega_mid.resize(3, n - 1);
  for (Index i = 0; i + 1 < n; ++i)
    track.omega_mid.col(i) = (track.omega.col(i) + track.omega.col(i + 1)) / Scalar(2);
  Mat3X<Scalar> khat = track.k / k_mag;
  auto [theta, phi] = spherical_angles<Scalar>(khat, opts.eps_pole, &track.times);
  track.theta = std::move(theta);
  track.phi = std::move(phi);
  return track;
}

/// ‖k̇ + k × ((k × k̇)/k²)‖ per sample — the conserved-|k| transport
/// identity made into a residual. Zero (to discretization error) for any
/// constant-magnitude track.
template <typename Scalar>
VecX<Scalar> transport_residual(const WaveVectorTrack<Scalar>& track) {
  const Index n = track.samples();
  VecX<Scalar> r(n);
  for (Index i = 0; i < n; ++i) {
    const Vec3<Scalar> k = track.k.col(i);
    const Vec3<Scalar> kd = track.kdot.col(i);
    r(i) = (kd + k.cross(Vec3<Scalar>(k.cross(kd) / k.squaredNorm()))).norm();
  }
  return r;
}

}  // namespace fiberwave
