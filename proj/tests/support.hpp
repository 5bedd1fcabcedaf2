#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "quadrics/fitting.hpp"
#include "quadrics/quadric.hpp"
#include "quadrics/rng.hpp"
#include "quadrics/synth.hpp"

namespace test_support {

using namespace quadrics;

/// |cosine| between canonical coefficient vectors; 1 means the same surface.
inline double coeff_cosine(const Quadric& a, const Quadric& b) {
    return std::abs(a.coefficients().dot(b.coefficients()));
}

/// Random coefficient vector (pure algebra, not necessarily a bounded surface).
inline Vec10 random_coefficients(Rng& rng) {
    Vec10 v;
    for (int i = 0; i < 10; ++i) v(i) = rng.normal();
    if (v.norm() < 1e-9) v(0) = 1;
    return v;
}

struct EllipsoidSpec {
    Vec3 center;
    Mat3 rot;
    Vec3 axes;
};

inline EllipsoidSpec random_ellipsoid_spec(Rng& rng) {
    EllipsoidSpec e;
    e.center = 0.15 * rng.in_unit_ball();
    const double u1 = rng.uniform(), u2 = rng.uniform(), u3 = rng.uniform();
    const double a = std::sqrt(1 - u1), b = std::sqrt(u1);
    Eigen::Quaterniond q(a * std::sin(2 * M_PI * u2), a * std::cos(2 * M_PI * u2),
                         b * std::sin(2 * M_PI * u3), b * std::cos(2 * M_PI * u3));
    e.rot = q.normalized().toRotationMatrix();
    e.axes = Vec3(rng.uniform(0.3, 0.8), rng.uniform(0.3, 0.8), rng.uniform(0.3, 0.8));
    return e;
}

inline Quadric ellipsoid_quadric(const EllipsoidSpec& e) {
    const Mat3 d = Vec3(1 / (e.axes(0) * e.axes(0)), 1 / (e.axes(1) * e.axes(1)),
                        1 / (e.axes(2) * e.axes(2)))
                       .asDiagonal();
    const Mat3 m = e.rot * d * e.rot.transpose();
    Mat4 q = Mat4::Zero();
    q.topLeftCorner<3, 3>() = m;
    q.topRightCorner<3, 1>() = -m * e.center;
    q.bottomLeftCorner<1, 3>() = (-m * e.center).transpose();
    q(3, 3) = e.center.dot(m * e.center) - 1.0;
    return Quadric::from_matrix(q);
}

inline Vec3 ellipsoid_point(const EllipsoidSpec& e, double theta, double phi) {
    const Vec3 local(e.axes(0) * std::sin(theta) * std::cos(phi),
                     e.axes(1) * std::sin(theta) * std::sin(phi), e.axes(2) * std::cos(theta));
    return e.center + e.rot * local;
}

/// Oriented samples of a quadric with pairwise separation and, for triplets, a
/// triangle-area floor, so rank claims are tested on non-degenerate configurations.
inline std::vector<OrientedPoint> well_separated_samples(const Quadric& q, int count,
                                                         std::uint64_t seed,
                                                         double min_dist = 0.15) {
    for (int attempt = 0; attempt < 60; ++attempt) {
        const auto pool = sample_surface(q, std::max(4 * count, 24), mix_seed(seed + attempt));
        std::vector<OrientedPoint> out;
        for (const auto& p : pool) {
            bool ok = true;
            for (const auto& s : out) ok &= (s.position - p.position).norm() > min_dist;
            if (!ok) continue;
            out.push_back(p);
            if (static_cast<int>(out.size()) == count) break;
        }
        if (static_cast<int>(out.size()) < count) continue;
        if (count == 3) {
            const Vec3 ab = out[1].position - out[0].position;
            const Vec3 ac = out[2].position - out[0].position;
            if (0.5 * ab.cross(ac).norm() < 0.01) continue;
        }
        return out;
    }
    throw SurfaceNotFound("well_separated_samples: could not build a non-degenerate sample");
}

inline OrientedPoint sphere_point(const Vec3& center, double radius, const Vec3& dir) {
    const Vec3 u = dir.normalized();
    return {center + radius * u, u};
}

}  // namespace test_support
