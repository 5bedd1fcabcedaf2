#include "quadrics/quadric.hpp"

#include <Eigen/Dense>
#include <limits>
#include <cmath>

namespace quadrics {

const char* to_string(QuadricClass c) {
    switch (c) {
        case QuadricClass::sphere: return "sphere";
        case QuadricClass::ellipsoid: return "ellipsoid";
        case QuadricClass::elliptic_paraboloid: return "elliptic_paraboloid";
        case QuadricClass::hyperbolic_paraboloid: return "hyperbolic_paraboloid";
        case QuadricClass::hyperboloid_one_sheet: return "hyperboloid_one_sheet";
        case QuadricClass::hyperboloid_two_sheets: return "hyperboloid_two_sheets";
        case QuadricClass::cone: return "cone";
        case QuadricClass::elliptic_cylinder: return "elliptic_cylinder";
        case QuadricClass::parabolic_cylinder: return "parabolic_cylinder";
        case QuadricClass::hyperbolic_cylinder: return "hyperbolic_cylinder";
        case QuadricClass::plane_pair: return "plane_pair";
        case QuadricClass::plane: return "plane";
        case QuadricClass::degenerate: return "degenerate";
    }
    return "degenerate";
}

Vec10 monomials(const Vec3& p) {
    const double x = p.x(), y = p.y(), z = p.z();
    Vec10 v;
    v(0) = x * x;
    v(1) = y * y;
    v(2) = z * z;
    v(3) = 2 * x * y;
    v(4) = 2 * x * z;
    v(5) = 2 * y * z;
    v(6) = 2 * x;
    v(7) = 2 * y;
    v(8) = 2 * z;
    v(9) = 1;
    return v;
}

Eigen::Matrix<double, 3, 10> monomial_gradients(const Vec3& p) {
    const double x = p.x(), y = p.y(), z = p.z();
    Eigen::Matrix<double, 3, 10> g = Eigen::Matrix<double, 3, 10>::Zero();
    g(0, 0) = 2 * x;
    g(0, 3) = 2 * y;
    g(0, 4) = 2 * z;
    g(0, 6) = 2;
    g(1, 1) = 2 * y;
    g(1, 3) = 2 * x;
    g(1, 5) = 2 * z;
    g(1, 7) = 2;
    g(2, 2) = 2 * z;
    g(2, 4) = 2 * x;
    g(2, 5) = 2 * y;
    g(2, 8) = 2;
    return g;
}

Vec10 canonicalize(Vec10 q) {
    double n = q.norm();
    if (!(n > 0.0) || !std::isfinite(n)) throw Error("cannot canonicalize a zero or non-finite quadric");
    // sign first (norm-invariant): first coefficient above the relative threshold positive
    for (int i = 0; i < 10; ++i) {
        if (std::abs(q(i)) > 1e-9 * n) {
            if (q(i) < 0) q = -q;
            break;
        }
    }
    // normalize until the norm is 1 to a few ulps; an already-canonical vector skips the
    // division entirely, which makes the op bitwise idempotent
    constexpr double kNormSlack = 8 * std::numeric_limits<double>::epsilon();
    for (int iter = 0; iter < 8 && std::abs(n - 1.0) > kNormSlack; ++iter) {
        q /= n;
        n = q.norm();
    }
    return q;
}

Mat4 coefficient_matrix(const Vec10& q) {
    Mat4 m;
    m << q(0), q(3), q(4), q(6),  //
        q(3), q(1), q(5), q(7),   //
        q(4), q(5), q(2), q(8),   //
        q(6), q(7), q(8), q(9);
    return m;
}

Mat4 Quadric::matrix() const { return coefficient_matrix(q_); }

Quadric Quadric::from_matrix(const Mat4& m) {
    Vec10 q;
    q << m(0, 0), m(1, 1), m(2, 2), 0.5 * (m(0, 1) + m(1, 0)), 0.5 * (m(0, 2) + m(2, 0)),
        0.5 * (m(1, 2) + m(2, 1)), 0.5 * (m(0, 3) + m(3, 0)), 0.5 * (m(1, 3) + m(3, 1)),
        0.5 * (m(2, 3) + m(3, 2)), m(3, 3);
    return from_coefficients(q);
}

Quadric plane_quadric(const Plane& plane) {
    const Vec4& pi = plane.pi;
    return Quadric::from_matrix(pi * pi.transpose());
}

QuadricClass classify(const Quadric& quadric, double eig_tol) {
    const Mat4 m = quadric.matrix();
    Eigen::SelfAdjointEigenSolver<Mat3> es3(m.topLeftCorner<3, 3>());
    Eigen::SelfAdjointEigenSolver<Mat4> es4(m);
    const Eigen::Vector3d l3 = es3.eigenvalues();
    const Eigen::Vector4d l4 = es4.eigenvalues();

    const double s3 = l3.cwiseAbs().maxCoeff();
    const double s4 = l4.cwiseAbs().maxCoeff();

    int pos3 = 0, neg3 = 0;
    for (int i = 0; i < 3; ++i) {
        if (s3 > 0 && std::abs(l3(i)) > eig_tol * s3) (l3(i) > 0 ? pos3 : neg3)++;
    }
    int rank4 = 0;
    double det_sign = 1.0;
    for (int i = 0; i < 4; ++i) {
        if (s4 > 0 && std::abs(l4(i)) > eig_tol * s4) {
            ++rank4;
            if (l4(i) < 0) det_sign = -det_sign;
        }
    }
    // analyze -q when the 3x3 block leans negative; det(Q) is invariant (even dimension)
    if (neg3 > pos3) std::swap(pos3, neg3);
    const int rank3 = pos3 + neg3;

    switch (rank3) {
        case 3:
            if (rank4 == 4) {
                if (pos3 == 3) {
                    if (det_sign > 0) return QuadricClass::degenerate;  // no real points
                    const double spread = l3.maxCoeff() - l3.minCoeff();
                    return spread < eig_tol * s3 ? QuadricClass::sphere : QuadricClass::ellipsoid;
                }
                return det_sign > 0 ? QuadricClass::hyperboloid_one_sheet
                                    : QuadricClass::hyperboloid_two_sheets;
            }
            if (rank4 == 3) return pos3 == 2 ? QuadricClass::cone : QuadricClass::degenerate;
            return QuadricClass::degenerate;
        case 2:
            if (rank4 == 4)
                return pos3 == 2 ? QuadricClass::elliptic_paraboloid
                                 : QuadricClass::hyperbolic_paraboloid;
            if (rank4 == 3)
                return pos3 == 2 ? QuadricClass::elliptic_cylinder
                                 : QuadricClass::hyperbolic_cylinder;
            if (rank4 == 2)
                return pos3 == 1 ? QuadricClass::plane_pair : QuadricClass::degenerate;
            return QuadricClass::degenerate;
        case 1:
            if (rank4 == 3) return QuadricClass::parabolic_cylinder;
            if (rank4 == 2) return QuadricClass::plane_pair;  // parallel planes
            if (rank4 == 1) return QuadricClass::plane;       // double plane
            return QuadricClass::degenerate;
        case 0:
            if (rank4 == 2) return QuadricClass::plane;  // purely linear equation
            return QuadricClass::degenerate;
        default:
            return QuadricClass::degenerate;
    }
}

ProjectionResult project_to_surface(const Quadric& q, const Vec3& seed, int max_iters, double tol) {
    Vec3 x = seed;
    double f = q.value(x);
    for (int it = 0; it < max_iters; ++it) {
        if (std::abs(f) < tol) return {x, true};
        const Vec3 g = q.gradient_at(x);
        const double g2 = g.squaredNorm();
        if (g2 < 1e-24) break;  // singular point, nowhere to go
        Vec3 step = (f / g2) * g;
        const double sn = step.norm();
        if (sn > 1.0) step *= 1.0 / sn;
        // fall back to halving when the Newton step overshoots
        Vec3 xn = x - step;
        double fn = q.value(xn);
        for (int h = 0; h < 4 && std::abs(fn) > std::abs(f); ++h) {
            step *= 0.5;
            xn = x - step;
            fn = q.value(xn);
        }
        x = xn;
        f = fn;
    }
    return {x, std::abs(f) < tol};
}

double quadric_distance_samples(const Quadric& q, std::span<const Vec3> points) {
    if (!q.valid()) throw Error("quadric_distance_samples: zero quadric");
    if (points.empty()) throw Error("quadric_distance_samples: empty point set");
    double sum = 0;
    for (const Vec3& p : points) {
        const ProjectionResult r = project_to_surface(q, p);
        sum += (r.point - p).norm();
    }
    return sum / static_cast<double>(points.size());
}

std::optional<SphereParams> sphere_params(const Quadric& q, double tol) {
    const Vec10& c = q.coefficients();
    const double a = (c(0) + c(1) + c(2)) / 3.0;
    if (std::abs(a) < tol) return std::nullopt;
    for (int i = 0; i < 3; ++i)
        if (std::abs(c(i) - a) > tol * std::abs(a)) return std::nullopt;
    for (int i = 3; i < 6; ++i)
        if (std::abs(c(i)) > tol * std::abs(a)) return std::nullopt;
    const Vec3 center = -Vec3(c(6), c(7), c(8)) / a;
    const double r2 = center.squaredNorm() - c(9) / a;
    if (r2 <= 0) return std::nullopt;
    return SphereParams{center, std::sqrt(r2)};
}

namespace {

// homogeneous map [x;1] -> [(x-center)/scale; 1]
Mat4 normalizing_transform(const Vec3& center, double scale) {
    Mat4 t = Mat4::Identity() / scale;
    t.topRightCorner<3, 1>() = -center / scale;
    t(3, 3) = 1.0;
    return t;
}

}  // namespace

Quadric transform_to_normalized(const Quadric& raw_frame, const Vec3& center, double scale) {
    // q_norm(x_norm) = q_raw(x_raw) with x_raw = center + scale * x_norm
    Mat4 t = Mat4::Identity() * scale;
    t.topRightCorner<3, 1>() = center;
    t(3, 3) = 1.0;
    return Quadric::from_matrix(t.transpose() * raw_frame.matrix() * t);
}

Quadric transform_to_raw(const Quadric& normalized_frame, const Vec3& center, double scale) {
    const Mat4 t = normalizing_transform(center, scale);
    return Quadric::from_matrix(t.transpose() * normalized_frame.matrix() * t);
}

}  // namespace quadrics
