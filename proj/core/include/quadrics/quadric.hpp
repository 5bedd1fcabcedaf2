#pragma once

#include <optional>
#include <span>

#include "quadrics/types.hpp"

namespace quadrics {

/// Coarse quadric classification from the eigenvalue signature of the 4x4
/// matrix and its upper-left 3x3 block.
enum class QuadricClass {
    sphere,
    ellipsoid,
    elliptic_paraboloid,
    hyperbolic_paraboloid,
    hyperboloid_one_sheet,
    hyperboloid_two_sheets,
    cone,
    elliptic_cylinder,
    parabolic_cylinder,
    hyperbolic_cylinder,
    plane_pair,
    plane,
    degenerate
};

const char* to_string(QuadricClass c);

/// Monomial vector v(x) with f(x) = v(x) . q  (coefficients A..J).
Vec10 monomials(const Vec3& x);

/// Rows are the partial derivatives of v(x) . q, i.e. grad f(x) = monomial_gradients(x) * q.
Eigen::Matrix<double, 3, 10> monomial_gradients(const Vec3& x);

/// Canonical form: unit Euclidean norm, first coefficient with |q_i| > 1e-9 positive.
/// Iterates to a bitwise fixed point so canonicalizing twice is a no-op. Throws on zero input.
Vec10 canonicalize(Vec10 q);

/// Symmetric 4x4 matrix view of a raw coefficient vector.
Mat4 coefficient_matrix(const Vec10& q);

/// Raw-coefficient evaluation of the quadric polynomial (works on any scaling of q).
inline double algebraic_distance(const Vec10& q, const Vec3& x) { return monomials(x).dot(q); }

/// Raw-coefficient gradient; may be the zero vector at singular points (cone apex, plane pair axis).
inline Vec3 gradient(const Vec10& q, const Vec3& x) { return monomial_gradients(x) * q; }

/// Implicit quadric surface, stored in canonical normalization.
class Quadric {
public:
    Quadric() = default;  // zero / invalid; from_coefficients for a real surface

    static Quadric from_coefficients(const Vec10& raw) {
        Quadric r;
        r.q_ = canonicalize(raw);
        return r;
    }
    static Quadric from_matrix(const Mat4& m);

    const Vec10& coefficients() const { return q_; }
    bool valid() const { return q_.squaredNorm() > 0; }

    /// Symmetric 4x4 matrix view.
    Mat4 matrix() const;

    double value(const Vec3& x) const { return algebraic_distance(q_, x); }
    Vec3 gradient_at(const Vec3& x) const { return gradient(q_, x); }

private:
    Vec10 q_ = Vec10::Zero();
};

inline double algebraic_distance(const Quadric& q, const Vec3& x) { return q.value(x); }
inline Vec3 gradient(const Quadric& q, const Vec3& x) { return q.gradient_at(x); }

/// Rank-1 quadric whose zero set is the plane (with multiplicity two): Q = pi pi^T.
Quadric plane_quadric(const Plane& pi);

QuadricClass classify(const Quadric& q, double eig_tol = 1e-6);

struct ProjectionResult {
    Vec3 point;      // last iterate
    bool converged;  // |algebraic distance| < tol reached
};

/// Iterative foot-point projection of a seed along the gradient direction.
ProjectionResult project_to_surface(const Quadric& q, const Vec3& seed, int max_iters = 50,
                                    double tol = 1e-10);

/// Mean geometric foot-point distance of the points to the surface; non-converged
/// points contribute the displacement of their last iterate. Throws on an invalid quadric.
double quadric_distance_samples(const Quadric& q, std::span<const Vec3> points);

/// Center/radius of a sphere-like quadric (A=B=C, D=E=F~0); nullopt otherwise.
struct SphereParams {
    Vec3 center;
    double radius;
};
std::optional<SphereParams> sphere_params(const Quadric& q, double tol = 1e-6);

/// Rewrites the quadric under x_new = (x_old - center) / scale (homogeneous congruence),
/// then canonicalizes. Use to move between raw scene coordinates and unit-ball coordinates.
Quadric transform_to_normalized(const Quadric& raw_frame, const Vec3& center, double scale);
/// Inverse of transform_to_normalized.
Quadric transform_to_raw(const Quadric& normalized_frame, const Vec3& center, double scale);

}  // namespace quadrics
