#pragma once

#include <span>

#include "quadrics/quadric.hpp"
#include "quadrics/types.hpp"

namespace quadrics {

/// Stacked linear constraints of a set of oriented points: per point one value row
/// (the monomial vector, rhs 0) and three gradient rows (rhs = weight * normal).
/// Value rows come first, then the gradient blocks, matching the compact system layout.
struct ConstraintSystem {
    Eigen::MatrixXd rows;  // 4N x 10 (generic) or 4 x 5 (sphere-reduced)
    Eigen::VectorXd rhs;   // 4N
    double weight = 1.0;
    int point_count = 0;
};

struct FitDiagnostics {
    int rank = 0;
    Vec10 singular_values = Vec10::Zero();  // of the constraint system, descending
    double condition = 0.0;                 // sv(0)/sv(last nonzero)
};

class RankDeficient : public Error {
public:
    RankDeficient(const std::string& what, FitDiagnostics diag)
        : Error(what), diagnostics(std::move(diag)) {}
    FitDiagnostics diagnostics;
};

/// Affine solution family q = particular + basis * lambda of an under-determined fit.
struct NullSpaceSolution {
    Vec10 particular = Vec10::Zero();
    Eigen::Matrix<double, 10, Eigen::Dynamic> basis;  // 10 x D, orthonormal columns
    int dim = 0;
};

struct FitResult {
    Quadric quadric;
    FitDiagnostics diagnostics;
};

/// Compact 4N x 10 constraint system. Ranks run 4/7/9/10 for N = 1/2/3/>=4 on
/// non-degenerate data. Throws on empty input or a non-unit normal.
ConstraintSystem build_system(std::span<const OrientedPoint> points, double weight);

/// Sphere-reduced 4x5 system over (A, G, H, I, J); B=C=A and D=E=F=0 are structural.
ConstraintSystem build_system_sphere(const OrientedPoint& point);

/// Homogeneous direction-constrained system: value rows plus gradient rows projected
/// onto the normal's tangent plane. Its null space is exactly the set of quadrics that
/// interpolate the points with gradients parallel to the normals (per-point gradient
/// scales eliminated), which is what the solvers below minimize over.
Eigen::MatrixXd build_direction_system(std::span<const OrientedPoint> points, double weight);

FitDiagnostics system_diagnostics(const ConstraintSystem& system, double rank_tol = kRankTol);

/// Closed-form fit of >= 4 oriented points: smallest right singular vector of the
/// direction-constrained system, canonicalized. Interpolates noise-free data exactly
/// and is invariant to the gradient-row weight on consistent data.
/// Throws RankDeficient when the compact system has rank < 10.
FitResult fit_least_squares(std::span<const OrientedPoint> points, double weight = 1.0);

/// The minimal case: exactly 4 oriented points.
FitResult fit_minimal_4pt(std::span<const OrientedPoint> points, double weight = 1.0);

/// 1D solution family of a 3-point basis. basis column = the data-plane rank-1 quadric
/// (the compact system's exact null vector); particular = the member of the consistent
/// solution plane orthogonal to it, scaled by a least-squares fit of the gradient rhs.
/// Throws DegenerateBasis unless the compact system has rank 9.
NullSpaceSolution nullspace_3pt(std::span<const OrientedPoint> points, double weight = 1.0);

/// 1D family of spheres tangent-compatible with one oriented point, embedded in the
/// full 10-coefficient space (members satisfy A=B=C, D=E=F=0 exactly).
NullSpaceSolution nullspace_sphere(const OrientedPoint& point);

/// Plane through the point with the point's normal; fully determined.
Plane fit_plane_1pt(const OrientedPoint& point);

}  // namespace quadrics
