#include "quadrics/fitting.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace quadrics {

namespace {

void check_points(std::span<const OrientedPoint> points) {
    if (points.empty()) throw Error("build_system: empty point set");
    for (const auto& p : points) {
        if (std::abs(p.normal.norm() - 1.0) > 1e-9)
            throw Error("build_system: normal is not unit length");
    }
}

}  // namespace

ConstraintSystem build_system(std::span<const OrientedPoint> points, double weight) {
    check_points(points);
    const int n = static_cast<int>(points.size());
    ConstraintSystem sys;
    sys.weight = weight;
    sys.point_count = n;
    sys.rows.resize(4 * n, 10);
    sys.rhs = Eigen::VectorXd::Zero(4 * n);
    for (int i = 0; i < n; ++i) {
        sys.rows.row(i) = monomials(points[i].position).transpose();
        sys.rows.block(n + 3 * i, 0, 3, 10) = weight * monomial_gradients(points[i].position);
        sys.rhs.segment(n + 3 * i, 3) = weight * points[i].normal;
    }
    return sys;
}

ConstraintSystem build_system_sphere(const OrientedPoint& point) {
    if (std::abs(point.normal.norm() - 1.0) > 1e-9)
        throw Error("build_system_sphere: normal is not unit length");
    const Vec3& x = point.position;
    ConstraintSystem sys;
    sys.weight = 1.0;
    sys.point_count = 1;
    sys.rows.resize(4, 5);
    sys.rhs.resize(4);
    // unknowns (A, G, H, I, J) of A*(x^2+y^2+z^2) + 2Gx + 2Hy + 2Iz + J
    sys.rows.row(0) << x.squaredNorm(), 2 * x.x(), 2 * x.y(), 2 * x.z(), 1;
    sys.rows.row(1) << 2 * x.x(), 2, 0, 0, 0;
    sys.rows.row(2) << 2 * x.y(), 0, 2, 0, 0;
    sys.rows.row(3) << 2 * x.z(), 0, 0, 2, 0;
    sys.rhs << 0, point.normal.x(), point.normal.y(), point.normal.z();
    return sys;
}

Eigen::MatrixXd build_direction_system(std::span<const OrientedPoint> points, double weight) {
    check_points(points);
    const int n = static_cast<int>(points.size());
    Eigen::MatrixXd h(4 * n, 10);
    for (int i = 0; i < n; ++i) {
        const Vec3& nv = points[i].normal;
        h.row(i) = monomials(points[i].position).transpose();
        h.block(n + 3 * i, 0, 3, 10) =
            weight * ((Mat3::Identity() - nv * nv.transpose()) * monomial_gradients(points[i].position));
    }
    return h;
}

FitDiagnostics system_diagnostics(const ConstraintSystem& system, double rank_tol) {
    // spectrum of the Gram matrix: singular values without a full SVD
    const Eigen::MatrixXd gram = system.rows.transpose() * system.rows;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
    const auto& ev = es.eigenvalues();  // ascending
    FitDiagnostics d;
    const int m = static_cast<int>(ev.size());
    for (int i = 0; i < m && i < 10; ++i)
        d.singular_values(i) = std::sqrt(std::max(ev(m - 1 - i), 0.0));
    const double top = d.singular_values(0);
    for (int i = 0; i < m && i < 10; ++i)
        if (d.singular_values(i) > rank_tol * top) ++d.rank;
    if (d.rank > 0) d.condition = top / d.singular_values(d.rank - 1);
    return d;
}

namespace {

FitResult fit_direction_tls(std::span<const OrientedPoint> points, double weight) {
    const ConstraintSystem sys = build_system(points, weight);
    FitDiagnostics diag = system_diagnostics(sys);
    if (diag.rank < 10)
        throw RankDeficient("fit: constraint system rank " + std::to_string(diag.rank) + " < 10",
                            diag);
    const Eigen::MatrixXd h = build_direction_system(points, weight);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(h, Eigen::ComputeFullV);
    const Vec10 q = svd.matrixV().col(9);
    return {Quadric::from_coefficients(q), diag};
}

}  // namespace

FitResult fit_least_squares(std::span<const OrientedPoint> points, double weight) {
    if (points.size() < 4) throw TooFewPoints("fit_least_squares: need at least 4 oriented points");
    return fit_direction_tls(points, weight);
}

FitResult fit_minimal_4pt(std::span<const OrientedPoint> points, double weight) {
    if (points.size() != 4) throw Error("fit_minimal_4pt: exactly 4 oriented points required");
    return fit_direction_tls(points, weight);
}

NullSpaceSolution nullspace_3pt(std::span<const OrientedPoint> points, double weight) {
    if (points.size() != 3) throw Error("nullspace_3pt: exactly 3 oriented points required");
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j)
            if ((points[i].position - points[j].position).norm() < 1e-12)
                throw DegenerateBasis("nullspace_3pt: coincident points");

    const ConstraintSystem sys = build_system(points, weight);
    // right singular directions via the 10x10 Gram spectra; the null eigengaps of a
    // non-degenerate triplet are enormous, so the extracted directions are exact to
    // machine precision (the gate criteria downstream check this at 1e-7 and 1e-9)
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 10, 10>> es_a(
        sys.rows.transpose() * sys.rows);
    const auto& ev = es_a.eigenvalues();  // ascending
    // the smallest vanishes identically (the data-plane quadric); degeneracy shows next
    if (ev(1) <= (kRankTol * kRankTol) * ev(9))
        throw DegenerateBasis("nullspace_3pt: constraint system rank < 9");

    // one inverse-iteration polish: remove the row-space contamination of the Gram
    // eigenvector so the family direction is exact to machine precision
    Vec10 mu = es_a.eigenvectors().col(0);
    const Vec10 atr = sys.rows.transpose() * (sys.rows * mu);
    for (int i = 1; i < 10; ++i) {
        const Vec10 v = es_a.eigenvectors().col(i);
        mu -= v * (v.dot(atr) / ev(i));
    }
    mu.normalize();

    const Eigen::MatrixXd h = build_direction_system(points, weight);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 10, 10>> es_h(h.transpose() * h);
    const Vec10 s1 = es_h.eigenvectors().col(0);
    const Vec10 s2 = es_h.eigenvectors().col(1);

    // the solution plane span{s1,s2} contains mu; take its complement direction
    const Vec10 a1 = s1 - s1.dot(mu) * mu;
    const Vec10 a2 = s2 - s2.dot(mu) * mu;
    Vec10 u = (a1.squaredNorm() >= a2.squaredNorm()) ? a1 : a2;
    const double un = u.norm();
    if (un < 1e-9) throw DegenerateBasis("nullspace_3pt: solution family collapsed");
    u /= un;

    // scale so the gradient rows match the rhs in the least-squares sense
    const Eigen::VectorXd au = sys.rows * u;
    const double denom = au.squaredNorm();
    if (denom < 1e-18) throw DegenerateBasis("nullspace_3pt: unconstrained family direction");
    const double c = au.dot(sys.rhs) / denom;

    NullSpaceSolution ns;
    ns.particular = c * u;
    ns.basis.resize(10, 1);
    ns.basis.col(0) = mu;
    ns.dim = 1;
    return ns;
}

namespace {

Vec10 embed_sphere(const Eigen::Matrix<double, 5, 1>& r) {
    Vec10 q = Vec10::Zero();
    q(0) = q(1) = q(2) = r(0);
    q(6) = r(1);
    q(7) = r(2);
    q(8) = r(3);
    q(9) = r(4);
    return q;
}

}  // namespace

NullSpaceSolution nullspace_sphere(const OrientedPoint& point) {
    const ConstraintSystem sys = build_system_sphere(point);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(sys.rows, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    if (sv(3) <= kRankTol * sv(0)) throw DegenerateBasis("nullspace_sphere: rank < 4");

    const Eigen::Matrix<double, 5, 1> mu_r = svd.matrixV().col(4);
    // the single-point sphere system is consistent; min-norm LS solves it exactly
    Eigen::Matrix<double, 5, 1> p_r = Eigen::Matrix<double, 5, 1>::Zero();
    for (int i = 0; i < 4; ++i)
        p_r += svd.matrixV().col(i) * (svd.matrixU().col(i).dot(sys.rhs) / sv(i));

    NullSpaceSolution ns;
    ns.particular = embed_sphere(p_r);
    ns.basis.resize(10, 1);
    ns.basis.col(0) = embed_sphere(mu_r).normalized();
    ns.dim = 1;
    return ns;
}

Plane fit_plane_1pt(const OrientedPoint& point) {
    if (std::abs(point.normal.norm() - 1.0) > 1e-9)
        throw Error("fit_plane_1pt: normal is not unit length");
    return Plane(point.normal, -point.normal.dot(point.position));
}

}  // namespace quadrics
