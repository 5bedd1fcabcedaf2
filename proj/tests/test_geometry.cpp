#include <limits>

#include "doctest.h"
#include "support.hpp"

using namespace quadrics;
using namespace test_support;

namespace {

Vec10 unit_sphere_raw() {
    Vec10 q = Vec10::Zero();
    q(0) = q(1) = q(2) = 1;
    q(9) = -1;
    return q;
}

// term-by-term polynomial evaluation, independent of the monomial-vector path
double poly_eval(const Vec10& q, const Vec3& p) {
    const double x = p.x(), y = p.y(), z = p.z();
    return q(0) * x * x + q(1) * y * y + q(2) * z * z + 2 * q(3) * x * y + 2 * q(4) * x * z +
           2 * q(5) * y * z + 2 * q(6) * x + 2 * q(7) * y + 2 * q(8) * z + q(9);
}

}  // namespace

TEST_CASE("algebraic_distance on the unit sphere") {
    const Quadric q = Quadric::from_coefficients(unit_sphere_raw());
    // raw norm of (1,1,1,0,...,-1) is 2, so the canonical center value is -1/2
    CHECK(q.value(Vec3(0, 0, 0)) == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(q.value(Vec3(1, 0, 0)) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("algebraic_distance matches term-by-term polynomial evaluation") {
    Rng rng(101);
    for (int i = 0; i < 500; ++i) {
        const Vec10 q = canonicalize(random_coefficients(rng));
        const Vec3 x = rng.in_unit_ball() * 2.0;
        CHECK(algebraic_distance(q, x) == doctest::Approx(poly_eval(q, x)).epsilon(1e-12));
    }
}

TEST_CASE("gradient of the unit sphere and a cone apex") {
    const Vec10 raw = unit_sphere_raw();  // unnormalized coefficients
    CHECK((gradient(raw, Vec3(1, 0, 0)) - Vec3(2, 0, 0)).norm() < 1e-14);

    Vec10 cone = Vec10::Zero();  // x^2 + y^2 - z^2
    cone(0) = cone(1) = 1;
    cone(2) = -1;
    CHECK(gradient(cone, Vec3(0, 0, 0)).norm() == 0.0);
}

TEST_CASE("gradient matches central finite differences") {
    Rng rng(202);
    const double h = 1e-4;
    for (int i = 0; i < 1000; ++i) {
        const Vec10 q = canonicalize(random_coefficients(rng));
        const Vec3 x = rng.in_unit_ball() * 1.5;
        Vec3 fd;
        for (int k = 0; k < 3; ++k) {
            Vec3 hi = x, lo = x;
            hi(k) += h;
            lo(k) -= h;
            fd(k) = (algebraic_distance(q, hi) - algebraic_distance(q, lo)) / (2 * h);
        }
        const Vec3 g = gradient(q, x);
        CHECK((g - fd).norm() <= 1e-5 * std::max(1.0, g.norm()));
    }
}

TEST_CASE("plane_quadric of axis-aligned planes") {
    const Quadric z0 = plane_quadric(Plane(Vec4(0, 0, 1, 0)));
    Vec10 expect_z = Vec10::Zero();
    expect_z(2) = 1;  // z^2
    CHECK((z0.coefficients() - expect_z).norm() < 1e-15);

    const Quadric x1 = plane_quadric(Plane(Vec4(1, 0, 0, -1)));  // (x-1)^2
    Vec10 expect_x = Vec10::Zero();
    expect_x(0) = 1;
    expect_x(6) = -1;
    expect_x(9) = 1;
    expect_x = canonicalize(expect_x);
    CHECK((x1.coefficients() - expect_x).norm() < 1e-14);
}

TEST_CASE("plane_quadric always has matrix rank 1") {
    Rng rng(303);
    for (int i = 0; i < 200; ++i) {
        const Plane pi(rng.unit_vector(), rng.uniform(-1, 1));
        const Quadric q = plane_quadric(pi);
        Eigen::JacobiSVD<Mat4> svd(q.matrix());
        CHECK(svd.singularValues()(1) < 1e-10 * svd.singularValues()(0));
    }
}

TEST_CASE("classify: canonical shapes") {
    CHECK(classify(Quadric::from_coefficients(unit_sphere_raw())) == QuadricClass::sphere);

    Vec10 cyl = Vec10::Zero();  // x^2 + y^2 - 1
    cyl(0) = cyl(1) = 1;
    cyl(9) = -1;
    CHECK(classify(Quadric::from_coefficients(cyl)) == QuadricClass::elliptic_cylinder);

    Rng rng(404);
    for (int i = 0; i < 20; ++i) {
        const Plane pi(rng.unit_vector(), rng.uniform(-1, 1));
        CHECK(classify(plane_quadric(pi)) == QuadricClass::plane);
    }

    Vec10 cone = Vec10::Zero();
    cone(0) = cone(1) = 1;
    cone(2) = -1;
    CHECK(classify(Quadric::from_coefficients(cone)) == QuadricClass::cone);

    Vec10 parab = Vec10::Zero();  // x^2 + y^2 - 2z
    parab(0) = parab(1) = 1;
    parab(8) = -1;
    CHECK(classify(Quadric::from_coefficients(parab)) == QuadricClass::elliptic_paraboloid);

    Vec10 hyp1 = Vec10::Zero();  // x^2 + y^2 - z^2 - 1
    hyp1(0) = hyp1(1) = 1;
    hyp1(2) = -1;
    hyp1(9) = -1;
    CHECK(classify(Quadric::from_coefficients(hyp1)) == QuadricClass::hyperboloid_one_sheet);

    Vec10 hyp2 = Vec10::Zero();  // x^2 - y^2 - z^2 - 1 = 0  <=>  x^2 = 1 + y^2 + z^2
    hyp2(0) = 1;
    hyp2(1) = hyp2(2) = -1;
    hyp2(9) = -1;
    CHECK(classify(Quadric::from_coefficients(hyp2)) == QuadricClass::hyperboloid_two_sheets);
}

TEST_CASE("classify is invariant to coefficient scaling") {
    Rng rng(505);
    for (int i = 0; i < 100; ++i) {
        const Vec10 raw = random_coefficients(rng);
        const QuadricClass base = classify(Quadric::from_coefficients(raw));
        for (double s : {3.7, -2.0, 1e-3, -1e3}) {
            CHECK(classify(Quadric::from_coefficients(s * raw)) == base);
        }
    }
}

TEST_CASE("canonicalization is idempotent bitwise and sign-stable") {
    Rng rng(606);
    for (int i = 0; i < 1000; ++i) {
        const Vec10 raw = random_coefficients(rng) * std::pow(10.0, rng.uniform(-6, 6));
        const Vec10 once = canonicalize(raw);
        const Vec10 twice = canonicalize(once);
        CHECK(once == twice);  // bitwise
        CHECK(once.norm() == doctest::Approx(1.0).epsilon(4e-15));
        // first significant coefficient is positive
        for (int k = 0; k < 10; ++k) {
            if (std::abs(once(k)) > 1e-9) {
                CHECK(once(k) > 0);
                break;
            }
        }
    }
    CHECK_THROWS_AS(canonicalize(Vec10::Zero()), Error);
}

TEST_CASE("zero set, gradient direction and class survive scaling before canonicalization") {
    Rng rng(707);
    for (int i = 0; i < 50; ++i) {
        const Vec10 raw = random_coefficients(rng);
        const Quadric a = Quadric::from_coefficients(raw);
        const Quadric b = Quadric::from_coefficients(rng.uniform(0.1, 9.0) * raw);
        CHECK((a.coefficients() - b.coefficients()).norm() < 1e-12);
    }
}

TEST_CASE("quadric_distance_samples: radial cases") {
    const Quadric sphere = Quadric::from_coefficients(unit_sphere_raw());
    Rng rng(808);
    std::vector<Vec3> at_11, on_surface;
    for (int i = 0; i < 60; ++i) {
        const Vec3 u = rng.unit_vector();
        at_11.push_back(1.1 * u);
        on_surface.push_back(u);
    }
    CHECK(quadric_distance_samples(sphere, at_11) == doctest::Approx(0.1).epsilon(1e-6));
    CHECK(quadric_distance_samples(sphere, on_surface) < 1e-9);
    CHECK_THROWS_AS(quadric_distance_samples(Quadric{}, at_11), Error);
}

TEST_CASE("quadric_distance_samples agrees with a dense tessellation oracle") {
    Rng rng(909);
    for (int trial = 0; trial < 3; ++trial) {
        const EllipsoidSpec spec = random_ellipsoid_spec(rng);
        const Quadric q = ellipsoid_quadric(spec);

        // offset query points: surface points displaced along the outward normal
        std::vector<Vec3> queries;
        for (int i = 0; i < 40; ++i) {
            const double theta = std::acos(rng.uniform(-1, 1));
            const double phi = rng.uniform(0, 2 * M_PI);
            const Vec3 s = ellipsoid_point(spec, theta, phi);
            const Vec3 n = q.gradient_at(s).normalized();
            queries.push_back(s + rng.uniform(0.04, 0.1) * n);
        }

        // brute-force nearest-vertex distance against a fine parametric mesh
        const int nt = 256, np = 512;
        std::vector<Vec3> mesh;
        mesh.reserve(nt * np);
        for (int it = 1; it < nt; ++it)
            for (int ip = 0; ip < np; ++ip)
                mesh.push_back(ellipsoid_point(spec, M_PI * it / nt, 2 * M_PI * ip / np));
        double oracle_sum = 0;
        for (const Vec3& p : queries) {
            double best = std::numeric_limits<double>::max();
            for (const Vec3& v : mesh) best = std::min(best, (v - p).squaredNorm());
            oracle_sum += std::sqrt(best);
        }
        const double oracle_mean = oracle_sum / queries.size();
        const double measured = quadric_distance_samples(q, queries);
        CHECK(measured == doctest::Approx(oracle_mean).epsilon(0.02));
    }
}

TEST_CASE("sphere_params extracts center and radius") {
    Rng rng(111);
    for (int i = 0; i < 20; ++i) {
        const Vec3 c = 0.3 * rng.in_unit_ball();
        const double r = rng.uniform(0.2, 0.9);
        Vec10 q = Vec10::Zero();
        q(0) = q(1) = q(2) = 1;
        q(6) = -c.x();
        q(7) = -c.y();
        q(8) = -c.z();
        q(9) = c.squaredNorm() - r * r;
        const auto params = sphere_params(Quadric::from_coefficients(q));
        REQUIRE(params.has_value());
        CHECK((params->center - c).norm() < 1e-9);
        CHECK(params->radius == doctest::Approx(r).epsilon(1e-9));
    }
    CHECK_FALSE(sphere_params(plane_quadric(Plane(Vec3(0, 0, 1), 0.0))).has_value());
}

TEST_CASE("quadric frame transforms round-trip") {
    Rng rng(222);
    for (int i = 0; i < 50; ++i) {
        const Quadric q = Quadric::from_coefficients(random_coefficients(rng));
        const Vec3 center = rng.normal3() * 5.0;
        const double scale = rng.uniform(0.5, 20.0);
        const Quadric raw = transform_to_raw(q, center, scale);
        const Quadric back = transform_to_normalized(raw, center, scale);
        CHECK((back.coefficients() - q.coefficients()).norm() < 1e-9);

        // the zero set maps consistently
        const Vec3 xn = rng.in_unit_ball();
        const double vn = q.value(xn);
        const double vr = raw.value(center + scale * xn);
        // values agree up to one global positive factor
        const Vec3 yn = rng.in_unit_ball();
        const double vn2 = q.value(yn);
        const double vr2 = raw.value(center + scale * yn);
        CHECK(vn * vr2 == doctest::Approx(vr * vn2).epsilon(1e-6));
    }
}
