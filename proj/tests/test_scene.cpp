#include <Eigen/Dense>

#include "doctest.h"
#include "quadrics/detection.hpp"
#include "quadrics/kdtree.hpp"
#include "quadrics/scene.hpp"
#include "support.hpp"

using namespace quadrics;
using namespace test_support;

namespace {

SceneCloud identity_cloud(std::vector<OrientedPoint> pts, bool has_normals = true) {
    SceneCloud c;
    c.points = std::move(pts);
    c.has_normals = has_normals;
    return c;
}

}  // namespace

TEST_CASE("normalize_scene centers and scales to the unit ball") {
    Rng rng(1);
    std::vector<Vec3> raw;
    for (int i = 0; i < 400; ++i) raw.push_back(Vec3(10, 0, 0) + 2.0 * rng.unit_vector());
    const SceneCloud cloud = normalize_scene(raw);
    Vec3 centroid = Vec3::Zero();
    double max_norm = 0;
    for (const auto& p : cloud.points) {
        centroid += p.position;
        max_norm = std::max(max_norm, p.position.norm());
    }
    centroid /= cloud.points.size();
    CHECK(centroid.norm() < 1e-12);
    CHECK(max_norm == doctest::Approx(1.0).epsilon(1e-12));
    CHECK((cloud.center - Vec3(10, 0, 0)).norm() < 0.2);
    CHECK(cloud.diameter == doctest::Approx(2 * cloud.scale));

    CHECK_THROWS_AS(normalize_scene(std::vector<Vec3>{Vec3(0, 0, 0), Vec3(1, 0, 0)}),
                    TooFewPoints);
}

TEST_CASE("normalize_scene on already unit-ball symmetric data is the identity") {
    // symmetric pairs force an exactly zero centroid; the farthest point has norm 1
    std::vector<Vec3> raw{Vec3(1, 0, 0),   Vec3(-1, 0, 0),  Vec3(0, 0.5, 0.2),
                          Vec3(0, -0.5, -0.2), Vec3(0.3, -0.1, 0), Vec3(-0.3, 0.1, 0)};
    const SceneCloud cloud = normalize_scene(raw);
    CHECK(cloud.center.norm() < 1e-12);
    CHECK(cloud.scale == doctest::Approx(1.0).epsilon(1e-12));
    for (std::size_t i = 0; i < raw.size(); ++i)
        CHECK((cloud.points[i].position - raw[i]).norm() < 1e-12);
}

TEST_CASE("quadric de-normalization preserves the inlier set") {
    Rng rng(2);
    const EllipsoidSpec spec = random_ellipsoid_spec(rng);
    const Quadric truth_unit = ellipsoid_quadric(spec);
    // raw scene = unit-frame samples pushed through an affine placement
    const Vec3 offset(3, -7, 2);
    const double spread = 11.0;
    std::vector<Vec3> raw;
    const auto samples = sample_surface(truth_unit, 200, 99);
    for (const auto& p : samples) raw.push_back(offset + spread * p.position);
    const SceneCloud cloud = normalize_scene(raw);

    // fit in the normalized frame, then map back to raw coordinates
    std::vector<OrientedPoint> fit_pts;
    for (std::size_t i = 0; i < samples.size(); ++i)
        fit_pts.push_back({cloud.points[i].position, samples[i].normal});
    const Quadric qn = fit_least_squares(fit_pts).quadric;
    const Quadric qr = quadric_to_raw(qn, cloud);

    // on-surface points stay on the surface after the frame change
    for (std::size_t i = 0; i < raw.size(); ++i) CHECK(std::abs(qr.value(raw[i])) < 1e-7);

    // the raw-frame algebraic values are one positive multiple of the normalized ones,
    // so the inlier set under a correspondingly scaled threshold is identical;
    // probe at off-surface points where the values are well away from rounding noise
    double ratio = 0;
    bool have_ratio = false;
    for (int i = 0; i < 50; ++i) {
        const Vec3 xn = rng.in_unit_ball();
        const double vn = qn.value(xn);
        if (std::abs(vn) < 1e-3) continue;
        const double r = qr.value(cloud.to_raw(xn)) / vn;
        if (have_ratio) CHECK(r == doctest::Approx(ratio).epsilon(1e-9));
        ratio = r;
        have_ratio = true;
    }
    CHECK(have_ratio);
    CHECK(ratio > 0);
    const Quadric back = quadric_to_normalized(qr, cloud);
    CHECK((back.coefficients() - qn.coefficients()).norm() < 1e-9);
}

TEST_CASE("voxel_downsample merges 2x2 blocks of a planar grid") {
    std::vector<OrientedPoint> pts;
    const double h = 0.01;
    for (int i = 0; i < 100; ++i)
        for (int j = 0; j < 100; ++j)
            pts.push_back({Vec3(-0.495 + i * h, -0.495 + j * h, 0), Vec3(0, 0, 1)});
    SceneCloud cloud = identity_cloud(pts);
    const SceneCloud down = voxel_downsample(cloud, h);  // cell = 2h
    CHECK(down.points.size() >= 2400);
    CHECK(down.points.size() <= 2700);
    CHECK(down.has_normals);

    // finer than the point spacing: identity count
    const SceneCloud same = voxel_downsample(cloud, h / 4);
    CHECK(same.points.size() == cloud.points.size());

    // all points identical: single representative
    SceneCloud dup = identity_cloud(std::vector<OrientedPoint>(
        50, OrientedPoint{Vec3(0.1, 0.2, 0.3), Vec3(0, 0, 1)}));
    CHECK(voxel_downsample(dup, 0.05).points.size() == 1);

    CHECK_THROWS_AS(voxel_downsample(cloud, 0.0), Error);
}

TEST_CASE("estimate_normals on a plane") {
    Rng rng(3);
    std::vector<OrientedPoint> pts;
    for (int i = 0; i < 600; ++i)
        pts.push_back({Vec3(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), 0), Vec3::Zero()});
    SceneCloud cloud = identity_cloud(pts, false);
    const SceneCloud withn = estimate_normals(cloud, 12);
    REQUIRE(withn.has_normals);
    for (const auto& p : withn.points) {
        CHECK(std::abs(p.normal.norm() - 1.0) < 1e-9);
        CHECK(p.normal.dot(Vec3(0, 0, 1)) > std::cos(1.0 * M_PI / 180));  // oriented to +z
    }
}

TEST_CASE("estimate_normals on a sphere with a finite viewpoint") {
    Rng rng(4);
    std::vector<OrientedPoint> pts;
    for (int i = 0; i < 8000; ++i) pts.push_back({rng.unit_vector(), Vec3::Zero()});
    SceneCloud cloud = identity_cloud(pts, false);
    const SceneCloud withn = estimate_normals(cloud, 24, Vec3(0, 0, 10));
    for (const auto& p : withn.points) {
        if (p.position.z() < 0.3) continue;  // check the hemisphere facing the viewpoint
        CHECK(p.normal.dot(p.position.normalized()) > std::cos(3.0 * M_PI / 180));
    }
}

TEST_CASE("estimate_normals stays unit-length with an oversized neighborhood") {
    Rng rng(5);
    std::vector<OrientedPoint> pts;
    for (int i = 0; i < 40; ++i) pts.push_back({rng.unit_vector(), Vec3::Zero()});
    SceneCloud cloud = identity_cloud(pts, false);
    const SceneCloud withn = estimate_normals(cloud, 39);
    for (const auto& p : withn.points) CHECK(std::abs(p.normal.norm() - 1.0) < 1e-9);
    CHECK_THROWS_AS(estimate_normals(cloud, 2), Error);
}

TEST_CASE("remove_planes strips a dominant plane but keeps the sphere") {
    Rng rng(6);
    std::vector<OrientedPoint> pts;
    for (int i = 0; i < 900; ++i)
        pts.push_back({Vec3(rng.uniform(-0.9, 0.9), rng.uniform(-0.9, 0.9), -0.4), Vec3(0, 0, 1)});
    const Vec3 center(0, 0, 0.25);
    for (int i = 0; i < 600; ++i) {
        const Vec3 u = rng.unit_vector();
        pts.push_back({center + 0.3 * u, u});
    }
    SceneCloud cloud = identity_cloud(pts);
    DetectionConfig cfg;
    const auto [pruned, planes] = remove_planes(cloud, cfg);
    REQUIRE(planes.size() == 1);
    CHECK(std::abs(planes[0].normal().dot(Vec3(0, 0, 1))) > 0.999);

    int sphere_kept = 0;
    for (const auto& p : pruned.points)
        if (std::abs((p.position - center).norm() - 0.3) < 1e-6) ++sphere_kept;
    CHECK(sphere_kept >= static_cast<int>(0.95 * 600));
}

TEST_CASE("remove_planes leaves a plane-free cloud untouched") {
    Rng rng(7);
    std::vector<OrientedPoint> pts;
    for (int i = 0; i < 500; ++i) {
        const Vec3 u = rng.unit_vector();
        pts.push_back({0.8 * u, u});
    }
    SceneCloud cloud = identity_cloud(pts);
    DetectionConfig cfg;
    const auto [pruned, planes] = remove_planes(cloud, cfg);
    CHECK(planes.empty());
    CHECK(pruned.points.size() == cloud.points.size());
}

TEST_CASE("remove_planes takes orthogonal dominant planes in support order") {
    Rng rng(8);
    std::vector<OrientedPoint> pts;
    for (int i = 0; i < 800; ++i)
        pts.push_back({Vec3(rng.uniform(-0.9, 0.9), rng.uniform(-0.9, 0.9), -0.5), Vec3(0, 0, 1)});
    for (int i = 0; i < 500; ++i)
        pts.push_back({Vec3(-0.5, rng.uniform(-0.9, 0.9), rng.uniform(-0.9, 0.9)), Vec3(1, 0, 0)});
    SceneCloud cloud = identity_cloud(pts);
    DetectionConfig cfg;
    const auto [pruned, planes] = remove_planes(cloud, cfg);
    REQUIRE(planes.size() == 2);
    CHECK(std::abs(planes[0].normal().dot(Vec3(0, 0, 1))) > 0.999);  // larger support first
    CHECK(std::abs(planes[1].normal().dot(Vec3(1, 0, 0))) > 0.999);
    CHECK(pruned.points.size() < 100);
}

TEST_CASE("kd-tree knn matches brute force") {
    Rng rng(9);
    std::vector<Vec3> pts;
    for (int i = 0; i < 500; ++i) pts.push_back(rng.in_unit_ball());
    const KdTree tree(pts);
    std::vector<int> knn;
    for (int trial = 0; trial < 30; ++trial) {
        const Vec3 query = rng.in_unit_ball();
        tree.knn(query, 8, knn);
        REQUIRE(knn.size() == 8);
        std::vector<std::pair<double, int>> brute;
        for (int i = 0; i < 500; ++i) brute.push_back({(pts[i] - query).squaredNorm(), i});
        std::sort(brute.begin(), brute.end());
        for (int k = 0; k < 8; ++k) CHECK(knn[k] == brute[k].second);

        std::vector<int> in_radius;
        tree.radius(query, 0.3, in_radius);
        int expect = 0;
        for (int i = 0; i < 500; ++i)
            if ((pts[i] - query).norm() <= 0.3) ++expect;
        CHECK(static_cast<int>(in_radius.size()) == expect);
    }
}
