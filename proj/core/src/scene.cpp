#include "quadrics/scene.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>

#include "quadrics/kdtree.hpp"

namespace quadrics {

SceneCloud normalize_scene(std::span<const Vec3> positions, std::span<const Vec3> normals) {
    if (positions.size() < 3) throw TooFewPoints("normalize_scene: need at least 3 points");
    if (!normals.empty() && normals.size() != positions.size())
        throw Error("normalize_scene: normal count does not match point count");

    Vec3 centroid = Vec3::Zero();
    for (const Vec3& p : positions) centroid += p;
    centroid /= static_cast<double>(positions.size());

    double max_r = 0;
    for (const Vec3& p : positions) max_r = std::max(max_r, (p - centroid).norm());
    if (max_r <= 0) max_r = 1.0;  // all points coincide

    SceneCloud cloud;
    cloud.center = centroid;
    cloud.scale = max_r;
    cloud.diameter = 2.0 * max_r;
    cloud.has_normals = !normals.empty();
    cloud.points.resize(positions.size());
    for (std::size_t i = 0; i < positions.size(); ++i) {
        cloud.points[i].position = (positions[i] - centroid) / max_r;
        if (cloud.has_normals) {
            const double n = normals[i].norm();
            cloud.points[i].normal = n > 0 ? Vec3(normals[i] / n) : Vec3::Zero();
        }
    }
    return cloud;
}

SceneCloud voxel_downsample(const SceneCloud& cloud, double tau_s) {
    if (!(tau_s > 0.0 && tau_s < 1.0)) throw Error("voxel_downsample: tau_s must be in (0,1)");
    const double cell = tau_s * 2.0;  // normalized-frame cell size

    struct CellAcc {
        Vec3 pos = Vec3::Zero();
        Vec3 nrm = Vec3::Zero();
        int count = 0;
    };
    // ordered map keeps the output deterministic
    std::map<std::tuple<long, long, long>, CellAcc> cells;
    for (const OrientedPoint& p : cloud.points) {
        const auto key = std::make_tuple(static_cast<long>(std::floor((p.position.x() + 2.0) / cell)),
                                         static_cast<long>(std::floor((p.position.y() + 2.0) / cell)),
                                         static_cast<long>(std::floor((p.position.z() + 2.0) / cell)));
        CellAcc& acc = cells[key];
        acc.pos += p.position;
        acc.nrm += p.normal;
        acc.count++;
    }

    SceneCloud out = cloud;
    out.points.clear();
    out.points.reserve(cells.size());
    for (const auto& [key, acc] : cells) {
        OrientedPoint p;
        p.position = acc.pos / acc.count;
        if (cloud.has_normals) {
            const double n = acc.nrm.norm();
            p.normal = n > 1e-12 ? Vec3(acc.nrm / n) : Vec3(0, 0, 1);
        }
        out.points.push_back(p);
    }
    return out;
}

SceneCloud estimate_normals(const SceneCloud& cloud, int knn, std::optional<Vec3> viewpoint) {
    const int n = static_cast<int>(cloud.points.size());
    if (knn < 3) throw Error("estimate_normals: knn must be >= 3");
    if (knn >= n) knn = n - 1;

    std::vector<Vec3> positions(cloud.points.size());
    for (std::size_t i = 0; i < cloud.points.size(); ++i) positions[i] = cloud.points[i].position;
    const KdTree tree(positions);

    // viewpoint given in raw coordinates; normals are computed in the normalized frame
    const std::optional<Vec3> vp_norm =
        viewpoint ? std::optional<Vec3>(cloud.to_normalized(*viewpoint)) : std::nullopt;

    SceneCloud out = cloud;
    out.has_normals = true;
    std::vector<int> nbrs;
    for (int i = 0; i < n; ++i) {
        tree.knn(positions[i], knn + 1, nbrs);  // +1: the query point itself
        Vec3 mean = Vec3::Zero();
        for (int j : nbrs) mean += positions[j];
        mean /= static_cast<double>(nbrs.size());
        Mat3 cov = Mat3::Zero();
        for (int j : nbrs) {
            const Vec3 d = positions[j] - mean;
            cov += d * d.transpose();
        }
        Eigen::SelfAdjointEigenSolver<Mat3> es(cov);
        Vec3 normal = es.eigenvectors().col(0);  // smallest eigenvalue
        const Vec3 toward = vp_norm ? (*vp_norm - positions[i]) : Vec3(0, 0, 1);
        if (normal.dot(toward) < 0) normal = -normal;
        out.points[i].normal = normal.normalized();
    }
    return out;
}

Quadric quadric_to_raw(const Quadric& normalized_frame, const SceneCloud& cloud) {
    return transform_to_raw(normalized_frame, cloud.center, cloud.scale);
}

Quadric quadric_to_normalized(const Quadric& raw_frame, const SceneCloud& cloud) {
    return transform_to_normalized(raw_frame, cloud.center, cloud.scale);
}

}  // namespace quadrics
