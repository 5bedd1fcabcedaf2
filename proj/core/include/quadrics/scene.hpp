#pragma once

#include <optional>
#include <span>
#include <vector>

#include "quadrics/quadric.hpp"
#include "quadrics/types.hpp"

namespace quadrics {

/// Point cloud in unit-ball coordinates, remembering the raw-frame transform.
/// normalized = (raw - center) / scale; diameter = 2 * scale (raw units).
struct SceneCloud {
    std::vector<OrientedPoint> points;
    bool has_normals = false;
    Vec3 center = Vec3::Zero();
    double scale = 1.0;
    double diameter = 2.0;

    Vec3 to_normalized(const Vec3& raw) const { return (raw - center) / scale; }
    Vec3 to_raw(const Vec3& normalized) const { return center + scale * normalized; }
};

/// Centroid-center and scale so the farthest point has norm 1. Normals (when given)
/// are carried through unchanged. Throws TooFewPoints below 3 points.
SceneCloud normalize_scene(std::span<const Vec3> positions, std::span<const Vec3> normals = {});

/// Voxel-grid downsampling with cell size tau_s * diameter (tau_s * 2 in normalized
/// units); each occupied cell is replaced by the centroid of its members with the
/// renormalized average normal. Output order follows sorted cell indices.
SceneCloud voxel_downsample(const SceneCloud& cloud, double tau_s);

/// PCA normals from the knn neighborhood of each point, oriented toward the viewpoint
/// (finite point) or toward +z at infinity when viewpoint is nullopt.
SceneCloud estimate_normals(const SceneCloud& cloud, int knn,
                            std::optional<Vec3> viewpoint = std::nullopt);

/// Quadric de-normalization into raw scene coordinates, and its inverse.
Quadric quadric_to_raw(const Quadric& normalized_frame, const SceneCloud& cloud);
Quadric quadric_to_normalized(const Quadric& raw_frame, const SceneCloud& cloud);

}  // namespace quadrics
