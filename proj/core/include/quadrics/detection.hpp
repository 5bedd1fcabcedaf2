#pragma once

#include <cstdint>
#include <unordered_set>
#include <vector>

#include "quadrics/detection_types.hpp"
#include "quadrics/rng.hpp"
#include "quadrics/scene.hpp"
#include "quadrics/voting.hpp"

namespace quadrics {

/// Uniform spatial grid (cell = radius) for companion queries around a basis seed.
/// Buckets are contiguous and ordered, so query output is deterministic.
class CompanionGrid {
public:
    CompanionGrid(const SceneCloud& cloud, double radius);

    /// Indices within `radius` of the query, in ascending index order per cell walk.
    void query(const Vec3& center, std::vector<int>& out) const;

    double radius() const { return radius_; }

private:
    int cell_of(const Vec3& p) const;
    const SceneCloud& cloud_;
    double radius_, cell_;
    Vec3 origin_;
    int nx_ = 1, ny_ = 1, nz_ = 1;
    std::vector<int> starts_;   // cell -> first slot
    std::vector<int> entries_;  // point indices bucketed by cell
};

/// Iterative dominant-plane extraction: single-point plane hypotheses over a
/// deterministic candidate stride, inliers by point-plane distance < tau and normal
/// agreement > tau_n; planes above min_plane_fraction are removed, at most 10.
std::pair<SceneCloud, std::vector<Plane>> remove_planes(const SceneCloud& cloud,
                                                        const DetectionConfig& cfg);

/// One fresh, non-degenerate, non-duplicate 3-point basis: x1 uniform, x2/x3 uniform
/// within the companion radius. Rejects collinear triplets, systems of rank != 9 and
/// hash duplicates; nullopt after the retry budget is exhausted.
std::optional<Basis> sample_basis(const SceneCloud& cloud, const CompanionGrid& grid, Rng& rng,
                                  const DetectionConfig& cfg,
                                  std::unordered_set<std::uint64_t>& seen);

/// Captured accumulator state of the best-scoring basis, for diagnostics.
struct AccumulatorSnapshot {
    Accumulator accumulator{64, 1.5};
    bool valid = false;
};

/// Generic 3-point detection: for each basis, a 1D null-space family is voted on by
/// sampled candidate points; gated peaks become hypotheses. Deterministic given the
/// seed. Returns raw hypotheses; clustering/aggregation is a separate stage.
std::vector<Hypothesis> detect(const SceneCloud& cloud, const DetectionConfig& cfg,
                               std::uint64_t seed, AccumulatorSnapshot* dump = nullptr);

/// Sphere-specific detection with single-point bases and the sphere-reduced family.
std::vector<Hypothesis> detect_spheres(const SceneCloud& cloud, const DetectionConfig& cfg,
                                       std::uint64_t seed, AccumulatorSnapshot* dump = nullptr);

/// Plane-specific detection. Plane hypotheses are rank-1 quadrics whose gradient
/// vanishes on the surface, so they are scored by the plane metric
/// (distance < tau and |n . n_plane| > tau_n) instead of the generic score.
std::vector<Hypothesis> detect_planes(const SceneCloud& cloud, const DetectionConfig& cfg,
                                      std::uint64_t seed);

/// Classical baseline: uniform 4-tuples, minimal fit, full-scene verification of every
/// hypothesis. Used to benchmark the 3-point voting path against.
std::vector<Hypothesis> detect_4pt_reference(const SceneCloud& cloud, const DetectionConfig& cfg,
                                             std::uint64_t seed, int trials);

}  // namespace quadrics
