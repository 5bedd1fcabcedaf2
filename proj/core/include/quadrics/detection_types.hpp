#pragma once

#include <array>
#include <cstdint>
#include <optional>

#include "quadrics/quadric.hpp"
#include "quadrics/types.hpp"

namespace quadrics {

enum class DetectionMode { generic, sphere, plane };

/// Which constraint block computes the voting coordinate of a candidate point.
/// value_row uses the single value equation (the candidate's normal is consumed by
/// the gate instead); full_rows uses the complete 4-row block.
enum class LambdaRows { value_row, full_rows };

const char* to_string(DetectionMode m);
const char* to_string(LambdaRows m);

/// Basis of up to 3 scene point indices. Active indices are sorted and distinct.
struct Basis {
    std::array<int, 3> indices{-1, -1, -1};
    int size = 0;
    std::uint64_t hash_key = 0;

    bool contains(int idx) const {
        for (int k = 0; k < size; ++k)
            if (indices[k] == idx) return true;
        return false;
    }
};

struct Hypothesis {
    Quadric quadric;
    double score = 0.0;
    int inlier_count = 0;
    Basis basis;
    double peak_mass = 0.0;
};

struct DetectionConfig {
    double tau_s = 0.03;                 // voxel sampling rate, in [0.025, 0.05]
    int knn = 16;                        // normal-estimation neighborhood
    double neighbor_radius_factor = 1.0; // companion radius = factor * 0.5 (normalized units)
    int max_bases = 2000;                // RANSAC basis budget
    int samples_per_basis = 150;         // candidate x4 draws per basis
    double tau = 0.01;                   // algebraic inlier threshold (unit-ball frame)
    double tau_n = 0.95;                 // normal-agreement threshold
    double weight = 1.0;                 // gradient-row weight w
    int bin_count = 64;
    double kernel_bandwidth = 1.5;       // in bins
    double lambda_scale = 1.0;
    bool plane_removal = true;
    double min_plane_fraction = 0.15;    // plane acceptance: inlier fraction of the cloud
    double min_peak_votes = 5.0;         // peak promotion: mass >= max(votes, fraction*cast)
    double min_peak_fraction = 0.02;
    DetectionMode mode = DetectionMode::generic;
    LambdaRows lambda_rows = LambdaRows::value_row;
    std::optional<Vec3> viewpoint;       // raw-frame sensor position; nullopt = +z at infinity

    double companion_radius() const { return neighbor_radius_factor * 0.5; }
};

}  // namespace quadrics
