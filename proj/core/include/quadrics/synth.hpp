#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "quadrics/quadric.hpp"
#include "quadrics/scene.hpp"

namespace quadrics {

/// Scene with known ground truth; member points satisfy their surface to 1e-9 and
/// carry exact gradient normals until corrupted.
struct SyntheticScene {
    SceneCloud cloud;
    std::vector<Quadric> ground_truth;
    std::vector<int> membership;  // surface index, -1 for clutter
    std::vector<double> surface_size;  // bbox diagonal of each surface's samples
    double noise_sigma = 0.0;
};

/// Random bounded quadric intersecting the unit ball; class-constructed when a filter
/// is given (canonical form + random rotation/translation), otherwise a random class.
/// Throws GenerationTimeout after 1000 attempts.
Quadric random_quadric(std::uint64_t seed, std::optional<QuadricClass> filter = std::nullopt);

/// `count` surface points from projected unit-ball seeds; normals are the normalized
/// gradient; all residuals < 1e-9. Throws SurfaceNotFound when the surface cannot
/// supply the requested count.
std::vector<OrientedPoint> sample_surface(const Quadric& q, int count, std::uint64_t seed);

/// Assemble a noise-free scene from one or more surfaces (points per surface each).
SyntheticScene make_scene(std::span<const Quadric> surfaces, int points_per_surface,
                          std::uint64_t seed);

/// Gaussian position noise of sigma * surface bbox diagonal on members, plus uniform
/// unit-ball clutter with random normals up to the requested fraction of the total.
SyntheticScene corrupt(const SyntheticScene& scene, double sigma, double clutter_fraction,
                       std::uint64_t seed);

/// (mean foot-point distance of truth samples to the estimate,
///  mean 1 - n_truth . normalized_gradient_estimate).
std::pair<double, double> evaluate_fit(const Quadric& estimated, const Quadric& truth,
                                       std::span<const OrientedPoint> truth_points);

struct SweepConfig {
    std::uint64_t seed = 1;
    std::vector<double> noise_levels{0.0, 0.01, 0.02, 0.03, 0.04, 0.05};
    int quadrics_per_level = 10;
    int fits_per_set = 20;
    int points_per_scene = 400;
    bool record_timings = false;  // off by default so the CSV is byte-reproducible
};

struct SweepRow {
    double noise_sigma;
    std::uint64_t quadric_seed;
    std::string method;  // "minimal4" | "least_squares"
    int fit_index;
    double point_err;
    double angle_err;
    long long runtime_ns;
};

/// Noise sweep over random quadrics comparing the minimal 4-point fit against the
/// dense fit on all points. Deterministic given the seed (timings opt-in).
std::vector<SweepRow> run_fitting_sweep(const SweepConfig& cfg);

/// CSV schema: noise_sigma,quadric_seed,method,fit_index,point_err,angle_err,runtime_ns
void write_sweep_csv(std::span<const SweepRow> rows, std::ostream& out);

struct LambdaBench {
    double fast_ns_per_lambda;
    double resolve_ns_per_lambda;
    double max_relative_mismatch;  // piggybacked correctness check
};

/// Median per-candidate cost of the closed-form family coordinate vs. re-solving the
/// stacked 16x10 system from scratch, over random bases with on-surface candidates.
LambdaBench bench_lambda(int trials, std::uint64_t seed = 12345);

}  // namespace quadrics
