#pragma once

#include <vector>

#include "quadrics/detection_types.hpp"
#include "quadrics/quadric.hpp"
#include "quadrics/scene.hpp"

namespace quadrics {

struct ClusterParams {
    double tau_coeff = 0.5;  // l1 gate on coefficient distance
    double tau_frob = 0.3;   // d_close merge threshold
    double tau_geom = 0.4;   // d_far merge threshold, in [0,1]
    double tau = 0.01;       // on-surface algebraic threshold
    double tau_n = 0.95;     // normal agreement threshold
    int k_sub = 2000;        // scene subsample size for d_far
};

/// Fast coefficient-space distance: ||Q1 Q2^+ - I||_F gated by the l1 test; +infinity
/// when the gate fails. Evaluated for both signs of q2, taking the minimum.
double d_close(const Quadric& q1, const Quadric& q2, const ClusterParams& params);

/// Pseudo-geometric support distance over a deterministic scene subsample; 0 means
/// identical support, 1 means disjoint.
double d_far(const Quadric& q1, const Quadric& q2, const SceneCloud& scene,
             const ClusterParams& params);

struct Score {
    double score = 0.0;  // inlier fraction
    int inlier_count = 0;
};

/// Points with |algebraic distance| < tau and normalized-gradient agreement > tau_n.
/// Orientation-sensitive: a sign-flipped quadric scores ~0.
Score score(const Quadric& q, const SceneCloud& scene, const ClusterParams& params);

/// Coarse-to-fine agglomeration: single linkage under d_close < tau_frob, then under
/// d_far < tau_geom on cluster representatives. Each output is its cluster's
/// highest-score member, rescored on the full scene, sorted by descending score.
std::vector<Hypothesis> aggregate(std::vector<Hypothesis> hypotheses, const SceneCloud& scene,
                                  const ClusterParams& params);

}  // namespace quadrics
