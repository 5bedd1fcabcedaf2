#include "quadrics/detection.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "quadrics/clustering.hpp"
#include "quadrics/fitting.hpp"

namespace quadrics {

const char* to_string(DetectionMode m) {
    switch (m) {
        case DetectionMode::generic: return "generic";
        case DetectionMode::sphere: return "sphere";
        case DetectionMode::plane: return "plane";
    }
    return "generic";
}

const char* to_string(LambdaRows m) {
    return m == LambdaRows::value_row ? "value_row" : "full_rows";
}

CompanionGrid::CompanionGrid(const SceneCloud& cloud, double radius)
    : cloud_(cloud), radius_(radius), cell_(std::max(radius, 1e-6)) {
    Vec3 lo = Vec3::Zero(), hi = Vec3::Zero();
    if (!cloud.points.empty()) {
        lo = hi = cloud.points[0].position;
        for (const OrientedPoint& p : cloud.points) {
            lo = lo.cwiseMin(p.position);
            hi = hi.cwiseMax(p.position);
        }
    }
    origin_ = lo;
    nx_ = std::max(1, static_cast<int>((hi.x() - lo.x()) / cell_) + 1);
    ny_ = std::max(1, static_cast<int>((hi.y() - lo.y()) / cell_) + 1);
    nz_ = std::max(1, static_cast<int>((hi.z() - lo.z()) / cell_) + 1);

    const int cells = nx_ * ny_ * nz_;
    starts_.assign(cells + 1, 0);
    for (const OrientedPoint& p : cloud.points) starts_[cell_of(p.position) + 1]++;
    for (int c = 0; c < cells; ++c) starts_[c + 1] += starts_[c];
    entries_.resize(cloud.points.size());
    std::vector<int> cursor(starts_.begin(), starts_.end() - 1);
    for (int i = 0; i < static_cast<int>(cloud.points.size()); ++i)
        entries_[cursor[cell_of(cloud.points[i].position)]++] = i;
}

int CompanionGrid::cell_of(const Vec3& p) const {
    const int ix = std::clamp(static_cast<int>((p.x() - origin_.x()) / cell_), 0, nx_ - 1);
    const int iy = std::clamp(static_cast<int>((p.y() - origin_.y()) / cell_), 0, ny_ - 1);
    const int iz = std::clamp(static_cast<int>((p.z() - origin_.z()) / cell_), 0, nz_ - 1);
    return (iz * ny_ + iy) * nx_ + ix;
}

void CompanionGrid::query(const Vec3& center, std::vector<int>& out) const {
    out.clear();
    const double r2 = radius_ * radius_;
    const int cx = std::clamp(static_cast<int>((center.x() - origin_.x()) / cell_), 0, nx_ - 1);
    const int cy = std::clamp(static_cast<int>((center.y() - origin_.y()) / cell_), 0, ny_ - 1);
    const int cz = std::clamp(static_cast<int>((center.z() - origin_.z()) / cell_), 0, nz_ - 1);
    for (int iz = std::max(0, cz - 1); iz <= std::min(nz_ - 1, cz + 1); ++iz)
        for (int iy = std::max(0, cy - 1); iy <= std::min(ny_ - 1, cy + 1); ++iy)
            for (int ix = std::max(0, cx - 1); ix <= std::min(nx_ - 1, cx + 1); ++ix) {
                const int c = (iz * ny_ + iy) * nx_ + ix;
                for (int s = starts_[c]; s < starts_[c + 1]; ++s) {
                    const int idx = entries_[s];
                    if ((cloud_.points[idx].position - center).squaredNorm() <= r2)
                        out.push_back(idx);
                }
            }
}

std::pair<SceneCloud, std::vector<Plane>> remove_planes(const SceneCloud& cloud,
                                                        const DetectionConfig& cfg) {
    if (!cloud.has_normals) throw Error("remove_planes: cloud has no normals");
    SceneCloud current = cloud;
    std::vector<Plane> found;

    for (int round = 0; round < 10; ++round) {
        const int n = static_cast<int>(current.points.size());
        if (n < 3) break;
        const int candidates = std::min(n, 128);

        Plane best;
        int best_inliers = 0;
        for (int c = 0; c < candidates; ++c) {
            const int idx = static_cast<int>((static_cast<long>(c) * n) / candidates);
            const Plane pl = fit_plane_1pt(current.points[idx]);
            int inliers = 0;
            for (const OrientedPoint& p : current.points) {
                if (std::abs(pl.distance(p.position)) >= cfg.tau) continue;
                if (p.normal.dot(pl.normal()) > cfg.tau_n) ++inliers;
            }
            if (inliers > best_inliers) {
                best_inliers = inliers;
                best = pl;
            }
        }
        if (best_inliers < cfg.min_plane_fraction * n) break;

        std::vector<OrientedPoint> kept;
        kept.reserve(current.points.size());
        for (const OrientedPoint& p : current.points) {
            const bool inlier = std::abs(best.distance(p.position)) < cfg.tau &&
                                p.normal.dot(best.normal()) > cfg.tau_n;
            if (!inlier) kept.push_back(p);
        }
        current.points = std::move(kept);
        found.push_back(best);
    }
    return {std::move(current), std::move(found)};
}

namespace {

std::uint64_t triplet_key(int a, int b, int c) {
    std::array<int, 3> s{a, b, c};
    std::sort(s.begin(), s.end());
    return (static_cast<std::uint64_t>(s[0]) << 42) | (static_cast<std::uint64_t>(s[1]) << 21) |
           static_cast<std::uint64_t>(s[2]);
}

bool rank9_system(const SceneCloud& cloud, const std::array<int, 3>& idx, double weight) {
    std::array<OrientedPoint, 3> pts{cloud.points[idx[0]], cloud.points[idx[1]],
                                     cloud.points[idx[2]]};
    const ConstraintSystem sys = build_system(pts, weight);
    // singular values via the 10x10 Gram spectrum; the rank-9 margin of a usable
    // triplet is far above the squared tolerance
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 10, 10>> es(
        sys.rows.transpose() * sys.rows);
    const auto& ev = es.eigenvalues();  // ascending
    return ev(1) > (kRankTol * kRankTol) * ev(9);
}

ClusterParams cluster_params_from(const DetectionConfig& cfg) {
    ClusterParams cp;
    cp.tau = cfg.tau;
    cp.tau_n = cfg.tau_n;
    return cp;
}

}  // namespace

std::optional<Basis> sample_basis(const SceneCloud& cloud, const CompanionGrid& grid, Rng& rng,
                                  const DetectionConfig& cfg,
                                  std::unordered_set<std::uint64_t>& seen) {
    const int n = static_cast<int>(cloud.points.size());
    if (n < 3) return std::nullopt;

    std::vector<int> nbrs;
    for (int attempt = 0; attempt < 100; ++attempt) {
        const int x1 = static_cast<int>(rng.below(n));
        grid.query(cloud.points[x1].position, nbrs);
        // companions must differ from x1
        if (nbrs.size() < 3) continue;
        const int x2 = nbrs[rng.below(nbrs.size())];
        const int x3 = nbrs[rng.below(nbrs.size())];
        if (x2 == x1 || x3 == x1 || x2 == x3) continue;

        const Vec3& a = cloud.points[x1].position;
        const Vec3& b = cloud.points[x2].position;
        const Vec3& c = cloud.points[x3].position;
        if (0.5 * (b - a).cross(c - a).norm() < 1e-6) continue;  // collinear

        const std::uint64_t key = triplet_key(x1, x2, x3);
        if (seen.contains(key)) continue;

        std::array<int, 3> idx{x1, x2, x3};
        std::sort(idx.begin(), idx.end());
        if (!rank9_system(cloud, idx, cfg.weight)) continue;

        seen.insert(key);
        Basis basis;
        basis.indices = idx;
        basis.size = 3;
        basis.hash_key = key;
        return basis;
    }
    return std::nullopt;
}

namespace {

// Shared voting stage: draw candidate points, compute the family coordinate, gate,
// vote, and promote a sufficiently supported peak into a hypothesis. The value-row
// path fuses the coordinate and the gate into two 4x4 matrix-vector products.
std::optional<Hypothesis> vote_basis(const SceneCloud& cloud, const DetectionConfig& cfg,
                                     const NullSpaceSolution& ns, const Basis& basis, Rng& rng,
                                     const ClusterParams& cp, Accumulator& acc) {
    const int n = static_cast<int>(cloud.points.size());
    acc.reset();
    const VoteParams vp{cfg.tau_n, cfg.lambda_scale};
    const Mat4 mp = coefficient_matrix(ns.particular);
    const Mat4 mmu = coefficient_matrix(ns.basis.col(0));

    int cast = 0;
    for (int s = 0; s < cfg.samples_per_basis; ++s) {
        const int x4 = static_cast<int>(rng.below(n));
        if (basis.contains(x4)) continue;
        const OrientedPoint& cand = cloud.points[x4];
        double lambda;
        if (cfg.lambda_rows == LambdaRows::value_row) {
            const Vec4 u(cand.position.x(), cand.position.y(), cand.position.z(), 1.0);
            const Vec4 a = mp * u;
            const Vec4 b = mmu * u;
            const double den = u.dot(b);
            if (std::abs(den) < kRankTol) continue;
            lambda = -u.dot(a) / den;
            if (!std::isfinite(lambda)) continue;
            const Vec3 g = a.head<3>() + lambda * b.head<3>();  // half the gradient
            const double gn = g.norm();
            if (gn < 0.5e-12 || g.dot(cand.normal) <= cfg.tau_n * gn) continue;
        } else {
            const std::optional<double> full = lambda_for_point(ns, cand, cfg.weight);
            if (!full || !std::isfinite(*full)) continue;
            lambda = *full;
            if (!normal_gate(ns, lambda, cand, cfg.tau_n)) continue;
        }
        acc.add_lambda(lambda, vp.lambda_scale);
        ++cast;
    }
    if (cast == 0) return std::nullopt;

    const Accumulator::Peak peak = acc.peak();
    const double min_mass = std::max(cfg.min_peak_votes, cfg.min_peak_fraction * cast);
    if (peak.mass < min_mass) return std::nullopt;

    Hypothesis h;
    h.quadric = lambda_to_quadric(ns, peak.theta, cfg.lambda_scale);
    h.basis = basis;
    h.peak_mass = peak.mass;
    const Score sc = score(h.quadric, cloud, cp);
    if (sc.inlier_count <= 0) return std::nullopt;
    h.score = sc.score;
    h.inlier_count = sc.inlier_count;
    return h;
}

}  // namespace

std::vector<Hypothesis> detect(const SceneCloud& cloud, const DetectionConfig& cfg,
                               std::uint64_t seed, AccumulatorSnapshot* dump) {
    if (!cloud.has_normals) throw Error("detect: cloud has no normals");
    const ClusterParams cp = cluster_params_from(cfg);
    const CompanionGrid grid(cloud, cfg.companion_radius());
    std::unordered_set<std::uint64_t> seen;
    Rng basis_rng(mix_seed(seed));

    std::vector<Hypothesis> hypotheses;
    Accumulator acc(cfg.bin_count, cfg.kernel_bandwidth);
    double best_score = -1.0;
    for (int trial = 0; trial < cfg.max_bases; ++trial) {
        const std::optional<Basis> basis = sample_basis(cloud, grid, basis_rng, cfg, seen);
        if (!basis) break;  // budget exhausted: return what was found

        NullSpaceSolution ns;
        try {
            std::array<OrientedPoint, 3> pts{cloud.points[basis->indices[0]],
                                             cloud.points[basis->indices[1]],
                                             cloud.points[basis->indices[2]]};
            ns = nullspace_3pt(pts, cfg.weight);
        } catch (const DegenerateBasis&) {
            continue;
        }

        // per-trial sub-stream keeps earlier trials identical when the budget grows
        Rng vote_rng(mix_seed(seed ^ mix_seed(static_cast<std::uint64_t>(trial) + 1)));
        std::optional<Hypothesis> h = vote_basis(cloud, cfg, ns, *basis, vote_rng, cp, acc);
        if (h) {
            if (dump && h->score > best_score) {
                best_score = h->score;
                dump->accumulator = acc;
                dump->valid = true;
            }
            hypotheses.push_back(std::move(*h));
        }
    }
    return hypotheses;
}

std::vector<Hypothesis> detect_spheres(const SceneCloud& cloud, const DetectionConfig& cfg,
                                       std::uint64_t seed, AccumulatorSnapshot* dump) {
    if (!cloud.has_normals) throw Error("detect_spheres: cloud has no normals");
    const ClusterParams cp = cluster_params_from(cfg);
    const int n = static_cast<int>(cloud.points.size());
    std::unordered_set<std::uint64_t> seen;
    Rng basis_rng(mix_seed(seed));

    std::vector<Hypothesis> hypotheses;
    Accumulator acc(cfg.bin_count, cfg.kernel_bandwidth);
    double best_score = -1.0;
    for (int trial = 0; trial < cfg.max_bases; ++trial) {
        int idx = -1;
        for (int attempt = 0; attempt < 100; ++attempt) {
            const int cand = static_cast<int>(basis_rng.below(n));
            if (!seen.contains(static_cast<std::uint64_t>(cand))) {
                idx = cand;
                break;
            }
        }
        if (idx < 0) break;
        seen.insert(static_cast<std::uint64_t>(idx));

        NullSpaceSolution ns;
        try {
            ns = nullspace_sphere(cloud.points[idx]);
        } catch (const DegenerateBasis&) {
            continue;
        }

        Basis basis;
        basis.indices = {idx, -1, -1};
        basis.size = 1;
        basis.hash_key = static_cast<std::uint64_t>(idx);

        Rng vote_rng(mix_seed(seed ^ mix_seed(static_cast<std::uint64_t>(trial) + 1)));
        std::optional<Hypothesis> h = vote_basis(cloud, cfg, ns, basis, vote_rng, cp, acc);
        if (h && classify(h->quadric) == QuadricClass::sphere) {
            if (dump && h->score > best_score) {
                best_score = h->score;
                dump->accumulator = acc;
                dump->valid = true;
            }
            hypotheses.push_back(std::move(*h));
        }
    }
    return hypotheses;
}

std::vector<Hypothesis> detect_planes(const SceneCloud& cloud, const DetectionConfig& cfg,
                                      std::uint64_t seed) {
    if (!cloud.has_normals) throw Error("detect_planes: cloud has no normals");
    const int n = static_cast<int>(cloud.points.size());
    Rng rng(mix_seed(seed));
    std::unordered_set<std::uint64_t> seen;

    std::vector<Hypothesis> hypotheses;
    const int trials = std::min(cfg.max_bases, n);
    for (int trial = 0; trial < trials; ++trial) {
        const int idx = static_cast<int>(rng.below(n));
        if (seen.contains(static_cast<std::uint64_t>(idx))) continue;
        seen.insert(static_cast<std::uint64_t>(idx));

        const Plane pl = fit_plane_1pt(cloud.points[idx]);
        int inliers = 0;
        for (const OrientedPoint& p : cloud.points) {
            if (std::abs(pl.distance(p.position)) >= cfg.tau) continue;
            if (p.normal.dot(pl.normal()) > cfg.tau_n) ++inliers;
        }
        const double frac = static_cast<double>(inliers) / n;
        if (inliers < std::max(5.0, cfg.min_peak_fraction * n)) continue;

        Hypothesis h;
        h.quadric = plane_quadric(pl);
        h.score = frac;  // plane metric; the generic gradient score is degenerate here
        h.inlier_count = inliers;
        h.basis.indices = {idx, -1, -1};
        h.basis.size = 1;
        h.basis.hash_key = static_cast<std::uint64_t>(idx);
        h.peak_mass = static_cast<double>(inliers);
        hypotheses.push_back(std::move(h));
    }
    return hypotheses;
}

std::vector<Hypothesis> detect_4pt_reference(const SceneCloud& cloud, const DetectionConfig& cfg,
                                             std::uint64_t seed, int trials) {
    if (!cloud.has_normals) throw Error("detect_4pt_reference: cloud has no normals");
    const ClusterParams cp = cluster_params_from(cfg);
    const int n = static_cast<int>(cloud.points.size());
    Rng rng(mix_seed(seed));

    std::vector<Hypothesis> hypotheses;
    std::array<OrientedPoint, 4> pts;
    for (int trial = 0; trial < trials; ++trial) {
        std::array<int, 4> idx{};
        bool distinct = true;
        for (int k = 0; k < 4; ++k) {
            idx[k] = static_cast<int>(rng.below(n));
            for (int j = 0; j < k; ++j) distinct &= idx[j] != idx[k];
        }
        if (!distinct) continue;
        for (int k = 0; k < 4; ++k) pts[k] = cloud.points[idx[k]];

        Quadric q;
        try {
            q = fit_minimal_4pt(pts, cfg.weight).quadric;
        } catch (const RankDeficient&) {
            continue;
        } catch (const Error&) {
            continue;
        }

        const Score sc = score(q, cloud, cp);  // full verification, every trial
        if (sc.inlier_count < std::max(5.0, cfg.min_peak_fraction * n)) continue;

        Hypothesis h;
        h.quadric = q;
        h.score = sc.score;
        h.inlier_count = sc.inlier_count;
        h.basis.indices = {idx[0], idx[1], idx[2]};
        h.basis.size = 3;
        h.basis.hash_key = triplet_key(idx[0], idx[1], idx[2]);
        h.peak_mass = static_cast<double>(sc.inlier_count);
        hypotheses.push_back(std::move(h));
    }
    return hypotheses;
}

}  // namespace quadrics
