#include "quadrics/clustering.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdint>
#include <numeric>

namespace quadrics {

namespace {

Mat4 pseudo_inverse(const Mat4& m) {
    Eigen::SelfAdjointEigenSolver<Mat4> es(m);
    const Vec4 l = es.eigenvalues();
    const double lmax = l.cwiseAbs().maxCoeff();
    Vec4 inv = Vec4::Zero();
    for (int i = 0; i < 4; ++i)
        if (lmax > 0 && std::abs(l(i)) > 1e-12 * lmax) inv(i) = 1.0 / l(i);
    return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

double frobenius_term(const Mat4& m1, const Mat4& m2) {
    return (m1 * pseudo_inverse(m2) - Mat4::Identity()).norm();
}

// Fused evaluator: for a symmetric 4x4 M and u = [x;1], value = u.(Mu) and
// gradient = 2*(Mu).head<3>() come out of one matrix-vector product.
struct QuadricEval {
    Mat4 m;
    explicit QuadricEval(const Quadric& q) : m(q.matrix()) {}

    // true iff |value| < tau and the normalized gradient agrees with n beyond tau_n
    bool supports(const OrientedPoint& p, double tau, double tau_n) const {
        const Vec4 u(p.position.x(), p.position.y(), p.position.z(), 1.0);
        const Vec4 mu = m * u;
        if (std::abs(u.dot(mu)) >= tau) return false;
        const Vec3 g = mu.head<3>();  // direction of the gradient (factor 2 cancels)
        const double gn = g.norm();
        if (gn < 0.5e-12) return false;
        return g.dot(p.normal) > tau_n * gn;
    }
};

// disjoint-set
struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    }
    void unite(int a, int b) { parent[find(a)] = find(b); }
};

// deterministic tie-break for representative selection: higher score wins,
// then lexicographically smaller canonical coefficients
bool better_representative(const Hypothesis& a, const Hypothesis& b) {
    if (a.score != b.score) return a.score > b.score;
    const Vec10 &qa = a.quadric.coefficients(), &qb = b.quadric.coefficients();
    for (int i = 0; i < 10; ++i)
        if (qa(i) != qb(i)) return qa(i) < qb(i);
    return false;
}

std::vector<int> subsample_indices(int scene_size, int k_sub) {
    const int k = std::min(k_sub, scene_size);
    std::vector<int> idx(k);
    for (int i = 0; i < k; ++i)
        idx[i] = static_cast<int>((static_cast<long>(i) * scene_size) / k);
    return idx;
}

}  // namespace

double d_close(const Quadric& q1, const Quadric& q2, const ClusterParams& params) {
    const Mat4 m1 = q1.matrix();
    double best = std::numeric_limits<double>::infinity();
    for (const double s : {1.0, -1.0}) {
        const Vec10 qs = s * q2.coefficients();
        if ((q1.coefficients() - qs).lpNorm<1>() < params.tau_coeff)
            best = std::min(best, frobenius_term(m1, s * q2.matrix()));
    }
    return best;
}

double d_far(const Quadric& q1, const Quadric& q2, const SceneCloud& scene,
             const ClusterParams& params) {
    if (!scene.has_normals) throw Error("d_far: scene has no normals");
    const std::vector<int> idx = subsample_indices(static_cast<int>(scene.points.size()),
                                                   params.k_sub);
    if (idx.empty()) return 1.0;
    const QuadricEval e1(q1), e2(q2);
    int joint = 0;
    for (int i : idx) {
        const OrientedPoint& p = scene.points[i];
        if (e1.supports(p, params.tau, params.tau_n) && e2.supports(p, params.tau, params.tau_n))
            ++joint;
    }
    return 1.0 - static_cast<double>(joint) / static_cast<double>(idx.size());
}

Score score(const Quadric& q, const SceneCloud& scene, const ClusterParams& params) {
    if (!scene.has_normals) throw Error("score: scene has no normals");
    const QuadricEval eval(q);
    int inliers = 0;
    for (const OrientedPoint& p : scene.points)
        if (eval.supports(p, params.tau, params.tau_n)) ++inliers;
    return {static_cast<double>(inliers) / static_cast<double>(scene.points.size()), inliers};
}

std::vector<Hypothesis> aggregate(std::vector<Hypothesis> hypotheses, const SceneCloud& scene,
                                  const ClusterParams& params) {
    const int n = static_cast<int>(hypotheses.size());
    if (n == 0) return {};

    // stage 1: single linkage on the fast coefficient distance, with the
    // pseudoinverses cached per hypothesis (pinv(-M) = -pinv(M))
    std::vector<Mat4> mats(n), pinvs(n);
    for (int i = 0; i < n; ++i) {
        mats[i] = hypotheses[i].quadric.matrix();
        pinvs[i] = pseudo_inverse(mats[i]);
    }
    UnionFind uf1(n);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (uf1.find(i) == uf1.find(j)) continue;
            const Vec10 &qi = hypotheses[i].quadric.coefficients(),
                        &qj = hypotheses[j].quadric.coefficients();
            double best = std::numeric_limits<double>::infinity();
            for (const double s : {1.0, -1.0}) {
                if ((qi - s * qj).lpNorm<1>() < params.tau_coeff)
                    best = std::min(best, (mats[i] * (s * pinvs[j]) - Mat4::Identity()).norm());
            }
            if (best < params.tau_frob) uf1.unite(i, j);
        }
    }

    std::vector<int> rep_of_root(n, -1);
    for (int i = 0; i < n; ++i) {
        const int r = uf1.find(i);
        if (rep_of_root[r] < 0 || better_representative(hypotheses[i], hypotheses[rep_of_root[r]]))
            rep_of_root[r] = i;
    }
    std::vector<int> reps;
    for (int r = 0; r < n; ++r)
        if (rep_of_root[r] >= 0 && uf1.find(r) == r) reps.push_back(rep_of_root[r]);

    // stage 2: single linkage on the pseudo-geometric distance between representatives.
    // The indicator product factorizes per quadric, so each representative's support
    // over the deterministic subsample is precomputed as a bitmask and a pair's
    // distance is 1 - popcount(and)/K, identical to d_far evaluated pairwise.
    const int m = static_cast<int>(reps.size());
    const std::vector<int> sub = subsample_indices(static_cast<int>(scene.points.size()),
                                                   params.k_sub);
    const int k = static_cast<int>(sub.size());
    const int words = (k + 63) / 64;
    std::vector<std::uint64_t> support(static_cast<std::size_t>(m) * words, 0);
    for (int i = 0; i < m; ++i) {
        const QuadricEval eval(hypotheses[reps[i]].quadric);
        for (int b = 0; b < k; ++b) {
            if (eval.supports(scene.points[sub[b]], params.tau, params.tau_n))
                support[static_cast<std::size_t>(i) * words + b / 64] |= 1ull << (b % 64);
        }
    }
    UnionFind uf2(m);
    for (int i = 0; i < m; ++i) {
        for (int j = i + 1; j < m; ++j) {
            if (uf2.find(i) == uf2.find(j)) continue;
            int joint = 0;
            for (int w = 0; w < words; ++w)
                joint += __builtin_popcountll(support[static_cast<std::size_t>(i) * words + w] &
                                              support[static_cast<std::size_t>(j) * words + w]);
            const double d = k > 0 ? 1.0 - static_cast<double>(joint) / k : 1.0;
            if (d < params.tau_geom) uf2.unite(i, j);
        }
    }

    std::vector<int> final_rep(m, -1);
    for (int i = 0; i < m; ++i) {
        const int r = uf2.find(i);
        if (final_rep[r] < 0 ||
            better_representative(hypotheses[reps[i]], hypotheses[reps[final_rep[r]]]))
            final_rep[r] = i;
    }

    std::vector<Hypothesis> out;
    for (int r = 0; r < m; ++r) {
        if (final_rep[r] < 0 || uf2.find(r) != r) continue;
        Hypothesis h = hypotheses[reps[final_rep[r]]];
        const Score s = score(h.quadric, scene, params);
        h.score = s.score;
        h.inlier_count = s.inlier_count;
        out.push_back(std::move(h));
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const Hypothesis& a, const Hypothesis& b) { return better_representative(a, b); });
    return out;
}

}  // namespace quadrics
