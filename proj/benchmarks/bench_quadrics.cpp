#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include "quadrics/clustering.hpp"
#include "quadrics/detection.hpp"
#include "quadrics/fitting.hpp"
#include "quadrics/synth.hpp"
#include "quadrics/voting.hpp"

using namespace quadrics;

namespace {

struct LambdaFixture {
    NullSpaceSolution ns;
    OrientedPoint x4;
    ConstraintSystem stacked;

    LambdaFixture() {
        const Quadric q = random_quadric(7);
        const auto pts = sample_surface(q, 8, 7);
        const std::array<OrientedPoint, 3> basis{pts[0], pts[2], pts[4]};
        ns = nullspace_3pt(basis);
        x4 = pts[6];
        const std::array<OrientedPoint, 4> all{pts[0], pts[2], pts[4], pts[6]};
        stacked = build_system(all, 1.0);
    }
};

const LambdaFixture& fixture() {
    static LambdaFixture f;
    return f;
}

SceneCloud benchmark_scene(int members, int clutter) {
    const Quadric truth = random_quadric(11);
    SyntheticScene s = make_scene(std::vector<Quadric>{truth}, members, 11);
    s = corrupt(s, 0.0, static_cast<double>(clutter) / (members + clutter), 12);
    return s.cloud;
}

}  // namespace

static void BM_LambdaClosedForm(benchmark::State& state) {
    const auto& f = fixture();
    for (auto _ : state) {
        auto lam = lambda_for_point(f.ns, f.x4, 1.0);
        benchmark::DoNotOptimize(lam);
    }
}
BENCHMARK(BM_LambdaClosedForm);

static void BM_LambdaValueRow(benchmark::State& state) {
    const auto& f = fixture();
    for (auto _ : state) {
        auto lam = lambda_value_row(f.ns, f.x4.position);
        benchmark::DoNotOptimize(lam);
    }
}
BENCHMARK(BM_LambdaValueRow);

static void BM_LambdaFullResolve(benchmark::State& state) {
    const auto& f = fixture();
    for (auto _ : state) {
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(f.stacked.rows,
                                              Eigen::ComputeThinU | Eigen::ComputeThinV);
        const Vec10 q = svd.solve(f.stacked.rhs);
        benchmark::DoNotOptimize(q);
    }
}
BENCHMARK(BM_LambdaFullResolve);

static void BM_Nullspace3pt(benchmark::State& state) {
    const Quadric q = random_quadric(9);
    const auto pts = sample_surface(q, 3, 9);
    const std::array<OrientedPoint, 3> basis{pts[0], pts[1], pts[2]};
    for (auto _ : state) {
        const NullSpaceSolution ns = nullspace_3pt(basis);
        benchmark::DoNotOptimize(ns.particular);
    }
}
BENCHMARK(BM_Nullspace3pt);

static void BM_FitMinimal4pt(benchmark::State& state) {
    const Quadric q = random_quadric(10);
    const auto pts = sample_surface(q, 4, 10);
    const std::array<OrientedPoint, 4> four{pts[0], pts[1], pts[2], pts[3]};
    for (auto _ : state) {
        try {
            const FitResult r = fit_minimal_4pt(four);
            benchmark::DoNotOptimize(r.quadric);
        } catch (const RankDeficient&) {
        }
    }
}
BENCHMARK(BM_FitMinimal4pt);

static void BM_FitLeastSquares(benchmark::State& state) {
    const Quadric q = random_quadric(13);
    const auto pts = sample_surface(q, static_cast<int>(state.range(0)), 13);
    for (auto _ : state) {
        const FitResult r = fit_least_squares(pts);
        benchmark::DoNotOptimize(r.quadric);
    }
}
BENCHMARK(BM_FitLeastSquares)->Arg(16)->Arg(64)->Arg(256);

static void BM_Score(benchmark::State& state) {
    const SceneCloud cloud = benchmark_scene(4000, 4000);
    const Quadric q = random_quadric(11);
    const ClusterParams params;
    for (auto _ : state) {
        const Score s = score(q, cloud, params);
        benchmark::DoNotOptimize(s.inlier_count);
    }
}
BENCHMARK(BM_Score);

static void BM_DetectClutteredScene(benchmark::State& state) {
    const SceneCloud cloud = benchmark_scene(4000, 4000);
    DetectionConfig cfg;
    cfg.max_bases = static_cast<int>(state.range(0));
    for (auto _ : state) {
        const auto hyps = detect(cloud, cfg, 42);
        benchmark::DoNotOptimize(hyps.size());
    }
}
BENCHMARK(BM_DetectClutteredScene)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

static void BM_DetectSpheres(benchmark::State& state) {
    const Quadric truth = random_quadric(21, QuadricClass::sphere);
    SyntheticScene s = make_scene(std::vector<Quadric>{truth}, 2000, 21);
    s = corrupt(s, 0.0, 0.5, 22);
    DetectionConfig cfg;
    cfg.mode = DetectionMode::sphere;
    for (auto _ : state) {
        const auto hyps = detect_spheres(s.cloud, cfg, 42);
        benchmark::DoNotOptimize(hyps.size());
    }
}
BENCHMARK(BM_DetectSpheres)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
