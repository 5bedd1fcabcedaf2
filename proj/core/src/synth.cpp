#include "quadrics/synth.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>

#include "quadrics/fitting.hpp"
#include "quadrics/rng.hpp"
#include "quadrics/voting.hpp"

namespace quadrics {

namespace {

Mat3 random_rotation(Rng& rng) {
    // uniform quaternion
    const double u1 = rng.uniform(), u2 = rng.uniform(), u3 = rng.uniform();
    const double a = std::sqrt(1 - u1), b = std::sqrt(u1);
    Eigen::Quaterniond q(a * std::sin(2 * M_PI * u2), a * std::cos(2 * M_PI * u2),
                         b * std::sin(2 * M_PI * u3), b * std::cos(2 * M_PI * u3));
    return q.normalized().toRotationMatrix();
}

// canonical-frame coefficient vector for each class
Vec10 canonical_form(QuadricClass cls, Rng& rng) {
    Vec10 q = Vec10::Zero();
    auto inv2 = [&](double lo, double hi) {
        const double a = rng.uniform(lo, hi);
        return 1.0 / (a * a);
    };
    switch (cls) {
        case QuadricClass::sphere: {
            const double r = rng.uniform(0.25, 0.8);
            q(0) = q(1) = q(2) = 1;
            q(9) = -r * r;
            break;
        }
        case QuadricClass::ellipsoid:
            q(0) = inv2(0.3, 0.9);
            q(1) = inv2(0.3, 0.9);
            q(2) = inv2(0.3, 0.9);
            q(9) = -1;
            break;
        case QuadricClass::hyperboloid_one_sheet:
            q(0) = inv2(0.35, 0.7);
            q(1) = inv2(0.35, 0.7);
            q(2) = -inv2(0.4, 1.0);
            q(9) = -1;
            break;
        case QuadricClass::hyperboloid_two_sheets:
            q(0) = inv2(0.25, 0.6);
            q(1) = -inv2(0.4, 1.0);
            q(2) = -inv2(0.4, 1.0);
            q(9) = 1;
            break;
        case QuadricClass::cone:
            q(0) = inv2(0.5, 1.0);
            q(1) = inv2(0.5, 1.0);
            q(2) = -inv2(0.5, 1.0);
            break;
        case QuadricClass::elliptic_paraboloid:
            q(0) = inv2(0.5, 1.2);
            q(1) = inv2(0.5, 1.2);
            q(8) = -1;  // -2z
            break;
        case QuadricClass::hyperbolic_paraboloid:
            q(0) = inv2(0.5, 1.2);
            q(1) = -inv2(0.5, 1.2);
            q(8) = -1;
            break;
        case QuadricClass::elliptic_cylinder:
            q(0) = inv2(0.3, 0.8);
            q(1) = inv2(0.3, 0.8);
            q(9) = -1;
            break;
        case QuadricClass::hyperbolic_cylinder:
            q(0) = inv2(0.35, 0.8);
            q(1) = -inv2(0.4, 1.0);
            q(9) = -1;
            break;
        case QuadricClass::parabolic_cylinder:
            q(0) = inv2(0.5, 1.2);
            q(7) = -1;  // -2y
            break;
        case QuadricClass::plane_pair:
            q(0) = 1;
            q(9) = -rng.uniform(0.2, 0.5);
            break;
        case QuadricClass::plane: {
            const Plane pl(Vec3(0, 0, 1), -rng.uniform(-0.3, 0.3));
            return plane_quadric(pl).coefficients();
        }
        default:
            q(0) = q(1) = q(2) = 1;
            q(9) = -0.5;
            break;
    }
    return q;
}

Quadric place_randomly(const Vec10& canon, Rng& rng) {
    const Mat3 rot = random_rotation(rng);
    Vec3 t = 0.25 * rng.in_unit_ball();
    // local frame x' = R^T (x - t)
    Mat4 m = Mat4::Identity();
    m.topLeftCorner<3, 3>() = rot.transpose();
    m.topRightCorner<3, 1>() = -rot.transpose() * t;
    const Quadric local = Quadric::from_coefficients(canon);
    return Quadric::from_matrix(m.transpose() * local.matrix() * m);
}

// surface must be reachable from unit-ball seeds: count successful in-ball projections
int probe_surface(const Quadric& q, Rng& rng, int probes = 128) {
    int hits = 0;
    for (int i = 0; i < probes; ++i) {
        const ProjectionResult r = project_to_surface(q, rng.in_unit_ball());
        if (r.converged && r.point.norm() <= 1.0) ++hits;
    }
    return hits;
}

const QuadricClass kGenericMenu[] = {
    QuadricClass::sphere,          QuadricClass::ellipsoid,
    QuadricClass::ellipsoid,       QuadricClass::hyperboloid_one_sheet,
    QuadricClass::hyperboloid_two_sheets, QuadricClass::cone,
    QuadricClass::elliptic_cylinder, QuadricClass::elliptic_cylinder,
    QuadricClass::parabolic_cylinder, QuadricClass::hyperbolic_cylinder,
    QuadricClass::elliptic_paraboloid, QuadricClass::elliptic_paraboloid,
    QuadricClass::hyperbolic_paraboloid};

}  // namespace

Quadric random_quadric(std::uint64_t seed, std::optional<QuadricClass> filter) {
    Rng rng(mix_seed(seed ^ 0xabcdef12345ull));
    for (int attempt = 0; attempt < 1000; ++attempt) {
        const QuadricClass cls =
            filter ? *filter : kGenericMenu[rng.below(std::size(kGenericMenu))];
        const Quadric q = place_randomly(canonical_form(cls, rng), rng);
        if (filter && classify(q) != *filter) continue;
        if (probe_surface(q, rng) >= 13) return q;
    }
    throw GenerationTimeout("random_quadric: could not satisfy the class filter");
}

std::vector<OrientedPoint> sample_surface(const Quadric& q, int count, std::uint64_t seed) {
    Rng rng(mix_seed(seed ^ 0x5a5a5a5aull));
    std::vector<OrientedPoint> out;
    out.reserve(count);
    const long max_attempts = 100L * count;
    for (long attempt = 0; attempt < max_attempts && static_cast<int>(out.size()) < count;
         ++attempt) {
        const ProjectionResult r = project_to_surface(q, rng.in_unit_ball(), 80, 1e-11);
        if (!r.converged || r.point.norm() > 1.0) continue;
        const Vec3 g = q.gradient_at(r.point);
        const double gn = g.norm();
        if (gn < 1e-9) continue;
        out.push_back({r.point, g / gn});
    }
    if (static_cast<int>(out.size()) < count)
        throw SurfaceNotFound("sample_surface: surface does not intersect the unit ball densely enough");
    return out;
}

SyntheticScene make_scene(std::span<const Quadric> surfaces, int points_per_surface,
                          std::uint64_t seed) {
    SyntheticScene scene;
    scene.cloud.has_normals = true;  // identity normalization: already unit-ball data
    for (std::size_t s = 0; s < surfaces.size(); ++s) {
        const auto pts = sample_surface(surfaces[s], points_per_surface, mix_seed(seed + s));
        Vec3 lo = pts.front().position, hi = lo;
        for (const auto& p : pts) {
            scene.cloud.points.push_back(p);
            scene.membership.push_back(static_cast<int>(s));
            lo = lo.cwiseMin(p.position);
            hi = hi.cwiseMax(p.position);
        }
        scene.ground_truth.push_back(surfaces[s]);
        scene.surface_size.push_back((hi - lo).norm());
    }
    return scene;
}

SyntheticScene corrupt(const SyntheticScene& scene, double sigma, double clutter_fraction,
                       std::uint64_t seed) {
    Rng rng(mix_seed(seed ^ 0xc0ffeeull));
    SyntheticScene out = scene;
    out.noise_sigma = sigma;

    if (sigma > 0) {
        for (std::size_t i = 0; i < out.cloud.points.size(); ++i) {
            const int m = out.membership[i];
            if (m < 0) continue;
            out.cloud.points[i].position += sigma * out.surface_size[m] * rng.normal3();
        }
    }

    if (clutter_fraction > 0) {
        int members = 0;
        for (int m : out.membership)
            if (m >= 0) ++members;
        const int clutter =
            static_cast<int>(std::llround(members * clutter_fraction / (1.0 - clutter_fraction)));
        for (int i = 0; i < clutter; ++i) {
            out.cloud.points.push_back({rng.in_unit_ball(), rng.unit_vector()});
            out.membership.push_back(-1);
        }
    }
    return out;
}

std::pair<double, double> evaluate_fit(const Quadric& estimated, const Quadric& truth,
                                       std::span<const OrientedPoint> truth_points) {
    std::vector<Vec3> positions;
    positions.reserve(truth_points.size());
    for (const auto& p : truth_points) positions.push_back(p.position);
    const double point_err = quadric_distance_samples(estimated, positions);

    double angle_sum = 0;
    int counted = 0;
    for (const auto& p : truth_points) {
        const Vec3 g = estimated.gradient_at(p.position);
        const double gn = g.norm();
        if (gn < 1e-12) continue;
        angle_sum += 1.0 - p.normal.dot(g / gn);
        ++counted;
    }
    (void)truth;
    return {point_err, counted > 0 ? angle_sum / counted : 2.0};
}

namespace {

// well-separated subset draw for the minimal fit
std::optional<std::array<OrientedPoint, 4>> draw_minimal_subset(
    const std::vector<OrientedPoint>& pts, Rng& rng) {
    const int n = static_cast<int>(pts.size());
    for (int attempt = 0; attempt < 50; ++attempt) {
        std::array<int, 4> idx{};
        bool ok = true;
        for (int k = 0; k < 4 && ok; ++k) {
            idx[k] = static_cast<int>(rng.below(n));
            for (int j = 0; j < k; ++j)
                ok &= (pts[idx[k]].position - pts[idx[j]].position).norm() > 0.1;
        }
        if (!ok) continue;
        return std::array<OrientedPoint, 4>{pts[idx[0]], pts[idx[1]], pts[idx[2]], pts[idx[3]]};
    }
    return std::nullopt;
}

}  // namespace

std::vector<SweepRow> run_fitting_sweep(const SweepConfig& cfg) {
    using clock = std::chrono::steady_clock;
    std::vector<SweepRow> rows;

    for (double sigma : cfg.noise_levels) {
        for (int iq = 0; iq < cfg.quadrics_per_level; ++iq) {
            const std::uint64_t qseed = mix_seed(cfg.seed + 1000 * iq + 7);
            const Quadric truth = random_quadric(qseed);
            const auto clean = sample_surface(truth, cfg.points_per_scene, qseed + 1);

            for (int fit = 0; fit < cfg.fits_per_set; ++fit) {
                Rng rng(mix_seed(qseed ^ mix_seed(fit + static_cast<int>(sigma * 1000) * 131)));
                // per-fit noisy copy
                std::vector<OrientedPoint> noisy = clean;
                if (sigma > 0) {
                    Vec3 lo = clean.front().position, hi = lo;
                    for (const auto& p : clean) {
                        lo = lo.cwiseMin(p.position);
                        hi = hi.cwiseMax(p.position);
                    }
                    const double size = (hi - lo).norm();
                    for (auto& p : noisy) p.position += sigma * size * rng.normal3();
                }

                // minimal 4-point fit
                {
                    const auto t0 = clock::now();
                    double perr = std::numeric_limits<double>::quiet_NaN();
                    double aerr = std::numeric_limits<double>::quiet_NaN();
                    if (auto subset = draw_minimal_subset(noisy, rng)) {
                        try {
                            const FitResult r = fit_minimal_4pt(*subset);
                            std::tie(perr, aerr) = evaluate_fit(r.quadric, truth, clean);
                        } catch (const RankDeficient&) {
                        }
                    }
                    const auto t1 = clock::now();
                    rows.push_back({sigma, qseed, "minimal4", fit, perr, aerr,
                                    cfg.record_timings
                                        ? std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count()
                                        : 0});
                }
                // dense fit on all points
                {
                    const auto t0 = clock::now();
                    const FitResult r = fit_least_squares(noisy);
                    const auto [perr, aerr] = evaluate_fit(r.quadric, truth, clean);
                    const auto t1 = clock::now();
                    rows.push_back({sigma, qseed, "least_squares", fit, perr, aerr,
                                    cfg.record_timings
                                        ? std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count()
                                        : 0});
                }
            }
        }
    }
    return rows;
}

void write_sweep_csv(std::span<const SweepRow> rows, std::ostream& out) {
    out << "noise_sigma,quadric_seed,method,fit_index,point_err,angle_err,runtime_ns\n";
    char buf[256];
    for (const SweepRow& r : rows) {
        std::snprintf(buf, sizeof(buf), "%.17g,%llu,%s,%d,%.17g,%.17g,%lld\n", r.noise_sigma,
                      static_cast<unsigned long long>(r.quadric_seed), r.method.c_str(),
                      r.fit_index, r.point_err, r.angle_err, r.runtime_ns);
        out << buf;
    }
}

LambdaBench bench_lambda(int trials, std::uint64_t seed) {
    using clock = std::chrono::steady_clock;
    if (trials < 1) throw Error("bench_lambda: trials must be >= 1");

    struct Case {
        NullSpaceSolution ns;
        OrientedPoint x4;
        Eigen::MatrixXd stacked;  // 16x10
        Eigen::VectorXd rhs;      // 16
    };
    std::vector<Case> cases;
    cases.reserve(trials);
    Rng rng(mix_seed(seed));
    int made = 0;
    for (std::uint64_t qi = 0; made < trials; ++qi) {
        const Quadric q = random_quadric(mix_seed(seed + 17 * qi + 3));
        std::vector<OrientedPoint> pts;
        try {
            pts = sample_surface(q, 8, mix_seed(seed + qi));
        } catch (const SurfaceNotFound&) {
            continue;
        }
        for (int rep = 0; rep < 4 && made < trials; ++rep) {
            // distinct indices: a candidate that coincides with a basis point carries
            // no constraint along the family
            std::array<int, 4> idx{};
            for (int k = 0; k < 4; ++k) {
                bool fresh = false;
                while (!fresh) {
                    idx[k] = static_cast<int>(rng.below(8));
                    fresh = true;
                    for (int j = 0; j < k; ++j) fresh &= idx[j] != idx[k];
                }
            }
            const std::array<OrientedPoint, 3> basis{pts[idx[0]], pts[idx[1]], pts[idx[2]]};
            try {
                Case c;
                c.ns = nullspace_3pt(basis, 1.0);
                c.x4 = pts[idx[3]];
                std::array<OrientedPoint, 4> all{basis[0], basis[1], basis[2], c.x4};
                const ConstraintSystem sys = build_system(all, 1.0);
                c.stacked = sys.rows;
                c.rhs = sys.rhs;
                cases.push_back(std::move(c));
                ++made;
            } catch (const DegenerateBasis&) {
            }
        }
    }

    std::vector<double> fast_ns(cases.size()), resolve_ns(cases.size());
    double max_mismatch = 0;
    volatile double sink = 0;
    for (std::size_t i = 0; i < cases.size(); ++i) {
        const Case& c = cases[i];
        const auto t0 = clock::now();
        double lam_fast = 0;
        constexpr int kReps = 16;  // amortize the clock granularity
        for (int r = 0; r < kReps; ++r)
            lam_fast = lambda_for_point(c.ns, c.x4, 1.0).value_or(0.0);
        const auto t1 = clock::now();

        double lam_resolve = 0;
        const auto t2 = clock::now();
        {
            // re-solve of the stacked system from scratch (the path the closed form avoids),
            // then the family coordinate from the same stacked constraints
            Eigen::JacobiSVD<Eigen::MatrixXd> svd(c.stacked,
                                                  Eigen::ComputeThinU | Eigen::ComputeThinV);
            const Vec10 qsol = svd.solve(c.rhs);
            sink = sink + qsol.sum();
            const Eigen::VectorXd m = c.stacked * c.ns.basis.col(0);
            lam_resolve = m.dot(c.rhs - c.stacked * c.ns.particular) / m.squaredNorm();
        }
        const auto t3 = clock::now();

        sink = sink + lam_fast + lam_resolve;
        fast_ns[i] =
            std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count() / double(kReps);
        resolve_ns[i] = std::chrono::duration_cast<std::chrono::nanoseconds>(t3 - t2).count();
        max_mismatch = std::max(max_mismatch,
                                std::abs(lam_fast - lam_resolve) / (1.0 + std::abs(lam_resolve)));
    }
    (void)sink;

    auto median = [](std::vector<double> v) {
        std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
        return v[v.size() / 2];
    };
    return {median(fast_ns), median(resolve_ns), max_mismatch};
}

}  // namespace quadrics
