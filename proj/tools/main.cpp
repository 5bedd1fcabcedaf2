#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "quadrics/clustering.hpp"
#include "quadrics/cloud_io.hpp"
#include "quadrics/detection.hpp"
#include "quadrics/fitting.hpp"
#include "quadrics/report.hpp"
#include "quadrics/rng.hpp"
#include "quadrics/synth.hpp"

namespace q = quadrics;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitIo = 2;
constexpr int kExitNothingFound = 3;

struct Timer {
    std::chrono::steady_clock::time_point t = std::chrono::steady_clock::now();
    double lap_ms() {
        const auto now = std::chrono::steady_clock::now();
        const double ms = std::chrono::duration<double, std::milli>(now - t).count();
        t = now;
        return ms;
    }
};

void add_config_flags(CLI::App* cmd, q::DetectionConfig& cfg, std::string& mode) {
    cmd->add_option("--mode", mode, "Detection mode: generic|sphere|plane")
        ->default_val("generic")
        ->check(CLI::IsMember({"generic", "sphere", "plane"}));
    cmd->add_option("--tau-s", cfg.tau_s, "Voxel sampling rate (fraction of scene diameter)")
        ->capture_default_str();
    cmd->add_option("--knn", cfg.knn, "Neighborhood size for normal estimation")
        ->capture_default_str();
    cmd->add_option("--neighbor-radius-factor", cfg.neighbor_radius_factor,
                    "Companion radius factor (radius = factor * 0.5 in unit-ball units)")
        ->capture_default_str();
    cmd->add_option("--max-bases", cfg.max_bases, "RANSAC basis budget")->capture_default_str();
    cmd->add_option("--samples-per-basis", cfg.samples_per_basis,
                    "Candidate points voted per basis")
        ->capture_default_str();
    cmd->add_option("--tau", cfg.tau, "Algebraic inlier threshold (unit-ball frame)")
        ->capture_default_str();
    cmd->add_option("--tau-n", cfg.tau_n, "Normal agreement threshold")->capture_default_str();
    cmd->add_option("--weight", cfg.weight, "Gradient-row weight")->capture_default_str();
    cmd->add_option("--bin-count", cfg.bin_count, "Accumulator bins")->capture_default_str();
    cmd->add_option("--kernel-bandwidth", cfg.kernel_bandwidth, "KDE bandwidth in bins")
        ->capture_default_str();
    cmd->add_option("--lambda-scale", cfg.lambda_scale, "Quantizer scale c in atan(lambda/c)")
        ->capture_default_str();
    cmd->add_flag("--no-plane-removal", "Skip the dominant-plane preprocessing");
    cmd->add_option("--min-plane-fraction", cfg.min_plane_fraction,
                    "Inlier fraction for a plane to be removed")
        ->capture_default_str();
}

int run_detect(const std::string& input, q::DetectionConfig cfg, std::uint64_t seed,
               bool seed_given, const std::string& out_path, const std::string& dump_path,
               bool timings, bool normalized_frame) {
    Timer timer;
    q::DetectionReport report;
    report.input = input;
    report.frame = normalized_frame ? "normalized" : "raw";

    if (!seed_given) seed = std::chrono::steady_clock::now().time_since_epoch().count() & 0xffffffffull;
    report.seed = seed;

    q::RawCloud raw = q::read_cloud(input);
    if (timings) report.timings.read_ms = timer.lap_ms();

    q::SceneCloud cloud = q::normalize_scene(raw.positions, raw.normals);
    if (timings) report.timings.normalize_ms = timer.lap_ms();

    cloud = q::voxel_downsample(cloud, cfg.tau_s);
    if (timings) report.timings.downsample_ms = timer.lap_ms();

    if (!cloud.has_normals) {
        cloud = q::estimate_normals(cloud, cfg.knn, cfg.viewpoint);
        if (timings) report.timings.normals_ms = timer.lap_ms();
    }

    std::vector<q::Plane> removed;
    if (cfg.plane_removal && cfg.mode != q::DetectionMode::plane) {
        auto [pruned, planes] = q::remove_planes(cloud, cfg);
        if (pruned.points.size() >= 3) {
            cloud = std::move(pruned);
            removed = std::move(planes);
        }
        if (timings) report.timings.plane_removal_ms = timer.lap_ms();
    }
    for (const q::Plane& pl : removed) {
        // normalized-frame plane n.(x-c)/s + d = 0 becomes n.x + (s*d - n.c) = 0 in raw coords
        const q::Vec3 n = pl.normal();
        report.planes_removed.push_back(
            {n.x(), n.y(), n.z(), cloud.scale * pl.offset() - n.dot(cloud.center)});
    }

    std::vector<q::Hypothesis> hypotheses;
    q::AccumulatorSnapshot snapshot;
    q::AccumulatorSnapshot* snap = dump_path.empty() ? nullptr : &snapshot;
    switch (cfg.mode) {
        case q::DetectionMode::generic: hypotheses = q::detect(cloud, cfg, seed, snap); break;
        case q::DetectionMode::sphere: hypotheses = q::detect_spheres(cloud, cfg, seed, snap); break;
        case q::DetectionMode::plane: hypotheses = q::detect_planes(cloud, cfg, seed); break;
    }
    if (timings) report.timings.detect_ms = timer.lap_ms();

    q::ClusterParams cp;
    cp.tau = cfg.tau;
    cp.tau_n = cfg.tau_n;
    if (cfg.mode != q::DetectionMode::plane) hypotheses = q::aggregate(hypotheses, cloud, cp);
    if (timings) report.timings.cluster_ms = timer.lap_ms();

    report.config = cfg;
    for (const q::Hypothesis& h : hypotheses) {
        q::ReportQuadric rq;
        const q::Quadric out_q =
            normalized_frame ? h.quadric : q::quadric_to_raw(h.quadric, cloud);
        for (int i = 0; i < 10; ++i) rq.coefficients[i] = out_q.coefficients()(i);
        rq.class_label = q::to_string(q::classify(h.quadric));
        rq.score = h.score;
        rq.inlier_count = h.inlier_count;
        rq.peak_mass = h.peak_mass;
        report.quadrics.push_back(std::move(rq));
    }
    if (timings)
        report.timings.total_ms = report.timings.read_ms + report.timings.normalize_ms +
                                  report.timings.downsample_ms + report.timings.normals_ms +
                                  report.timings.plane_removal_ms + report.timings.detect_ms +
                                  report.timings.cluster_ms;

    if (!dump_path.empty() && snapshot.valid) {
        std::ofstream dump(dump_path);
        if (!dump) throw q::IoError("cannot open " + dump_path + " for writing");
        snapshot.accumulator.write_csv(dump);
    }

    if (out_path.empty())
        std::cout << q::report_to_string(report);
    else
        q::write_report(report, out_path);

    return report.quadrics.empty() ? kExitNothingFound : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Type-agnostic quadric surface detection in 3D point clouds"};
    app.require_subcommand(1);

    // detect
    auto* detect_cmd = app.add_subcommand("detect", "Detect quadrics in a point cloud");
    std::string detect_input, detect_mode, detect_out, dump_path;
    q::DetectionConfig cfg;
    std::uint64_t seed = 0;
    bool normalized_frame = false, timings = false;
    detect_cmd->add_option("input", detect_input, "Point cloud (.ply/.xyz/.xyzn)")->required();
    add_config_flags(detect_cmd, cfg, detect_mode);
    auto* seed_opt = detect_cmd->add_option("--seed", seed, "Random seed (echoed in the report)");
    detect_cmd->add_option("--out", detect_out, "Report path (stdout when omitted)");
    detect_cmd->add_option("--dump-accumulator", dump_path,
                           "CSV dump of the best basis's accumulator");
    detect_cmd->add_flag("--timings", timings,
                         "Measure wall times (makes the report non-reproducible)");
    detect_cmd->add_flag("--normalized-frame", normalized_frame,
                         "Report coefficients in unit-ball coordinates instead of raw");

    // fit
    auto* fit_cmd = app.add_subcommand("fit", "Fit one quadric to a whole cloud");
    std::string fit_input, fit_method = "ls";
    std::uint64_t fit_seed = 1;
    double fit_weight = 1.0;
    fit_cmd->add_option("input", fit_input, "Point cloud (.ply/.xyz/.xyzn)")->required();
    fit_cmd->add_option("--method", fit_method, "ls (all points) or minimal4")
        ->check(CLI::IsMember({"ls", "minimal4"}))
        ->capture_default_str();
    fit_cmd->add_option("--seed", fit_seed, "Seed for the minimal4 subset draw")
        ->capture_default_str();
    fit_cmd->add_option("--weight", fit_weight, "Gradient-row weight")->capture_default_str();

    // bench
    auto* bench_cmd = app.add_subcommand("bench", "Benchmark the closed-form family coordinate");
    int lambda_trials = 2000;
    bench_cmd->add_option("--lambda-trials", lambda_trials, "Number of (basis, candidate) pairs")
        ->capture_default_str();

    // sweep
    auto* sweep_cmd = app.add_subcommand("sweep", "Noise sweep of the fitting methods (CSV)");
    q::SweepConfig sweep_cfg;
    std::string sweep_out;
    sweep_cmd->add_option("--seed", sweep_cfg.seed, "Master seed")->capture_default_str();
    sweep_cmd->add_option("--out", sweep_out, "CSV path (stdout when omitted)");
    sweep_cmd->add_option("--quadrics-per-level", sweep_cfg.quadrics_per_level)
        ->capture_default_str();
    sweep_cmd->add_option("--fits-per-set", sweep_cfg.fits_per_set)->capture_default_str();
    sweep_cmd->add_option("--points", sweep_cfg.points_per_scene)->capture_default_str();
    sweep_cmd->add_flag("--timings", sweep_cfg.record_timings,
                        "Record per-fit wall times (makes the CSV non-reproducible)");

    // synth
    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic quadric scene");
    std::string synth_class, synth_out = "scene.ply";
    double synth_noise = 0.0, synth_clutter = 0.0;
    int synth_count = 2000;
    std::uint64_t synth_seed = 1;
    synth_cmd->add_option("--class", synth_class,
                          "Quadric class (sphere, ellipsoid, cone, ...); random when omitted");
    synth_cmd->add_option("--noise", synth_noise, "Gaussian noise sigma relative to surface size")
        ->capture_default_str();
    synth_cmd->add_option("--clutter", synth_clutter, "Clutter fraction in [0,1)")
        ->capture_default_str();
    synth_cmd->add_option("--count", synth_count, "Surface sample count")->capture_default_str();
    synth_cmd->add_option("--seed", synth_seed, "Seed")->capture_default_str();
    synth_cmd->add_option("--out", synth_out, "Output PLY path")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (detect_cmd->parsed()) {
            cfg.mode = detect_mode == "sphere"  ? q::DetectionMode::sphere
                       : detect_mode == "plane" ? q::DetectionMode::plane
                                                : q::DetectionMode::generic;
            if (detect_cmd->count("--no-plane-removal") > 0) cfg.plane_removal = false;
            return run_detect(detect_input, cfg, seed, seed_opt->count() > 0, detect_out,
                              dump_path, timings, normalized_frame);
        }
        if (fit_cmd->parsed()) {
            const q::RawCloud raw = q::read_cloud(fit_input);
            q::SceneCloud cloud = q::normalize_scene(raw.positions, raw.normals);
            if (!cloud.has_normals) cloud = q::estimate_normals(cloud, 16);
            q::FitResult result;
            if (fit_method == "minimal4") {
                if (cloud.points.size() < 4) throw q::TooFewPoints("need at least 4 points");
                q::Rng rng(q::mix_seed(fit_seed));
                std::array<q::OrientedPoint, 4> subset;
                for (auto& s : subset) s = cloud.points[rng.below(cloud.points.size())];
                result = q::fit_minimal_4pt(subset, fit_weight);
            } else {
                result = q::fit_least_squares(cloud.points, fit_weight);
            }
            const q::Quadric raw_q = q::quadric_to_raw(result.quadric, cloud);
            std::cout << "class: " << q::to_string(q::classify(result.quadric)) << "\n";
            std::cout << "rank: " << result.diagnostics.rank
                      << "  condition: " << result.diagnostics.condition << "\n";
            std::cout << "coefficients_raw:";
            char buf[64];
            for (int i = 0; i < 10; ++i) {
                std::snprintf(buf, sizeof(buf), " %.17g", raw_q.coefficients()(i));
                std::cout << buf;
            }
            std::cout << "\n";
            return kExitOk;
        }
        if (bench_cmd->parsed()) {
            const q::LambdaBench b = q::bench_lambda(lambda_trials);
            std::cout << "fast_ns_per_lambda: " << b.fast_ns_per_lambda << "\n";
            std::cout << "resolve_ns_per_lambda: " << b.resolve_ns_per_lambda << "\n";
            std::cout << "speedup: " << b.resolve_ns_per_lambda / b.fast_ns_per_lambda << "\n";
            std::cout << "max_relative_mismatch: " << b.max_relative_mismatch << "\n";
            return kExitOk;
        }
        if (sweep_cmd->parsed()) {
            const auto rows = q::run_fitting_sweep(sweep_cfg);
            if (sweep_out.empty()) {
                q::write_sweep_csv(rows, std::cout);
            } else {
                std::ofstream out(sweep_out, std::ios::binary);
                if (!out) throw q::IoError("cannot open " + sweep_out + " for writing");
                q::write_sweep_csv(rows, out);
            }
            return kExitOk;
        }
        if (synth_cmd->parsed()) {
            std::optional<q::QuadricClass> filter;
            if (!synth_class.empty()) {
                bool found = false;
                for (int c = 0; c <= static_cast<int>(q::QuadricClass::degenerate); ++c) {
                    if (synth_class == q::to_string(static_cast<q::QuadricClass>(c))) {
                        filter = static_cast<q::QuadricClass>(c);
                        found = true;
                        break;
                    }
                }
                if (!found) {
                    std::cerr << "unknown quadric class: " << synth_class << "\n";
                    return kExitUsage;
                }
            }
            const q::Quadric truth = q::random_quadric(synth_seed, filter);
            q::SyntheticScene scene = q::make_scene(std::vector<q::Quadric>{truth}, synth_count,
                                                    synth_seed);
            scene = q::corrupt(scene, synth_noise, synth_clutter, synth_seed);
            q::RawCloud raw;
            for (const auto& p : scene.cloud.points) {
                raw.positions.push_back(p.position);
                raw.normals.push_back(p.normal);
            }
            q::write_ply(synth_out, raw);
            std::cout << "wrote " << raw.positions.size() << " points to " << synth_out << "\n";
            std::cout << "class: " << q::to_string(q::classify(truth)) << "\n";
            char buf[64];
            std::cout << "coefficients:";
            for (int i = 0; i < 10; ++i) {
                std::snprintf(buf, sizeof(buf), " %.17g", truth.coefficients()(i));
                std::cout << buf;
            }
            std::cout << "\n";
            return kExitOk;
        }
    } catch (const q::ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kExitIo;
    } catch (const q::UnsupportedFormat& e) {
        std::cerr << "unsupported format: " << e.what() << "\n";
        return kExitIo;
    } catch (const q::IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitIo;
    } catch (const q::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
    return kExitUsage;
}
