#include "quadrics/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "quadrics/detection.hpp"

namespace quadrics {

namespace {

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

}  // namespace

std::string report_to_string(const DetectionReport& r) {
    std::ostringstream o;
    o << "{\n";
    o << "  \"tool\": " << quote(r.tool) << ",\n";
    o << "  \"version\": " << quote(r.version) << ",\n";
    o << "  \"seed\": " << r.seed << ",\n";
    o << "  \"input\": " << quote(r.input) << ",\n";
    o << "  \"frame\": " << quote(r.frame) << ",\n";
    o << "  \"config\": {\n";
    const DetectionConfig& c = r.config;
    o << "    \"mode\": " << quote(to_string(c.mode)) << ",\n";
    o << "    \"tau_s\": " << num(c.tau_s) << ",\n";
    o << "    \"knn\": " << c.knn << ",\n";
    o << "    \"neighbor_radius_factor\": " << num(c.neighbor_radius_factor) << ",\n";
    o << "    \"max_bases\": " << c.max_bases << ",\n";
    o << "    \"samples_per_basis\": " << c.samples_per_basis << ",\n";
    o << "    \"tau\": " << num(c.tau) << ",\n";
    o << "    \"tau_n\": " << num(c.tau_n) << ",\n";
    o << "    \"weight\": " << num(c.weight) << ",\n";
    o << "    \"bin_count\": " << c.bin_count << ",\n";
    o << "    \"kernel_bandwidth\": " << num(c.kernel_bandwidth) << ",\n";
    o << "    \"lambda_scale\": " << num(c.lambda_scale) << ",\n";
    o << "    \"plane_removal\": " << (c.plane_removal ? "true" : "false") << ",\n";
    o << "    \"min_plane_fraction\": " << num(c.min_plane_fraction) << ",\n";
    o << "    \"min_peak_votes\": " << num(c.min_peak_votes) << ",\n";
    o << "    \"min_peak_fraction\": " << num(c.min_peak_fraction) << ",\n";
    o << "    \"lambda_rows\": " << quote(to_string(c.lambda_rows)) << "\n";
    o << "  },\n";
    o << "  \"planes_removed\": [";
    for (std::size_t i = 0; i < r.planes_removed.size(); ++i) {
        const auto& p = r.planes_removed[i];
        o << (i ? ", " : "") << "[" << num(p[0]) << ", " << num(p[1]) << ", " << num(p[2]) << ", "
          << num(p[3]) << "]";
    }
    o << "],\n";
    const StageTimings& t = r.timings;
    o << "  \"timings_ms\": {\"read\": " << num(t.read_ms) << ", \"normalize\": " << num(t.normalize_ms)
      << ", \"downsample\": " << num(t.downsample_ms) << ", \"normals\": " << num(t.normals_ms)
      << ", \"plane_removal\": " << num(t.plane_removal_ms) << ", \"detect\": " << num(t.detect_ms)
      << ", \"cluster\": " << num(t.cluster_ms) << ", \"total\": " << num(t.total_ms) << "},\n";
    o << "  \"quadrics\": [";
    for (std::size_t i = 0; i < r.quadrics.size(); ++i) {
        const ReportQuadric& q = r.quadrics[i];
        o << (i ? ",\n    " : "\n    ");
        o << "{\"coefficients\": [";
        for (int k = 0; k < 10; ++k) o << (k ? ", " : "") << num(q.coefficients[k]);
        o << "], \"class\": " << quote(q.class_label) << ", \"score\": " << num(q.score)
          << ", \"inlier_count\": " << q.inlier_count << ", \"peak_mass\": " << num(q.peak_mass)
          << "}";
    }
    o << (r.quadrics.empty() ? "]\n" : "\n  ]\n");
    o << "}\n";
    return o.str();
}

void write_report(const DetectionReport& report, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << report_to_string(report);
    if (!out) throw IoError("write failed: " + path);
}

DetectionReport read_report(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("report parse: ") + e.what(), 0);
    }

    DetectionReport r;
    r.tool = j.at("tool").get<std::string>();
    r.version = j.at("version").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.input = j.at("input").get<std::string>();
    r.frame = j.at("frame").get<std::string>();

    const auto& c = j.at("config");
    const std::string mode = c.at("mode").get<std::string>();
    r.config.mode = mode == "sphere"  ? DetectionMode::sphere
                    : mode == "plane" ? DetectionMode::plane
                                      : DetectionMode::generic;
    r.config.tau_s = c.at("tau_s").get<double>();
    r.config.knn = c.at("knn").get<int>();
    r.config.neighbor_radius_factor = c.at("neighbor_radius_factor").get<double>();
    r.config.max_bases = c.at("max_bases").get<int>();
    r.config.samples_per_basis = c.at("samples_per_basis").get<int>();
    r.config.tau = c.at("tau").get<double>();
    r.config.tau_n = c.at("tau_n").get<double>();
    r.config.weight = c.at("weight").get<double>();
    r.config.bin_count = c.at("bin_count").get<int>();
    r.config.kernel_bandwidth = c.at("kernel_bandwidth").get<double>();
    r.config.lambda_scale = c.at("lambda_scale").get<double>();
    r.config.plane_removal = c.at("plane_removal").get<bool>();
    r.config.min_plane_fraction = c.at("min_plane_fraction").get<double>();
    r.config.min_peak_votes = c.at("min_peak_votes").get<double>();
    r.config.min_peak_fraction = c.at("min_peak_fraction").get<double>();
    r.config.lambda_rows = c.at("lambda_rows").get<std::string>() == "full_rows"
                               ? LambdaRows::full_rows
                               : LambdaRows::value_row;

    for (const auto& p : j.at("planes_removed"))
        r.planes_removed.push_back({p.at(0).get<double>(), p.at(1).get<double>(),
                                    p.at(2).get<double>(), p.at(3).get<double>()});

    const auto& t = j.at("timings_ms");
    r.timings = {t.at("read").get<double>(),       t.at("normalize").get<double>(),
                 t.at("downsample").get<double>(), t.at("normals").get<double>(),
                 t.at("plane_removal").get<double>(), t.at("detect").get<double>(),
                 t.at("cluster").get<double>(),    t.at("total").get<double>()};

    for (const auto& q : j.at("quadrics")) {
        ReportQuadric rq;
        for (int k = 0; k < 10; ++k) rq.coefficients[k] = q.at("coefficients").at(k).get<double>();
        rq.class_label = q.at("class").get<std::string>();
        rq.score = q.at("score").get<double>();
        rq.inlier_count = q.at("inlier_count").get<int>();
        rq.peak_mass = q.at("peak_mass").get<double>();
        r.quadrics.push_back(std::move(rq));
    }
    return r;
}

bool operator==(const ReportQuadric& a, const ReportQuadric& b) {
    return a.coefficients == b.coefficients && a.class_label == b.class_label &&
           a.score == b.score && a.inlier_count == b.inlier_count && a.peak_mass == b.peak_mass;
}

bool operator==(const DetectionReport& a, const DetectionReport& b) {
    auto cfg_eq = [](const DetectionConfig& x, const DetectionConfig& y) {
        return x.tau_s == y.tau_s && x.knn == y.knn &&
               x.neighbor_radius_factor == y.neighbor_radius_factor &&
               x.max_bases == y.max_bases && x.samples_per_basis == y.samples_per_basis &&
               x.tau == y.tau && x.tau_n == y.tau_n && x.weight == y.weight &&
               x.bin_count == y.bin_count && x.kernel_bandwidth == y.kernel_bandwidth &&
               x.lambda_scale == y.lambda_scale && x.plane_removal == y.plane_removal &&
               x.min_plane_fraction == y.min_plane_fraction &&
               x.min_peak_votes == y.min_peak_votes &&
               x.min_peak_fraction == y.min_peak_fraction && x.mode == y.mode &&
               x.lambda_rows == y.lambda_rows;
    };
    auto tim_eq = [](const StageTimings& x, const StageTimings& y) {
        return x.read_ms == y.read_ms && x.normalize_ms == y.normalize_ms &&
               x.downsample_ms == y.downsample_ms && x.normals_ms == y.normals_ms &&
               x.plane_removal_ms == y.plane_removal_ms && x.detect_ms == y.detect_ms &&
               x.cluster_ms == y.cluster_ms && x.total_ms == y.total_ms;
    };
    return a.tool == b.tool && a.version == b.version && a.seed == b.seed && a.input == b.input &&
           a.frame == b.frame && cfg_eq(a.config, b.config) &&
           a.planes_removed == b.planes_removed && tim_eq(a.timings, b.timings) &&
           a.quadrics == b.quadrics;
}

}  // namespace quadrics
