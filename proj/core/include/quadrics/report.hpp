#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "quadrics/detection_types.hpp"

namespace quadrics {

struct ReportQuadric {
    std::array<double, 10> coefficients{};  // raw scene frame unless report.frame says otherwise
    std::string class_label;
    double score = 0.0;
    int inlier_count = 0;
    double peak_mass = 0.0;
};

struct StageTimings {
    double read_ms = 0, normalize_ms = 0, downsample_ms = 0, normals_ms = 0,
           plane_removal_ms = 0, detect_ms = 0, cluster_ms = 0, total_ms = 0;
};

/// Everything needed to reproduce a detection: the resolved config, the seed, the
/// removed planes and the surviving quadrics. Timings are zero unless measurement
/// was requested, keeping default reports byte-reproducible.
struct DetectionReport {
    std::string tool = "quadrics";
    std::string version = "0.1.0";
    std::uint64_t seed = 0;
    std::string input;
    std::string frame = "raw";  // "raw" | "normalized"
    DetectionConfig config;
    std::vector<std::array<double, 4>> planes_removed;  // raw-frame plane covectors
    StageTimings timings;
    std::vector<ReportQuadric> quadrics;
};

/// Stable key order, coefficients at 17 significant digits.
std::string report_to_string(const DetectionReport& report);
void write_report(const DetectionReport& report, const std::string& path);
DetectionReport read_report(const std::string& path);

bool operator==(const ReportQuadric& a, const ReportQuadric& b);
bool operator==(const DetectionReport& a, const DetectionReport& b);

}  // namespace quadrics
