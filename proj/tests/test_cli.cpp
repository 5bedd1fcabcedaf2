#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "quadrics/report.hpp"
#include "quadrics/rng.hpp"

namespace {

const std::string kCli = QUADRICS_CLI_PATH;

int run(const std::string& args) {
    const int status = std::system((kCli + " " + args + " >/dev/null 2>/dev/null").c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("synth then detect --mode sphere finds a sphere") {
    REQUIRE(run("synth --class sphere --seed 7 --count 1200 --clutter 0.3 --out "
                "/tmp/qcli_sphere.ply") == 0);
    REQUIRE(run("detect /tmp/qcli_sphere.ply --mode sphere --seed 7 --max-bases 400 --out "
                "/tmp/qcli_sphere.json") == 0);
    const quadrics::DetectionReport r = quadrics::read_report("/tmp/qcli_sphere.json");
    REQUIRE_FALSE(r.quadrics.empty());
    CHECK(r.quadrics.front().class_label == "sphere");
    CHECK(r.seed == 7);
    CHECK(r.quadrics.front().score > 0);
    CHECK(r.quadrics.front().score <= 1.0);
}

TEST_CASE("generic detect exits 0 and reports the surface") {
    REQUIRE(run("synth --class ellipsoid --seed 3 --count 1500 --out /tmp/qcli_ell.ply") == 0);
    REQUIRE(run("detect /tmp/qcli_ell.ply --seed 3 --max-bases 400 --out /tmp/qcli_ell.json") ==
            0);
    const quadrics::DetectionReport r = quadrics::read_report("/tmp/qcli_ell.json");
    REQUIRE_FALSE(r.quadrics.empty());
}

TEST_CASE("usage errors exit with code 1") {
    CHECK(run("detect /tmp/qcli_sphere.ply --mode bogus") == 1);
    CHECK(run("") == 1);
    CHECK(run("frobnicate") == 1);
}

TEST_CASE("io errors exit with code 2") {
    CHECK(run("detect /tmp/qcli_no_such_file.ply") == 2);
    std::ofstream bad("/tmp/qcli_bad.ply", std::ios::binary);
    bad << "ply\nformat binary_little_endian 1.0\nelement vertex 5\n"
           "property float x\nproperty float y\nproperty float z\nend_header\nxx";
    bad.close();
    CHECK(run("detect /tmp/qcli_bad.ply") == 2);
}

TEST_CASE("detect that finds nothing exits with code 3") {
    // pure uniform clutter, no surface
    quadrics::Rng rng(12);
    std::ofstream out("/tmp/qcli_clutter.xyzn");
    for (int i = 0; i < 300; ++i) {
        const auto p = rng.in_unit_ball();
        const auto n = rng.unit_vector();
        out << p.x() << " " << p.y() << " " << p.z() << " " << n.x() << " " << n.y() << " "
            << n.z() << "\n";
    }
    out.close();
    CHECK(run("detect /tmp/qcli_clutter.xyzn --seed 4 --max-bases 150 --out "
              "/tmp/qcli_clutter.json") == 3);
}

TEST_CASE("seeded detect is byte-identical across runs") {
    REQUIRE(run("detect /tmp/qcli_sphere.ply --seed 11 --max-bases 250 --out /tmp/qcli_a.json") ==
            0);
    REQUIRE(run("detect /tmp/qcli_sphere.ply --seed 11 --max-bases 250 --out /tmp/qcli_b.json") ==
            0);
    CHECK(slurp("/tmp/qcli_a.json") == slurp("/tmp/qcli_b.json"));
}

TEST_CASE("a report without an explicit seed still echoes the drawn seed") {
    REQUIRE(run("detect /tmp/qcli_sphere.ply --max-bases 150 --out /tmp/qcli_noseed.json") == 0);
    const quadrics::DetectionReport r = quadrics::read_report("/tmp/qcli_noseed.json");
    CHECK(r.seed != 0);
}

TEST_CASE("seeded sweep is byte-identical across runs") {
    REQUIRE(run("sweep --seed 1 --quadrics-per-level 2 --fits-per-set 2 --points 100 --out "
                "/tmp/qcli_s1.csv") == 0);
    REQUIRE(run("sweep --seed 1 --quadrics-per-level 2 --fits-per-set 2 --points 100 --out "
                "/tmp/qcli_s2.csv") == 0);
    const std::string a = slurp("/tmp/qcli_s1.csv");
    CHECK(a == slurp("/tmp/qcli_s2.csv"));
    CHECK(a.find("noise_sigma,") == 0);
}

TEST_CASE("accumulator dump produces the CSV diagnostic") {
    REQUIRE(run("detect /tmp/qcli_sphere.ply --seed 7 --max-bases 250 --out /tmp/qcli_d.json "
                "--dump-accumulator /tmp/qcli_acc.csv") == 0);
    const std::string csv = slurp("/tmp/qcli_acc.csv");
    CHECK(csv.find("bin_index,theta_center,raw_count,smoothed_mass") == 0);
}

TEST_CASE("fit and bench subcommands run") {
    CHECK(run("fit /tmp/qcli_ell.ply --method ls") == 0);
    CHECK(run("fit /tmp/qcli_ell.ply --method minimal4 --seed 5") == 0);
    CHECK(run("bench --lambda-trials 100") == 0);
}
