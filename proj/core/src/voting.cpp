#include "quadrics/voting.hpp"

#include <algorithm>
#include <cmath>

namespace quadrics {

Accumulator::Accumulator(int bin_count, double kernel_bandwidth)
    : raw_(static_cast<std::size_t>(std::max(bin_count, 1)), 0.0), bandwidth_(kernel_bandwidth) {
    const int radius = std::max(1, static_cast<int>(std::ceil(4.0 * bandwidth_)));
    kernel_.resize(radius + 1);
    double sum = 0;
    for (int k = 0; k <= radius; ++k) {
        kernel_[k] = std::exp(-0.5 * (k * k) / (bandwidth_ * bandwidth_));
        sum += (k == 0 ? 1.0 : 2.0) * kernel_[k];
    }
    for (double& w : kernel_) w /= sum;
}

void Accumulator::reset() {
    std::fill(raw_.begin(), raw_.end(), 0.0);
    votes_ = 0;
}

double Accumulator::bin_center(int bin) const {
    return (bin + 0.5) * M_PI / bin_count() - M_PI / 2;
}

void Accumulator::add_theta(double theta) {
    const double t = (theta + M_PI / 2) / M_PI;
    int b = static_cast<int>(t * bin_count());
    b = std::clamp(b, 0, bin_count() - 1);
    raw_[b] += 1.0;
    ++votes_;
}

void Accumulator::add_lambda(double lambda, double lambda_scale) {
    add_theta(std::atan(lambda / lambda_scale));
}

double Accumulator::kernel_central_weight() const { return kernel_[0]; }

std::vector<double> Accumulator::smoothed() const {
    const int n = bin_count();
    const int radius = static_cast<int>(kernel_.size()) - 1;
    std::vector<double> s(n, 0.0);
    for (int j = 0; j < n; ++j) {
        if (raw_[j] == 0.0) continue;
        const int lo = std::max(0, j - radius), hi = std::min(n - 1, j + radius);
        for (int i = lo; i <= hi; ++i) s[i] += raw_[j] * kernel_[std::abs(i - j)];
    }
    return s;
}

Accumulator::Peak Accumulator::peak() const {
    if (votes_ == 0) throw EmptyAccumulator("accumulator peak: no votes cast");
    const std::vector<double> s = smoothed();
    int best = 0;
    for (int i = 1; i < bin_count(); ++i)
        if (s[i] > s[best]) best = i;

    double delta = 0.0;
    double mass = s[best];
    if (best > 0 && best < bin_count() - 1) {
        const double denom = s[best - 1] - 2 * s[best] + s[best + 1];
        if (denom < -1e-300) {
            delta = 0.5 * (s[best - 1] - s[best + 1]) / denom;
            delta = std::clamp(delta, -0.5, 0.5);
            mass = s[best] - 0.25 * (s[best - 1] - s[best + 1]) * delta;
        }
    }
    return {bin_center(best) + delta * (M_PI / bin_count()), mass, best};
}

void Accumulator::write_csv(std::ostream& out) const {
    const std::vector<double> s = smoothed();
    out << "bin_index,theta_center,raw_count,smoothed_mass\n";
    char buf[128];
    for (int i = 0; i < bin_count(); ++i) {
        std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g\n", i, bin_center(i), raw_[i], s[i]);
        out << buf;
    }
}

int quantize_lambda(double lambda, const VoteParams& params, int bin_count) {
    const double theta = std::atan(lambda / params.lambda_scale);
    const double t = (theta + M_PI / 2) / M_PI;
    return std::clamp(static_cast<int>(t * bin_count), 0, bin_count - 1);
}

std::optional<double> lambda_for_point(const NullSpaceSolution& ns, const OrientedPoint& x4,
                                       double weight) {
    Eigen::Matrix<double, 4, 10> a1;
    a1.row(0) = monomials(x4.position).transpose();
    a1.bottomRows<3>() = weight * monomial_gradients(x4.position);
    Eigen::Vector4d n1;
    n1 << 0, weight * x4.normal;

    const Eigen::Vector4d m = a1 * ns.basis.col(0);
    const double m2 = m.squaredNorm();
    if (std::sqrt(m2) < kRankTol) return std::nullopt;
    return m.dot(n1 - a1 * ns.particular) / m2;
}

std::optional<double> lambda_value_row(const NullSpaceSolution& ns, const Vec3& x4) {
    const Vec10 v = monomials(x4);
    const double den = v.dot(ns.basis.col(0));
    if (std::abs(den) < kRankTol) return std::nullopt;
    return -v.dot(ns.particular) / den;
}

bool normal_gate(const NullSpaceSolution& ns, double lambda, const OrientedPoint& x4,
                 double tau_n) {
    const Vec10 q = ns.particular + lambda * ns.basis.col(0);
    const Vec3 g = gradient(q, x4.position);
    const double gn = g.norm();
    if (gn < 1e-12) return false;
    return g.dot(x4.normal) / gn > tau_n;
}

VoteResult vote_and_peak(Accumulator& acc, std::span<const double> lambdas,
                         const VoteParams& params) {
    for (double l : lambdas) acc.add_lambda(l, params.lambda_scale);
    const Accumulator::Peak p = acc.peak();
    return {p.theta, p.mass};
}

Quadric lambda_to_quadric(const NullSpaceSolution& ns, double theta, double lambda_scale) {
    const double lambda = lambda_scale * std::tan(theta);
    return Quadric::from_coefficients(ns.particular + lambda * ns.basis.col(0));
}

}  // namespace quadrics
