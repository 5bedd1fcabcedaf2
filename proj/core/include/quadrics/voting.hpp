#pragma once

#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "quadrics/fitting.hpp"

namespace quadrics {

struct VoteParams {
    double tau_n = 0.95;        // normal-agreement threshold for the gate
    double lambda_scale = 1.0;  // c in theta = atan(lambda / c)
};

/// 1D accumulator over theta = atan(lambda / c), theta in (-pi/2, pi/2).
/// Raw counts are smoothed by a truncated (non-circular) Gaussian kernel.
class Accumulator {
public:
    explicit Accumulator(int bin_count = 64, double kernel_bandwidth = 1.5);

    void reset();
    void add_theta(double theta);
    void add_lambda(double lambda, double lambda_scale);

    int bin_count() const { return static_cast<int>(raw_.size()); }
    double kernel_bandwidth() const { return bandwidth_; }
    long votes_cast() const { return votes_; }
    const std::vector<double>& raw() const { return raw_; }

    /// Normalized central kernel weight; a single-bin impulse of k votes smooths to k * this.
    double kernel_central_weight() const;

    std::vector<double> smoothed() const;

    struct Peak {
        double theta;
        double mass;
        int bin;
    };
    /// Smoothed maximum with 3-point parabolic sub-bin refinement.
    /// Throws EmptyAccumulator when no votes were cast.
    Peak peak() const;

    double bin_center(int bin) const;

    /// CSV rows: bin_index,theta_center,raw_count,smoothed_mass
    void write_csv(std::ostream& out) const;

private:
    std::vector<double> raw_;
    std::vector<double> kernel_;  // one-sided, kernel_[0] is the center weight
    double bandwidth_;
    long votes_ = 0;
};

/// Bin index of lambda under theta = atan(lambda / lambda_scale), mapped uniformly
/// onto [0, bin_count). Strictly monotone in lambda; finest resolution near 0.
int quantize_lambda(double lambda, const VoteParams& params, int bin_count);

/// Family coordinate of a candidate point from its full 4-row constraint block
/// (value row + weighted gradient rows): lambda = (A1 mu)^T (n1 - A1 p) / ||A1 mu||^2.
/// nullopt when ||A1 mu|| < rank_tol (the candidate does not constrain the family).
std::optional<double> lambda_for_point(const NullSpaceSolution& ns, const OrientedPoint& x4,
                                       double weight);

/// Family coordinate from the value equation alone: lambda = -v(x4).p / v(x4).mu.
/// Exact for inliers regardless of the surface's gradient magnitudes; the candidate's
/// normal is left to the gate. This is what the detection loop votes with.
std::optional<double> lambda_value_row(const NullSpaceSolution& ns, const Vec3& x4);

/// True iff the candidate quadric p + lambda*mu has a normalized gradient at x4 whose
/// dot with the point's normal exceeds tau_n. False at (near-)singular points.
bool normal_gate(const NullSpaceSolution& ns, double lambda, const OrientedPoint& x4,
                 double tau_n);

struct VoteResult {
    double peak_theta;
    double peak_mass;
};

/// Casts one vote per lambda and returns the smoothed peak.
VoteResult vote_and_peak(Accumulator& acc, std::span<const double> lambdas,
                         const VoteParams& params);

/// Family member at lambda = lambda_scale * tan(theta), canonicalized.
Quadric lambda_to_quadric(const NullSpaceSolution& ns, double theta, double lambda_scale = 1.0);

}  // namespace quadrics
