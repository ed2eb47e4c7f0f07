#pragma once

// Ridge regression state, confidence radii and optimistic / pessimistic
// scores for linear reward models.

#include <Eigen/Dense>

#include <cstdint>
#include <random>

namespace cobra {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Rng = std::mt19937_64;

/// Constants that enter the confidence radius of the ridge ellipsoid.
struct ConfidenceParams {
    double noise_scale = 0.1;    // R
    int dim = 1;                 // d
    double lambda = 0.01;        // ridge regularizer
    double delta = 0.05;         // failure probability, in (0,1)
    double param_bound = 1.0;    // S >= ||theta*||
    double feature_bound = 1.0;  // L >= ||x||

    /// Throws std::invalid_argument unless every field is in range.
    /// noise_scale may be zero (noiseless reward).
    void validate() const;
};

/// Running sufficient statistics V = lambda*I + sum x x^T, b = sum x y.
///
/// The inverse is maintained by rank-one updates and refreshed from a
/// Cholesky factorisation of the Gram matrix every kReinvertEvery updates.
class DesignState {
public:
    static constexpr std::uint64_t kReinvertEvery = 512;

    DesignState(int dim, double lambda);

    /// Builds a state from already-accumulated statistics; the inverse is
    /// computed from scratch.
    static DesignState from_statistics(double lambda, Mat gram, Vec moment,
                                       std::uint64_t count);

    void update(const Vec& x, double y);

    int dim() const { return static_cast<int>(moment_.size()); }
    double lambda() const { return lambda_; }
    const Mat& gram() const { return gram_; }
    const Mat& gram_inv() const { return gram_inv_; }
    const Vec& moment() const { return moment_; }
    std::uint64_t count() const { return count_; }

private:
    DesignState() = default;
    void reinvert();

    double lambda_ = 1.0;
    Mat gram_;
    Mat gram_inv_;
    Vec moment_;
    std::uint64_t count_ = 0;
    std::uint64_t since_reinvert_ = 0;
};

struct ThetaEstimate {
    Vec mean;
    std::uint64_t source_count = 0;
};

DesignState init_design(int dim, double lambda);

/// Absorbs one observation in place.
void update_design(DesignState& state, const Vec& x, double y);

ThetaEstimate fit_theta(const DesignState& state);

/// alpha_t = R sqrt(d log((1 + t L^2 / lambda) / delta)) + sqrt(lambda) S.
/// `t` is the number of observations the estimate was built from.
double alpha_radius(const ConfidenceParams& params, double t);

/// sqrt(x^T V^{-1} x).
double weighted_norm(const Vec& x, const DesignState& state);

double ucb_value(const ThetaEstimate& theta, const Vec& x, double alpha,
                 const DesignState& state);
double lcb_value(const ThetaEstimate& theta, const Vec& x, double alpha,
                 const DesignState& state);

/// theta_hat + beta * chol(V^{-1}) z, z ~ N(0, I).
Vec ts_draw(const ThetaEstimate& theta, const DesignState& state, double beta,
            Rng& rng);

/// beta_t = R sqrt(9 d log(max(t / delta, e))).
double beta_schedule(const ConfidenceParams& params, std::uint64_t t);

}  // namespace cobra
