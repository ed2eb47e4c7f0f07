#include "cobra/lin_core.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace cobra {

namespace {

void require_dim(const Vec& x, const DesignState& state, const char* what) {
    if (x.size() != state.dim()) {
        throw std::invalid_argument(std::string(what) + ": feature dimension " +
                                    std::to_string(x.size()) + " != state dimension " +
                                    std::to_string(state.dim()));
    }
}

}  // namespace

void ConfidenceParams::validate() const {
    if (!(noise_scale >= 0.0) || !std::isfinite(noise_scale))
        throw std::invalid_argument("noise_scale must be finite and >= 0");
    if (dim < 1) throw std::invalid_argument("dim must be >= 1");
    if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be > 0");
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0,1)");
    if (!(param_bound > 0.0)) throw std::invalid_argument("param_bound must be > 0");
    if (!(feature_bound > 0.0)) throw std::invalid_argument("feature_bound must be > 0");
}

DesignState::DesignState(int dim, double lambda) : lambda_(lambda) {
    if (dim < 1) throw std::invalid_argument("init_design: dim must be >= 1");
    if (!(lambda > 0.0) || !std::isfinite(lambda))
        throw std::invalid_argument("init_design: lambda must be finite and > 0");
    gram_ = Mat::Identity(dim, dim) * lambda;
    gram_inv_ = Mat::Identity(dim, dim) / lambda;
    moment_ = Vec::Zero(dim);
}

DesignState DesignState::from_statistics(double lambda, Mat gram, Vec moment,
                                         std::uint64_t count) {
    if (gram.rows() != gram.cols() || gram.rows() != moment.size())
        throw std::invalid_argument("from_statistics: inconsistent shapes");
    DesignState s;
    s.lambda_ = lambda;
    s.gram_ = std::move(gram);
    s.moment_ = std::move(moment);
    s.count_ = count;
    s.reinvert();
    return s;
}

void DesignState::update(const Vec& x, double y) {
    require_dim(x, *this, "update_design");
    if (!std::isfinite(y)) throw std::invalid_argument("update_design: non-finite reward");
    if (!x.allFinite()) throw std::invalid_argument("update_design: non-finite feature");

    gram_.noalias() += x * x.transpose();
    moment_.noalias() += x * y;
    ++count_;

    if (++since_reinvert_ >= kReinvertEvery) {
        reinvert();
        return;
    }
    // Sherman-Morrison: (V + x x^T)^{-1} = V^{-1} - (V^{-1}x)(V^{-1}x)^T / (1 + x^T V^{-1} x)
    const Vec vx = gram_inv_ * x;
    const double denom = 1.0 + x.dot(vx);
    gram_inv_.noalias() -= (vx * vx.transpose()) / denom;
}

void DesignState::reinvert() {
    Eigen::LLT<Mat> llt(gram_);
    if (llt.info() != Eigen::Success)
        throw std::logic_error("DesignState: Gram matrix is not positive definite");
    gram_inv_ = llt.solve(Mat::Identity(gram_.rows(), gram_.cols()));
    since_reinvert_ = 0;
}

DesignState init_design(int dim, double lambda) { return DesignState(dim, lambda); }

void update_design(DesignState& state, const Vec& x, double y) { state.update(x, y); }

ThetaEstimate fit_theta(const DesignState& state) {
    return ThetaEstimate{state.gram_inv() * state.moment(), state.count()};
}

double alpha_radius(const ConfidenceParams& p, double t) {
    const double l2 = p.feature_bound * p.feature_bound;
    const double radicand = p.dim * std::log((1.0 + t * l2 / p.lambda) / p.delta);
    return p.noise_scale * std::sqrt(std::max(radicand, 0.0)) +
           std::sqrt(p.lambda) * p.param_bound;
}

double weighted_norm(const Vec& x, const DesignState& state) {
    require_dim(x, state, "weighted_norm");
    const double q = x.dot(state.gram_inv() * x);
    return std::sqrt(std::max(q, 0.0));
}

double ucb_value(const ThetaEstimate& theta, const Vec& x, double alpha,
                 const DesignState& state) {
    if (theta.mean.size() != x.size()) throw std::invalid_argument("ucb_value: theta/x mismatch");
    return theta.mean.dot(x) + alpha * weighted_norm(x, state);
}

double lcb_value(const ThetaEstimate& theta, const Vec& x, double alpha,
                 const DesignState& state) {
    if (theta.mean.size() != x.size()) throw std::invalid_argument("lcb_value: theta/x mismatch");
    return theta.mean.dot(x) - alpha * weighted_norm(x, state);
}

Vec ts_draw(const ThetaEstimate& theta, const DesignState& state, double beta, Rng& rng) {
    if (beta == 0.0) return theta.mean;
    if (beta < 0.0) throw std::invalid_argument("ts_draw: beta must be >= 0");
    std::normal_distribution<double> gauss(0.0, 1.0);
    Vec z(state.dim());
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = gauss(rng);
    Eigen::LLT<Mat> llt(state.gram_inv());
    if (llt.info() != Eigen::Success)
        throw std::logic_error("ts_draw: inverse Gram matrix is not positive definite");
    const Vec lz = llt.matrixL() * z;
    return theta.mean + beta * lz;
}

double beta_schedule(const ConfidenceParams& p, std::uint64_t t) {
    const double ratio = std::max(static_cast<double>(t) / p.delta, std::numbers::e);
    return p.noise_scale * std::sqrt(9.0 * p.dim * std::log(ratio));
}

}  // namespace cobra
