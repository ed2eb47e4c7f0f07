#include "cobra/loom.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace cobra {

AgentLedger::AgentLedger(AgentId id, int dim)
    : id_(id),
      features_(dim, 16),
      contrib_gram_(Mat::Zero(dim, dim)),
      contrib_moment_(Vec::Zero(dim)) {
    if (dim < 1) throw std::invalid_argument("AgentLedger: dim must be >= 1");
}

void AgentLedger::record(const Vec& x_reported, double y) {
    if (x_reported.size() != dim())
        throw std::invalid_argument("AgentLedger::record: dimension mismatch");
    const auto n = static_cast<Eigen::Index>(pull_count_);
    if (n == features_.cols()) features_.conservativeResize(Eigen::NoChange, 2 * n);
    features_.col(n) = x_reported;
    contrib_gram_.noalias() += x_reported * x_reported.transpose();
    contrib_moment_.noalias() += x_reported * y;
    reward_sum_ += y;
    ++pull_count_;
}

double LoomSchedule::delta_x(std::uint64_t t) const {
    const double tt = static_cast<double>(std::max<std::uint64_t>(t, 1));
    return delta / (2.0 * num_agents * tt * (tt + 1.0));
}

DesignState loo_design(const DesignState& global, const AgentLedger& ledger) {
    if (ledger.dim() != global.dim())
        throw std::invalid_argument("loo_design: ledger dimension differs from design");
    if (ledger.pull_count() == 0) return global;
    if (ledger.pull_count() > global.count())
        throw InternalConsistencyError("loo_design: agent " + std::to_string(ledger.agent_id()) +
                                       " has more pulls than the global design");

    Mat gram = global.gram() - ledger.contrib_gram();
    gram = 0.5 * (gram + gram.transpose());
    const double floor = global.lambda() - 1e-6;
    Eigen::LLT<Mat> shifted(gram - floor * Mat::Identity(gram.rows(), gram.cols()));
    if (shifted.info() != Eigen::Success)
        throw InternalConsistencyError("loo_design: subtracted Gram matrix for agent " +
                                       std::to_string(ledger.agent_id()) +
                                       " has an eigenvalue below lambda");
    return DesignState::from_statistics(global.lambda(), std::move(gram),
                                        global.moment() - ledger.contrib_moment(),
                                        global.count() - ledger.pull_count());
}

double loo_alpha(const ConfidenceParams& params, std::uint64_t t, std::uint64_t pull_count) {
    if (pull_count > t)
        throw std::invalid_argument("loo_alpha: pull_count " + std::to_string(pull_count) +
                                    " exceeds t " + std::to_string(t));
    return alpha_radius(params, static_cast<double>(t - pull_count));
}

double lcb_sum_x(const AgentLedger& ledger, const DesignState& loo_state,
                 const ThetaEstimate& loo_theta, double alpha) {
    if (ledger.pull_count() == 0) return 0.0;
    const auto xs = ledger.selected_features();
    const Mat vx = loo_state.gram_inv() * xs;
    const Eigen::RowVectorXd quad = xs.cwiseProduct(vx).colwise().sum();
    const Eigen::RowVectorXd means = loo_theta.mean.transpose() * xs;
    double total = 0.0;
    for (Eigen::Index s = 0; s < xs.cols(); ++s)
        total += means(s) - alpha * std::sqrt(std::max(quad(s), 0.0));
    return total;
}

double ucb_sum_y(const AgentLedger& ledger, double noise_scale, double delta_y) {
    if (!(delta_y > 0.0 && delta_y <= 1.0))
        throw std::invalid_argument("ucb_sum_y: delta_y must lie in (0,1)");
    const double n = static_cast<double>(ledger.pull_count());
    return ledger.reward_sum() +
           std::sqrt(2.0 * noise_scale * noise_scale * n * std::log(1.0 / delta_y));
}

LoomOutcome loom_check(const AgentLedger& ledger, const DesignState& global,
                       const ConfidenceParams& params, std::uint64_t t,
                       const LoomSchedule& schedule) {
    LoomOutcome out;
    out.agent_id = ledger.agent_id();
    out.delta_x = schedule.delta_x(t);
    out.delta_y = schedule.delta_y(t);
    if (ledger.pull_count() == 0) return out;

    const DesignState loo = loo_design(global, ledger);
    const ThetaEstimate theta = fit_theta(loo);
    ConfidenceParams px = params;
    px.delta = out.delta_x;
    const double alpha = loo_alpha(px, t, ledger.pull_count());

    out.lcb_sum_x = lcb_sum_x(ledger, loo, theta, alpha);
    out.ucb_sum_y = ucb_sum_y(ledger, params.noise_scale, out.delta_y);
    out.tripped = out.lcb_sum_x > out.ucb_sum_y;
    return out;
}

std::vector<AgentId> apply_elimination(std::vector<AgentId>& active_set,
                                       const std::vector<LoomOutcome>& outcomes) {
    std::vector<AgentId> removed;
    for (const auto& o : outcomes)
        if (o.tripped) removed.push_back(o.agent_id);
    std::sort(removed.begin(), removed.end());
    removed.erase(std::unique(removed.begin(), removed.end()), removed.end());
    std::erase_if(active_set, [&](AgentId a) {
        return std::binary_search(removed.begin(), removed.end(), a);
    });
    return removed;
}

}  // namespace cobra
