#pragma once

// Leave-one-out misreport detection.
//
// For each agent the detector compares a pessimistic estimate of the agent's
// total expected reward, computed from a ridge fit that excludes the agent's
// own observations, against an optimistic bound on the rewards actually
// observed when the agent was selected. An agent whose reported features
// promise more than the observed rewards can support is eliminated.

#include "cobra/lin_core.hpp"

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace cobra {

using AgentId = int;

/// Raised when leave-one-out bookkeeping no longer agrees with the global
/// design (the subtracted Gram matrix is not bounded below by lambda).
class InternalConsistencyError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Per-agent history. Features are stored exactly as reported at selection
/// time and are never revised.
class AgentLedger {
public:
    AgentLedger(AgentId id, int dim);

    void record(const Vec& x_reported, double y);

    AgentId agent_id() const { return id_; }
    int dim() const { return static_cast<int>(contrib_moment_.size()); }
    std::uint64_t pull_count() const { return pull_count_; }
    double reward_sum() const { return reward_sum_; }
    const Mat& contrib_gram() const { return contrib_gram_; }
    const Vec& contrib_moment() const { return contrib_moment_; }
    /// Column s is the feature reported at the agent's s-th selection.
    auto selected_features() const {
        return features_.leftCols(static_cast<Eigen::Index>(pull_count_));
    }

    bool active() const { return active_; }
    void deactivate() { active_ = false; }

private:
    AgentId id_;
    Mat features_;  // d x capacity
    double reward_sum_ = 0.0;
    std::uint64_t pull_count_ = 0;
    Mat contrib_gram_;
    Vec contrib_moment_;
    bool active_ = true;
};

struct LoomOutcome {
    AgentId agent_id = -1;
    double lcb_sum_x = 0.0;
    double ucb_sum_y = 0.0;
    bool tripped = false;
    double delta_x = 0.0;
    double delta_y = 0.0;
};

/// Failure-probability split across agents and rounds:
/// delta_x = delta_y = delta / (2 N t (t + 1)), which sums to at most delta.
struct LoomSchedule {
    double delta = 0.05;
    int num_agents = 1;

    double delta_x(std::uint64_t t) const;
    double delta_y(std::uint64_t t) const { return delta_x(t); }
};

/// Global design with the agent's contribution removed.
DesignState loo_design(const DesignState& global, const AgentLedger& ledger);

/// Confidence radius for the leave-one-out fit, evaluated at t - pull_count
/// effective observations.
double loo_alpha(const ConfidenceParams& params, std::uint64_t t, std::uint64_t pull_count);

/// Sum over the agent's reported features of the leave-one-out LCB.
double lcb_sum_x(const AgentLedger& ledger, const DesignState& loo_state,
                 const ThetaEstimate& loo_theta, double loo_alpha);

/// reward_sum + sqrt(2 R^2 S log(1/delta_y)).
double ucb_sum_y(const AgentLedger& ledger, double noise_scale, double delta_y);

/// Evaluates the detection condition for one agent at round t (t counts
/// absorbed observations). Pure: elimination is left to the caller.
LoomOutcome loom_check(const AgentLedger& ledger, const DesignState& global,
                       const ConfidenceParams& params, std::uint64_t t,
                       const LoomSchedule& schedule);

/// Removes every tripped agent from `active_set` (kept sorted) and returns the
/// removed ids in ascending order.
std::vector<AgentId> apply_elimination(std::vector<AgentId>& active_set,
                                       const std::vector<LoomOutcome>& outcomes);

}  // namespace cobra
