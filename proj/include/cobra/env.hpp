#pragma once

// Synthetic strategic contextual bandit problems.
//
// Each round a context c_t is drawn uniformly from (0,2)^{d_c} and joined
// with every agent's fixed feature block (also drawn from (0,2)^{d_n}) to
// form the true context-arm features. Agents then report either the true
// features or an inflated copy (1 + a) x*, a ~ U(eta, eta + eps_eta).
// Rewards always depend on the true features only.

#include "cobra/lin_core.hpp"
#include "cobra/loom.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace cobra {

enum class StrategyKind { truthful, over_report };

struct Strategy {
    StrategyKind kind = StrategyKind::truthful;
    double eta = 0.0;
    double eps_eta = 0.0;  // 0 gives a fixed multiplier 1 + eta

    static Strategy truthful() { return {}; }
    static Strategy over_report(double eta, double eps_eta) {
        return {StrategyKind::over_report, eta, eps_eta};
    }
    void validate() const;
};

enum class Lift { none, subset_products_deg3 };

std::string to_string(Lift lift);
Lift lift_from_string(const std::string& name);

struct InstanceSpec {
    int d_c = 5;
    int d_n = 5;
    int num_agents = 5;
    double reward_scale = 5.0;  // c in f(x) = c x^T theta*
    double noise_scale = 0.1;   // R
    Lift lift = Lift::none;
    /// One per agent; empty means everybody is truthful.
    std::vector<Strategy> strategies;

    void validate() const;
};

struct ProblemInstance {
    int d_c = 0;
    int d_n = 0;
    std::vector<Vec> agent_features;  // raw d_n blocks
    Vec theta_star;                   // unit norm, in the (lifted) feature space
    double reward_scale = 1.0;
    double noise_scale = 0.0;
    Lift lift = Lift::none;
    std::vector<Strategy> strategies;

    int num_agents() const { return static_cast<int>(agent_features.size()); }
    int raw_dim() const { return d_c + d_n; }
    /// Dimension the learner works in.
    int dim() const { return static_cast<int>(theta_star.size()); }
    /// Supremum of ||x*|| over raw features in (0,2)^d, after the lift.
    double feature_bound() const;
    /// S in the confidence radius: the norm of c * theta*.
    double param_bound() const { return reward_scale; }
};

struct RoundOffer {
    AgentId agent_id = -1;
    Vec x_true;
    Vec x_reported;
};

/// Output dimension of poly_lift for a d-dimensional input.
int lifted_dim(int d);

/// Products of every nonempty coordinate subset of size <= 3, ordered by
/// subset size and then lexicographically by index tuple.
Vec poly_lift(const Vec& x);

ProblemInstance gen_instance(const InstanceSpec& spec, std::uint64_t seed);

/// Draws the round's context from `context_rng` and one offer per agent (all
/// agents, active or not). Over-reporting agent n draws its multiplier from
/// `report_rngs[n]`, so the offers of other agents do not depend on it.
std::vector<RoundOffer> sample_round(const ProblemInstance& instance, Rng& context_rng,
                                     std::span<Rng> report_rngs);

/// Single-stream convenience overload.
std::vector<RoundOffer> sample_round(const ProblemInstance& instance, Rng& rng);

/// The reported vector for a true vector under `strategy`.
Vec apply_strategy(const Strategy& strategy, const Vec& x_true, Rng& rng);

double true_reward(const ProblemInstance& instance, const Vec& x_true);

/// true_reward + N(0, R^2).
double sample_reward(const ProblemInstance& instance, const Vec& x_true, Rng& rng);

}  // namespace cobra
