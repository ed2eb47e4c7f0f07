#pragma once

// Arm-selection policies for strategic linear contextual bandits.
//
//   cobra_ucb / cobra_ts : optimistic or Thompson-sampled selection plus the
//                          leave-one-out misreport detector after each round.
//   lin_ucb / lin_ts     : the same selection rules with no detector.

#include "cobra/lin_core.hpp"
#include "cobra/loom.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cobra {

enum class PolicyKind { cobra_ucb, cobra_ts, lin_ucb, lin_ts };
enum class CheckScope { all, selected };

std::string to_string(PolicyKind kind);
PolicyKind policy_kind_from_string(const std::string& name);
std::string to_string(CheckScope scope);
CheckScope check_scope_from_string(const std::string& name);

inline bool is_cobra(PolicyKind k) { return k == PolicyKind::cobra_ucb || k == PolicyKind::cobra_ts; }
inline bool is_thompson(PolicyKind k) { return k == PolicyKind::cobra_ts || k == PolicyKind::lin_ts; }

struct PolicyConfig {
    PolicyKind kind = PolicyKind::cobra_ucb;
    ConfidenceParams confidence;
    bool loom_enabled = true;
    CheckScope loom_check_scope = CheckScope::all;

    /// Config with loom_enabled derived from the kind.
    static PolicyConfig make(PolicyKind kind, const ConfidenceParams& confidence,
                             CheckScope scope = CheckScope::all);
    void validate() const;
};

/// Raised when an operation is invoked in a state that does not allow it.
class InvalidStateError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// A reported feature vector as seen by the learner.
struct Offer {
    AgentId agent_id = -1;
    Vec x;
};

/// Estimate-plus-half-width interface a detector-compatible learner exposes.
/// Any implementation must satisfy |estimate(x) - f(x)| <= half_width(x) with
/// probability at least 1 - delta on truthful data.
class ConfidenceBound {
public:
    virtual ~ConfidenceBound() = default;
    virtual double estimate(const Vec& x) const = 0;
    virtual double half_width(const Vec& x) const = 0;

    double upper(const Vec& x) const { return estimate(x) + half_width(x); }
    double lower(const Vec& x) const { return estimate(x) - half_width(x); }
};

/// Ridge ellipsoid: estimate theta_hat^T x, half-width alpha ||x||_{V^{-1}}.
class LinearConfidenceBound final : public ConfidenceBound {
public:
    LinearConfidenceBound(const DesignState& pool, double alpha);

    double estimate(const Vec& x) const override;
    double half_width(const Vec& x) const override;
    double alpha() const { return alpha_; }

private:
    const DesignState* pool_;
    ThetaEstimate theta_;
    double alpha_;
};

/// Per-round assumption checks. Diagnostic only.
struct AssumptionDiagnostics {
    int offers_checked = 0;
    /// Offers where c theta*^T x > UCB_t(x) for the reported x.
    int optimism_violations = 0;
    /// UCB_t(x) <= UCB_{t,-a}(x) for the selected agent's reported x.
    bool loo_ordering_holds = true;
};

class Policy {
public:
    Policy(PolicyConfig config, int num_agents, int dim);

    /// Picks among the offers (all from active agents). Returns nullopt when
    /// the policy has stopped or the offer list is empty.
    std::optional<AgentId> select_arm(std::span<const Offer> offers, Rng& rng);

    void observe(AgentId agent, const Vec& x_reported, double y);

    /// Runs the detector (if enabled) and returns the agents eliminated this
    /// round in ascending order.
    std::vector<AgentId> post_round();

    /// Evaluates the optimism assumptions at the current state, before the
    /// round's observation is absorbed. `theta_eff` is c * theta*.
    AssumptionDiagnostics assumption_monitor(std::span<const Offer> offers, AgentId selected,
                                             const Vec& theta_eff) const;

    const PolicyConfig& config() const { return config_; }
    const DesignState& global() const { return global_; }
    const AgentLedger& ledger(AgentId a) const { return ledgers_.at(static_cast<std::size_t>(a)); }
    const std::vector<AgentLedger>& ledgers() const { return ledgers_; }
    const std::vector<AgentId>& active_set() const { return active_; }
    bool is_active(AgentId a) const;
    bool stopped() const { return active_.empty(); }
    /// Rounds with an observation so far.
    std::uint64_t round() const { return global_.count(); }
    const std::vector<LoomOutcome>& last_outcomes() const { return last_outcomes_; }
    /// Score of each offer under the last select_arm call, in offer order.
    const std::vector<double>& last_scores() const { return last_scores_; }

private:
    PolicyConfig config_;
    int num_agents_;
    DesignState global_;
    std::vector<AgentLedger> ledgers_;
    std::vector<AgentId> active_;
    std::optional<AgentId> observed_this_round_;
    std::vector<LoomOutcome> last_outcomes_;
    std::vector<double> last_scores_;
};

}  // namespace cobra
