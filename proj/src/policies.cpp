#include "cobra/policies.hpp"

#include <algorithm>
#include <limits>

namespace cobra {

std::string to_string(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::cobra_ucb: return "cobra_ucb";
        case PolicyKind::cobra_ts: return "cobra_ts";
        case PolicyKind::lin_ucb: return "lin_ucb";
        case PolicyKind::lin_ts: return "lin_ts";
    }
    return "?";
}

PolicyKind policy_kind_from_string(const std::string& name) {
    if (name == "cobra_ucb") return PolicyKind::cobra_ucb;
    if (name == "cobra_ts") return PolicyKind::cobra_ts;
    if (name == "lin_ucb") return PolicyKind::lin_ucb;
    if (name == "lin_ts") return PolicyKind::lin_ts;
    throw std::invalid_argument("unknown algorithm '" + name + "'");
}

std::string to_string(CheckScope scope) { return scope == CheckScope::all ? "all" : "selected"; }

CheckScope check_scope_from_string(const std::string& name) {
    if (name == "all") return CheckScope::all;
    if (name == "selected") return CheckScope::selected;
    throw std::invalid_argument("unknown loom_check_scope '" + name + "'");
}

PolicyConfig PolicyConfig::make(PolicyKind kind, const ConfidenceParams& confidence,
                                CheckScope scope) {
    return PolicyConfig{kind, confidence, is_cobra(kind), scope};
}

void PolicyConfig::validate() const {
    confidence.validate();
    if (loom_enabled != is_cobra(kind))
        throw std::invalid_argument("loom_enabled must be set exactly for cobra policies");
}

LinearConfidenceBound::LinearConfidenceBound(const DesignState& pool, double alpha)
    : pool_(&pool), theta_(fit_theta(pool)), alpha_(alpha) {}

double LinearConfidenceBound::estimate(const Vec& x) const { return theta_.mean.dot(x); }

double LinearConfidenceBound::half_width(const Vec& x) const {
    return alpha_ * weighted_norm(x, *pool_);
}

Policy::Policy(PolicyConfig config, int num_agents, int dim)
    : config_(std::move(config)),
      num_agents_(num_agents),
      global_(dim, config_.confidence.lambda) {
    config_.validate();
    if (num_agents < 1) throw std::invalid_argument("Policy: need at least one agent");
    if (dim != config_.confidence.dim)
        throw std::invalid_argument("Policy: dim differs from confidence params");
    ledgers_.reserve(num_agents);
    for (AgentId a = 0; a < num_agents; ++a) {
        ledgers_.emplace_back(a, dim);
        active_.push_back(a);
    }
}

bool Policy::is_active(AgentId a) const {
    return std::binary_search(active_.begin(), active_.end(), a);
}

std::optional<AgentId> Policy::select_arm(std::span<const Offer> offers, Rng& rng) {
    last_scores_.clear();
    if (stopped() || offers.empty()) return std::nullopt;
    for (const auto& o : offers)
        if (!is_active(o.agent_id))
            throw InvalidStateError("select_arm: offer from inactive agent " +
                                    std::to_string(o.agent_id));

    const ConfidenceParams& p = config_.confidence;
    last_scores_.reserve(offers.size());
    if (is_thompson(config_.kind)) {
        const ThetaEstimate theta = fit_theta(global_);
        const double beta = beta_schedule(p, global_.count() + 1);
        const Vec sample = ts_draw(theta, global_, beta, rng);
        for (const auto& o : offers) last_scores_.push_back(sample.dot(o.x));
    } else {
        const LinearConfidenceBound bound(global_, alpha_radius(p, static_cast<double>(global_.count())));
        for (const auto& o : offers) last_scores_.push_back(bound.upper(o.x));
    }

    AgentId best = -1;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < offers.size(); ++i) {
        const double s = last_scores_[i];
        const AgentId id = offers[i].agent_id;
        if (best < 0 || s > best_score || (s == best_score && id < best)) {
            best = id;
            best_score = s;
        }
    }
    return best;
}

void Policy::observe(AgentId agent, const Vec& x_reported, double y) {
    if (agent < 0 || agent >= num_agents_ || !is_active(agent))
        throw InvalidStateError("observe: agent " + std::to_string(agent) + " is not active");
    global_.update(x_reported, y);
    ledgers_[static_cast<std::size_t>(agent)].record(x_reported, y);
    observed_this_round_ = agent;
}

std::vector<AgentId> Policy::post_round() {
    last_outcomes_.clear();
    const auto selected = observed_this_round_;
    observed_this_round_.reset();
    if (!config_.loom_enabled || !selected) return {};

    const LoomSchedule schedule{config_.confidence.delta, num_agents_};
    const std::uint64_t t = global_.count();
    if (config_.loom_check_scope == CheckScope::all) {
        for (AgentId a : active_)
            last_outcomes_.push_back(loom_check(ledgers_[a], global_, config_.confidence, t, schedule));
    } else {
        last_outcomes_.push_back(
            loom_check(ledgers_[*selected], global_, config_.confidence, t, schedule));
    }
    auto removed = apply_elimination(active_, last_outcomes_);
    for (AgentId a : removed) ledgers_[a].deactivate();
    return removed;
}

AssumptionDiagnostics Policy::assumption_monitor(std::span<const Offer> offers, AgentId selected,
                                                 const Vec& theta_eff) const {
    AssumptionDiagnostics diag;
    const ConfidenceParams& p = config_.confidence;
    const LinearConfidenceBound full(global_, alpha_radius(p, static_cast<double>(global_.count())));
    for (const auto& o : offers) {
        ++diag.offers_checked;
        if (theta_eff.dot(o.x) > full.upper(o.x)) ++diag.optimism_violations;
    }
    for (const auto& o : offers) {
        if (o.agent_id != selected) continue;
        const AgentLedger& led = ledgers_.at(static_cast<std::size_t>(selected));
        const DesignState loo = loo_design(global_, led);
        const LinearConfidenceBound partial(loo, loo_alpha(p, global_.count(), led.pull_count()));
        diag.loo_ordering_holds = full.upper(o.x) <= partial.upper(o.x);
    }
    return diag;
}

}  // namespace cobra
