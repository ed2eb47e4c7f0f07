#include "cobra/env.hpp"

#include <cmath>
#include <stdexcept>

namespace cobra {

namespace {

Vec uniform_vec(int n, double lo, double hi, Rng& rng) {
    std::uniform_real_distribution<double> u(lo, hi);
    Vec v(n);
    for (int i = 0; i < n; ++i) {
        // uniform_real_distribution is half-open; the instance wants (lo, hi).
        double s = u(rng);
        while (s <= lo) s = u(rng);
        v(i) = s;
    }
    return v;
}

Vec raw_to_feature(const ProblemInstance& inst, const Vec& context, const Vec& agent) {
    Vec raw(inst.raw_dim());
    raw << context, agent;
    return inst.lift == Lift::none ? raw : poly_lift(raw);
}

}  // namespace

void Strategy::validate() const {
    if (kind == StrategyKind::over_report) {
        if (!(eta >= 0.0) || !(eps_eta >= 0.0))
            throw std::invalid_argument("over_report strategy needs eta >= 0 and eps_eta >= 0");
    }
}

std::string to_string(Lift lift) {
    return lift == Lift::none ? "none" : "subset_products_deg3";
}

Lift lift_from_string(const std::string& name) {
    if (name == "none" || name == "false" || name == "0") return Lift::none;
    if (name == "subset_products_deg3" || name == "poly" || name == "true" || name == "1")
        return Lift::subset_products_deg3;
    throw std::invalid_argument("unknown lift '" + name + "'");
}

void InstanceSpec::validate() const {
    if (d_c < 1 || d_n < 1) throw std::invalid_argument("d_c and d_n must be >= 1");
    if (num_agents < 1) throw std::invalid_argument("num_agents must be >= 1");
    if (!(reward_scale > 0.0)) throw std::invalid_argument("reward_scale must be > 0");
    if (!(noise_scale >= 0.0)) throw std::invalid_argument("noise_scale must be >= 0");
    if (!strategies.empty() && static_cast<int>(strategies.size()) != num_agents)
        throw std::invalid_argument("strategies must be empty or one per agent");
    for (const auto& s : strategies) s.validate();
}

double ProblemInstance::feature_bound() const {
    const int d = raw_dim();
    if (lift == Lift::none) return 2.0 * std::sqrt(static_cast<double>(d));
    // Each subset product of size k is bounded by 2^k.
    const double dd = d;
    const double singles = dd;
    const double pairs = dd * (dd - 1.0) / 2.0;
    const double triples = dd * (dd - 1.0) * (dd - 2.0) / 6.0;
    return std::sqrt(4.0 * singles + 16.0 * pairs + 64.0 * triples);
}

int lifted_dim(int d) {
    return d + d * (d - 1) / 2 + d * (d - 1) * (d - 2) / 6;
}

Vec poly_lift(const Vec& x) {
    const auto d = static_cast<int>(x.size());
    if (d < 1) throw std::invalid_argument("poly_lift: empty input");
    Vec out(lifted_dim(d));
    int k = 0;
    for (int i = 0; i < d; ++i) out(k++) = x(i);
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j) out(k++) = x(i) * x(j);
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j)
            for (int l = j + 1; l < d; ++l) out(k++) = x(i) * x(j) * x(l);
    return out;
}

ProblemInstance gen_instance(const InstanceSpec& spec, std::uint64_t seed) {
    spec.validate();
    Rng rng(seed);
    ProblemInstance inst;
    inst.d_c = spec.d_c;
    inst.d_n = spec.d_n;
    inst.reward_scale = spec.reward_scale;
    inst.noise_scale = spec.noise_scale;
    inst.lift = spec.lift;
    inst.strategies = spec.strategies.empty()
                          ? std::vector<Strategy>(spec.num_agents, Strategy::truthful())
                          : spec.strategies;
    inst.agent_features.reserve(spec.num_agents);
    for (int n = 0; n < spec.num_agents; ++n)
        inst.agent_features.push_back(uniform_vec(spec.d_n, 0.0, 2.0, rng));
    const int d = spec.lift == Lift::none ? spec.d_c + spec.d_n : lifted_dim(spec.d_c + spec.d_n);
    Vec theta = uniform_vec(d, 0.0, 2.0, rng);
    inst.theta_star = theta / theta.norm();
    return inst;
}

Vec apply_strategy(const Strategy& strategy, const Vec& x_true, Rng& rng) {
    if (strategy.kind == StrategyKind::truthful) return x_true;
    double a = strategy.eta;
    if (strategy.eps_eta > 0.0) {
        std::uniform_real_distribution<double> u(strategy.eta, strategy.eta + strategy.eps_eta);
        a = u(rng);
    }
    return (1.0 + a) * x_true;
}

std::vector<RoundOffer> sample_round(const ProblemInstance& instance, Rng& context_rng,
                                     std::span<Rng> report_rngs) {
    if (static_cast<int>(report_rngs.size()) != instance.num_agents())
        throw std::invalid_argument("sample_round: need one report stream per agent");
    const Vec context = uniform_vec(instance.d_c, 0.0, 2.0, context_rng);
    std::vector<RoundOffer> offers;
    offers.reserve(instance.num_agents());
    for (int n = 0; n < instance.num_agents(); ++n) {
        RoundOffer o;
        o.agent_id = n;
        o.x_true = raw_to_feature(instance, context, instance.agent_features[n]);
        o.x_reported = apply_strategy(instance.strategies[n], o.x_true, report_rngs[n]);
        offers.push_back(std::move(o));
    }
    return offers;
}

std::vector<RoundOffer> sample_round(const ProblemInstance& instance, Rng& rng) {
    const Vec context = uniform_vec(instance.d_c, 0.0, 2.0, rng);
    std::vector<RoundOffer> offers;
    offers.reserve(instance.num_agents());
    for (int n = 0; n < instance.num_agents(); ++n) {
        RoundOffer o;
        o.agent_id = n;
        o.x_true = raw_to_feature(instance, context, instance.agent_features[n]);
        o.x_reported = apply_strategy(instance.strategies[n], o.x_true, rng);
        offers.push_back(std::move(o));
    }
    return offers;
}

double true_reward(const ProblemInstance& instance, const Vec& x_true) {
    if (x_true.size() != instance.dim())
        throw std::invalid_argument("true_reward: feature dimension " +
                                    std::to_string(x_true.size()) + " != " +
                                    std::to_string(instance.dim()));
    return instance.reward_scale * x_true.dot(instance.theta_star);
}

double sample_reward(const ProblemInstance& instance, const Vec& x_true, Rng& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double z = gauss(rng);
    return true_reward(instance, x_true) + instance.noise_scale * z;
}

}  // namespace cobra
