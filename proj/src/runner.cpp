#include "cobra/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

namespace cobra {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::vector<Offer> to_offers(std::span<const RoundOffer> offers, const Policy& policy) {
    std::vector<Offer> out;
    out.reserve(offers.size());
    for (const auto& o : offers)
        if (policy.is_active(o.agent_id)) out.push_back(Offer{o.agent_id, o.x_reported});
    return out;
}

// Runs fn(i) for i in [0, n) on up to `threads` workers.
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
    unsigned workers = threads > 0 ? static_cast<unsigned>(threads)
                                   : std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n && !failed; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    if (!failed.exchange(true)) error = std::current_exception();
                }
            }
        });
    }
    pool.clear();
    if (error) std::rethrow_exception(error);
}

}  // namespace

std::uint64_t derive_seed(std::initializer_list<std::uint64_t> words) {
    std::uint64_t h = 0x6a09e667f3bcc908ULL;
    for (auto w : words) h = splitmix64(h ^ splitmix64(w));
    return h;
}

EpisodeStreams EpisodeStreams::make(std::uint64_t env_seed, std::uint64_t policy_seed,
                                    int num_agents) {
    EpisodeStreams s{Rng(derive_seed({env_seed, 1})), Rng(derive_seed({env_seed, 2})),
                     Rng(policy_seed), {}};
    s.reports.reserve(static_cast<std::size_t>(num_agents));
    for (int n = 0; n < num_agents; ++n)
        s.reports.emplace_back(derive_seed({env_seed, 100, static_cast<std::uint64_t>(n)}));
    return s;
}

std::vector<double> EpisodeTrace::cum_regret_series() const {
    std::vector<double> out;
    out.reserve(rounds.size());
    for (const auto& r : rounds) out.push_back(r.cum_regret);
    return out;
}

EpisodeTrace run_episode(const ExperimentConfig& config, const ProblemInstance& instance,
                         PolicyKind algo, EpisodeStreams streams,
                         const SelectionOverride& override_selection) {
    const ConfidenceParams params = config.confidence(instance);
    Policy policy(PolicyConfig::make(algo, params, config.loom_check_scope), instance.num_agents(),
                  instance.dim());
    const Vec theta_eff = instance.reward_scale * instance.theta_star;

    EpisodeTrace trace;
    trace.algo = algo;
    trace.rounds.reserve(config.T);
    trace.pulls.assign(static_cast<std::size_t>(instance.num_agents()), 0);
    double cum = 0.0;

    for (std::uint64_t t = 1; t <= config.T; ++t) {
        const auto round_offers = sample_round(instance, streams.context, streams.reports);
        RoundRecord rec;
        rec.round = t;

        double best = -std::numeric_limits<double>::infinity();
        for (const auto& o : round_offers)
            if (policy.stopped() || policy.is_active(o.agent_id))
                best = std::max(best, true_reward(instance, o.x_true));
        rec.best_true_reward = best;

        const auto offers = to_offers(round_offers, policy);
        std::optional<AgentId> choice;
        if (override_selection) {
            if (!policy.stopped()) {
                std::vector<RoundOffer> visible;
                for (const auto& o : round_offers)
                    if (policy.is_active(o.agent_id)) visible.push_back(o);
                choice = override_selection(instance, visible);
            }
        } else {
            choice = policy.select_arm(offers, streams.policy);
        }

        if (choice) {
            const auto it = std::find_if(round_offers.begin(), round_offers.end(),
                                         [&](const RoundOffer& o) { return o.agent_id == *choice; });
            if (!policy.last_scores().empty()) {
                for (std::size_t i = 0; i < offers.size(); ++i)
                    if (offers[i].agent_id == *choice) rec.selected_score = policy.last_scores()[i];
            }
            if (config.monitor_assumptions)
                rec.diagnostics = policy.assumption_monitor(offers, *choice, theta_eff);
            rec.selected = choice;
            rec.selected_true_reward = true_reward(instance, it->x_true);
            rec.observed_reward = sample_reward(instance, it->x_true, streams.noise);
            policy.observe(*choice, it->x_reported, rec.observed_reward);
            ++trace.pulls[static_cast<std::size_t>(*choice)];
            rec.eliminated = policy.post_round();
            for (AgentId a : rec.eliminated) {
                Elimination e{t, a, {}};
                for (const auto& o : policy.last_outcomes())
                    if (o.agent_id == a) e.outcome = o;
                trace.eliminations.push_back(e);
            }
        } else {
            ++trace.stopped_rounds;
        }

        rec.regret_inc = rec.best_true_reward - rec.selected_true_reward;
        cum += rec.regret_inc;
        rec.cum_regret = cum;
        trace.rounds.push_back(std::move(rec));
    }
    return trace;
}

const AlgoAggregate& AggregateResult::at(PolicyKind kind) const {
    for (const auto& a : algos)
        if (a.algo == kind) return a;
    throw std::out_of_range("no aggregate for algorithm " + to_string(kind));
}

SeedRecord seeds_for(const ExperimentConfig& config, std::size_t algo_index, int rep) {
    SeedRecord s;
    s.algo = config.algos.at(algo_index);
    s.rep = rep;
    const auto r = static_cast<std::uint64_t>(rep);
    s.instance_seed = config.fix_instance_across_reps ? derive_seed({config.seed, 0})
                                                      : derive_seed({config.seed, 0, r});
    s.env_seed = derive_seed({config.seed, 1, r});
    s.policy_seed = derive_seed({config.seed, 2, static_cast<std::uint64_t>(algo_index), r});
    return s;
}

AggregateResult aggregate(const std::vector<std::vector<EpisodeTrace>>& traces,
                          const std::vector<PolicyKind>& algos, std::uint64_t T) {
    AggregateResult result;
    for (std::size_t k = 0; k < algos.size(); ++k) {
        const auto& reps = traces.at(k);
        AlgoAggregate agg;
        agg.algo = algos[k];
        agg.mean_cum_regret.assign(T, 0.0);
        agg.ci_half_width.assign(T, 0.0);
        const double n = static_cast<double>(reps.size());
        for (std::uint64_t t = 0; t < T; ++t) {
            double sum = 0.0;
            for (const auto& tr : reps) sum += tr.rounds.at(t).cum_regret;
            const double mean = reps.empty() ? 0.0 : sum / n;
            double ss = 0.0;
            for (const auto& tr : reps) {
                const double dv = tr.rounds[t].cum_regret - mean;
                ss += dv * dv;
            }
            agg.mean_cum_regret[t] = mean;
            agg.ci_half_width[t] = reps.size() > 1 ? 1.96 * std::sqrt(ss / (n - 1.0)) / std::sqrt(n) : 0.0;
        }
        for (const auto& tr : reps) {
            agg.final_regrets.push_back(tr.final_regret());
            agg.eliminations.push_back(static_cast<int>(tr.eliminations.size()));
        }
        result.algos.push_back(std::move(agg));
    }
    return result;
}

ExperimentRun run_experiment(const ExperimentConfig& config) {
    config.validate();
    ExperimentRun run;
    run.config = config;
    const std::size_t n_algos = config.algos.size();
    const auto reps = static_cast<std::size_t>(config.reps);
    run.traces.assign(n_algos, std::vector<EpisodeTrace>(reps));
    for (std::size_t k = 0; k < n_algos; ++k)
        for (int r = 0; r < config.reps; ++r) run.seeds.push_back(seeds_for(config, k, r));

    const InstanceSpec spec = config.instance_spec();
    parallel_for(n_algos * reps, config.threads, [&](std::size_t job) {
        const SeedRecord& s = run.seeds[job];
        const std::size_t k = job / reps;
        const ProblemInstance instance = gen_instance(spec, s.instance_seed);
        run.traces[k][static_cast<std::size_t>(s.rep)] =
            run_episode(config, instance, s.algo,
                        EpisodeStreams::make(s.env_seed, s.policy_seed, instance.num_agents()));
    });
    run.aggregate = aggregate(run.traces, config.algos, config.T);
    return run;
}

DeviationReport ne_deviation_probe(const ExperimentConfig& config, const Strategy& deviation) {
    config.validate();
    deviation.validate();
    DeviationReport report;
    report.algo = config.algos.front();
    report.probe_agent = config.probe_agent;
    report.deviation = deviation;
    const auto reps = static_cast<std::size_t>(config.reps);
    report.truthful_pulls.assign(reps, 0);
    report.deviating_pulls.assign(reps, 0);

    InstanceSpec truthful = config.instance_spec();
    truthful.strategies.assign(static_cast<std::size_t>(config.N), Strategy::truthful());
    InstanceSpec deviating = truthful;
    deviating.strategies[static_cast<std::size_t>(config.probe_agent)] = deviation;

    parallel_for(2 * reps, config.threads, [&](std::size_t job) {
        const int rep = static_cast<int>(job / 2);
        const bool deviate = job % 2 == 1;
        const SeedRecord s = seeds_for(config, 0, rep);
        const ProblemInstance instance = gen_instance(deviate ? deviating : truthful, s.instance_seed);
        const EpisodeTrace tr =
            run_episode(config, instance, report.algo,
                        EpisodeStreams::make(s.env_seed, s.policy_seed, instance.num_agents()));
        auto& slot = deviate ? report.deviating_pulls : report.truthful_pulls;
        slot[static_cast<std::size_t>(rep)] = tr.pulls[static_cast<std::size_t>(config.probe_agent)];
    });

    auto mean = [](const std::vector<std::uint64_t>& v) {
        return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    };
    report.mean_truthful = mean(report.truthful_pulls);
    report.mean_deviating = mean(report.deviating_pulls);
    report.gain = report.mean_deviating - report.mean_truthful;
    return report;
}

}  // namespace cobra
