#pragma once

// Seeded experiment runner: episodes, repetitions, aggregation and output.

#include "cobra/env.hpp"
#include "cobra/policies.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cobra {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
    std::uint64_t T = 1000;
    int N = 5;
    int d_c = 5;
    int d_n = 5;
    double lambda = 0.01;
    double R = 0.1;
    double delta = 0.05;
    double reward_scale = 5.0;
    double eta = 0.1;
    double eps_eta = 0.1;
    int reps = 20;
    std::uint64_t seed = 1;
    std::vector<PolicyKind> algos{PolicyKind::cobra_ucb, PolicyKind::cobra_ts,
                                  PolicyKind::lin_ucb, PolicyKind::lin_ts};
    Lift lift = Lift::none;
    /// Number of agents (lowest ids first) that over-report; -1 means all.
    int misreporters = -1;
    CheckScope loom_check_scope = CheckScope::all;
    bool fix_instance_across_reps = false;
    bool monitor_assumptions = false;
    /// Agent whose reports are altered by ne_deviation_probe.
    int probe_agent = 0;
    /// Worker threads; 0 uses the hardware concurrency.
    int threads = 0;
    std::string out_dir = "out";

    void validate() const;
    /// Strategies implied by eta, eps_eta and misreporters.
    std::vector<Strategy> strategies() const;
    InstanceSpec instance_spec() const;
    ConfidenceParams confidence(const ProblemInstance& instance) const;
};

/// Sets one field from its textual value. Accepts the field names above plus
/// the command-line spellings (dc, dn, noise, scale, eps-eta, out-dir).
/// Throws ConfigError on unknown keys or malformed values.
void set_config_field(ExperimentConfig& config, const std::string& key, const std::string& value);

/// Parses `key = value` lines; '#' starts a comment.
ExperimentConfig parse_config(const std::string& text, ExperimentConfig base = {});
ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base = {});

/// Every field as a flat JSON object.
std::string config_to_json(const ExperimentConfig& config);

/// Stable 64-bit mix of a sequence of words (splitmix64 chaining).
std::uint64_t derive_seed(std::initializer_list<std::uint64_t> words);

/// Independent random streams for one episode.
struct EpisodeStreams {
    Rng context;
    Rng noise;
    Rng policy;
    std::vector<Rng> reports;  // one per agent

    /// Environment streams come from `env_seed`, the policy stream from
    /// `policy_seed`.
    static EpisodeStreams make(std::uint64_t env_seed, std::uint64_t policy_seed, int num_agents);
};

struct RoundRecord {
    std::uint64_t round = 0;              // 1-based
    std::optional<AgentId> selected;      // empty once stopped
    double selected_score = 0.0;          // policy score of the selected report
    double selected_true_reward = 0.0;    // f(x*) of the selection, 0 when stopped
    double best_true_reward = 0.0;        // benchmark for the round
    double observed_reward = 0.0;         // y_t, 0 when stopped
    double regret_inc = 0.0;
    double cum_regret = 0.0;
    std::vector<AgentId> eliminated;
    std::optional<AssumptionDiagnostics> diagnostics;
};

struct Elimination {
    std::uint64_t round = 0;
    AgentId agent = -1;
    LoomOutcome outcome;
};

struct EpisodeTrace {
    PolicyKind algo = PolicyKind::cobra_ucb;
    std::vector<RoundRecord> rounds;
    std::vector<std::uint64_t> pulls;  // S_T(a)
    std::vector<Elimination> eliminations;
    std::uint64_t stopped_rounds = 0;

    double final_regret() const { return rounds.empty() ? 0.0 : rounds.back().cum_regret; }
    std::vector<double> cum_regret_series() const;
};

/// Replaces the policy's choice; used for oracle baselines in tests.
using SelectionOverride =
    std::function<std::optional<AgentId>(const ProblemInstance&, std::span<const RoundOffer>)>;

/// One episode of `config.T` rounds. The regret benchmark in each round is
/// the best true reward among active agents' offers, or among all offers once
/// every agent has been eliminated (the policy then earns nothing).
EpisodeTrace run_episode(const ExperimentConfig& config, const ProblemInstance& instance,
                         PolicyKind algo, EpisodeStreams streams,
                         const SelectionOverride& override_selection = {});

struct AlgoAggregate {
    PolicyKind algo = PolicyKind::cobra_ucb;
    std::vector<double> mean_cum_regret;  // per round
    std::vector<double> ci_half_width;    // 1.96 s / sqrt(reps)
    std::vector<double> final_regrets;    // per rep
    std::vector<int> eliminations;        // per rep
};

struct AggregateResult {
    std::vector<AlgoAggregate> algos;

    const AlgoAggregate& at(PolicyKind kind) const;
};

struct SeedRecord {
    PolicyKind algo;
    int rep = 0;
    std::uint64_t instance_seed = 0;
    std::uint64_t env_seed = 0;
    std::uint64_t policy_seed = 0;
};

struct ExperimentRun {
    ExperimentConfig config;
    AggregateResult aggregate;
    std::vector<std::vector<EpisodeTrace>> traces;  // [algo][rep]
    std::vector<SeedRecord> seeds;
};

/// Seeds for (algo_index, rep). Environment and instance seeds ignore the
/// algorithm index so all algorithms face the same draws.
SeedRecord seeds_for(const ExperimentConfig& config, std::size_t algo_index, int rep);

AggregateResult aggregate(const std::vector<std::vector<EpisodeTrace>>& traces,
                          const std::vector<PolicyKind>& algos, std::uint64_t T);

/// Runs every (algo, rep) episode on a worker pool. Does not write files.
ExperimentRun run_experiment(const ExperimentConfig& config);

/// Writes summary.csv, trace_<algo>_<rep>.csv and run.json into
/// config.out_dir. Throws IoError naming the failing path.
void write_outputs(const ExperimentRun& run);

/// Formats a double as its shortest round-trip decimal.
std::string format_double(double v);

/// summary.csv text for the aggregates.
std::string summary_csv(const AggregateResult& result);

/// Parses summary.csv text back into per-algo series.
AggregateResult parse_summary_csv(const std::string& text);

struct DeviationReport {
    PolicyKind algo = PolicyKind::cobra_ucb;
    AgentId probe_agent = 0;
    Strategy deviation;
    std::vector<std::uint64_t> truthful_pulls;  // per rep
    std::vector<std::uint64_t> deviating_pulls; // per rep
    double mean_truthful = 0.0;
    double mean_deviating = 0.0;
    double gain = 0.0;  // mean_deviating - mean_truthful
};

/// Paired runs of the first configured algorithm: everybody truthful versus
/// only `config.probe_agent` following `deviation`, with common random
/// numbers for everything except the probe's own reports.
DeviationReport ne_deviation_probe(const ExperimentConfig& config, const Strategy& deviation);

}  // namespace cobra
