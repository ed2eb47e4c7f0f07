// cobra-bench: run strategic contextual bandit experiments from a config file.
//
//   cobra-bench run   --config exp.cfg [--T 2000 --algos cobra_ucb,lin_ucb ...]
//   cobra-bench probe --config exp.cfg [--probe-eta 0.5 --probe-eps-eta 0.1]

#include "cobra/harness.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <map>

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;

struct Overrides {
    std::string config_path;
    std::map<std::string, std::string> fields;
};

void add_overrides(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--config", o.config_path, "key = value experiment file");
    for (const char* key : {"T", "N", "dc", "dn", "lambda", "noise", "delta", "scale", "eta",
                            "eps-eta", "reps", "seed", "algos", "lift", "out-dir", "misreporters",
                            "loom_check_scope", "threads", "probe_agent"}) {
        cmd->add_option(std::string("--") + key, o.fields[key]);
    }
}

cobra::ExperimentConfig resolve(CLI::App* cmd, const Overrides& o) {
    cobra::ExperimentConfig cfg;
    if (!o.config_path.empty()) cfg = cobra::load_config(o.config_path);
    for (const auto& [key, value] : o.fields)
        if (cmd->count(std::string("--") + key) > 0) cobra::set_config_field(cfg, key, value);
    cfg.validate();
    return cfg;
}

void print_finals(const cobra::AggregateResult& agg) {
    for (const auto& a : agg.algos) {
        if (a.mean_cum_regret.empty()) continue;
        const auto last = a.mean_cum_regret.size() - 1;
        int elim = 0;
        for (int e : a.eliminations) elim += e;
        std::printf("%-10s final mean regret %.4f +/- %.4f  eliminations %d\n",
                    cobra::to_string(a.algo).c_str(), a.mean_cum_regret[last],
                    a.ci_half_width[last], elim);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Strategic contextual bandit benchmark"};
    app.require_subcommand(1);

    Overrides run_opts;
    auto* run = app.add_subcommand("run", "run an experiment and write CSV/JSON outputs");
    add_overrides(run, run_opts);

    Overrides probe_opts;
    double probe_eta = 0.5;
    double probe_eps = 0.0;
    auto* probe = app.add_subcommand("probe", "paired truthful vs deviating run for one agent");
    add_overrides(probe, probe_opts);
    probe->add_option("--probe-eta", probe_eta, "over-report eta of the probe agent");
    probe->add_option("--probe-eps-eta", probe_eps, "over-report eps_eta of the probe agent");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }

    try {
        if (*run) {
            const auto cfg = resolve(run, run_opts);
            const auto result = cobra::run_experiment(cfg);
            cobra::write_outputs(result);
            print_finals(result.aggregate);
            std::printf("wrote %s\n", cfg.out_dir.c_str());
        } else if (*probe) {
            const auto cfg = resolve(probe, probe_opts);
            const auto deviation = probe_eta == 0.0 && probe_eps == 0.0
                                       ? cobra::Strategy::truthful()
                                       : cobra::Strategy::over_report(probe_eta, probe_eps);
            const auto rep = cobra::ne_deviation_probe(cfg, deviation);
            std::printf("algo %s probe agent %d\n", cobra::to_string(rep.algo).c_str(), rep.probe_agent);
            std::printf("E[S_T | truthful] = %.3f\nE[S_T | deviate]  = %.3f\ngain = %.3f\n",
                        rep.mean_truthful, rep.mean_deviating, rep.gain);
            for (std::size_t r = 0; r < rep.truthful_pulls.size(); ++r)
                std::printf("rep %zu: truthful %llu deviate %llu\n", r,
                            static_cast<unsigned long long>(rep.truthful_pulls[r]),
                            static_cast<unsigned long long>(rep.deviating_pulls[r]));
        }
    } catch (const cobra::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const cobra::IoError& e) {
        std::cerr << "I/O error: " << e.what() << '\n';
        return kExitIo;
    }
    return 0;
}
