// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any fails (including runtime budget overruns).

#include "cobra/harness.hpp"
#include "cobra/loom.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

using namespace cobra;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void run_criterion(int id, const std::string& name, double budget_s, const std::function<Outcome()>& body) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
        out = body();
    } catch (const std::exception& e) {
        out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs <= budget_s;
    const bool pass = out.pass && in_time;
    if (!pass) ++failures;
    std::printf("[%s] %2d %s: %s (%.1f s, budget %.0f s%s)\n", pass ? "PASS" : "FAIL", id, name.c_str(),
                out.detail.c_str(), secs, budget_s, in_time ? "" : ", over budget");
    std::fflush(stdout);
}

std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

std::string fmt(double v, int prec = 4) {
    std::ostringstream os;
    os.precision(prec);
    os << std::fixed << v;
    return os.str();
}

Vec uniform_vec(int d, Rng& rng) {
    std::uniform_real_distribution<double> u(0.0, 2.0);
    Vec v(d);
    for (int i = 0; i < d; ++i) v(i) = u(rng);
    return v;
}

struct DenseFit {
    Mat gram;
    Vec theta;
};

DenseFit dense_fit(const std::vector<Vec>& xs, const std::vector<double>& ys, double lambda) {
    const int d = static_cast<int>(xs.front().size());
    Mat X(static_cast<Eigen::Index>(xs.size()), d);
    Vec y(static_cast<Eigen::Index>(ys.size()));
    for (std::size_t i = 0; i < xs.size(); ++i) {
        X.row(static_cast<Eigen::Index>(i)) = xs[i].transpose();
        y(static_cast<Eigen::Index>(i)) = ys[i];
    }
    // Ridge as an augmented least-squares problem, solved by QR.
    Mat A(X.rows() + d, d);
    A << X, std::sqrt(lambda) * Mat::Identity(d, d);
    Vec b(y.size() + d);
    b << y, Vec::Zero(d);
    return {X.transpose() * X + lambda * Mat::Identity(d, d), A.colPivHouseholderQr().solve(b)};
}

// Mean final regret sequence is nondecreasing except for at most one step
// down whose confidence intervals overlap.
bool monotone_with_one_overlap(const std::vector<double>& m, const std::vector<double>& w) {
    int inversions = 0;
    for (std::size_t i = 0; i + 1 < m.size(); ++i) {
        if (m[i + 1] >= m[i]) continue;
        ++inversions;
        if (m[i] - w[i] > m[i + 1] + w[i + 1]) return false;
    }
    return inversions <= 1;
}

std::string series(const std::vector<double>& m, const std::vector<double>& w) {
    std::string s;
    for (std::size_t i = 0; i < m.size(); ++i) s += (i ? ", " : "") + fmt(m[i], 1) + "+/-" + fmt(w[i], 1);
    return s;
}

int zero_elimination_reps(const AlgoAggregate& a) {
    int n = 0;
    for (int e : a.eliminations) n += e == 0;
    return n;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

int main() {
    run_criterion(1, "estimator oracle equivalence", 5.0, [] {
        Rng rng(11);
        std::normal_distribution<double> noise(0.0, 0.1);
        const double lambda = 0.01;
        auto s = init_design(10, lambda);
        std::vector<Vec> xs;
        std::vector<double> ys;
        double worst = 0.0;
        for (int i = 0; i < 1000; ++i) {
            const Vec x = uniform_vec(10, rng);
            const double y = x.sum() + noise(rng);
            update_design(s, x, y);
            xs.push_back(x);
            ys.push_back(y);
            if ((i + 1) % 100 == 0) {
                const auto ref = dense_fit(xs, ys, lambda);
                const Mat inv = ref.gram.inverse();
                worst = std::max(worst, (s.gram_inv() - inv).cwiseAbs().maxCoeff());
                worst = std::max(worst, (fit_theta(s).mean - ref.theta).cwiseAbs().maxCoeff());
            }
        }
        return Outcome{worst <= 1e-8, "max abs error " + sci(worst)};
    });

    run_criterion(2, "leave-one-out exactness", 30.0, [] {
        Rng rng(22);
        std::uniform_int_distribution<int> pick(0, 4);
        std::normal_distribution<double> noise(0.0, 0.1);
        const double lambda = 0.01;
        double worst = 0.0;
        for (int h = 0; h < 100; ++h) {
            auto g = init_design(5, lambda);
            std::vector<AgentLedger> ledgers;
            for (int a = 0; a < 5; ++a) ledgers.emplace_back(a, 5);
            std::vector<std::vector<Vec>> xs(5);
            std::vector<std::vector<double>> ys(5);
            for (int t = 0; t < 200; ++t) {
                const int a = pick(rng);
                const Vec x = uniform_vec(5, rng);
                const double y = x.sum() + noise(rng);
                update_design(g, x, y);
                ledgers[a].record(x, y);
                xs[a].push_back(x);
                ys[a].push_back(y);
            }
            for (int a = 0; a < 5; ++a) {
                std::vector<Vec> ox;
                std::vector<double> oy;
                for (int b = 0; b < 5; ++b) {
                    if (b == a) continue;
                    ox.insert(ox.end(), xs[b].begin(), xs[b].end());
                    oy.insert(oy.end(), ys[b].begin(), ys[b].end());
                }
                const auto ref = dense_fit(ox, oy, lambda);
                const auto loo = loo_design(g, ledgers[a]);
                worst = std::max(worst, (fit_theta(loo).mean - ref.theta).cwiseAbs().maxCoeff());
                worst = std::max(worst, (loo.gram_inv() - ref.gram.inverse()).cwiseAbs().maxCoeff());
            }
        }
        return Outcome{worst <= 1e-8, "max abs error " + sci(worst)};
    });

    run_criterion(3, "confidence coverage", 300.0, [] {
        // Truthful Lin-UCB runs (d=5, N=5, T=200); after the last round the
        // bound |x^T(theta_hat - theta)| <= alpha ||x||_{V^-1} is checked at
        // the fixed probe x = 1.
        ExperimentConfig c;
        c.T = 200;
        c.d_c = 3;
        c.d_n = 2;
        c.misreporters = 0;
        const int runs = 10000;
        int violations = 0;
        const Vec probe = Vec::Ones(5);
        for (int r = 0; r < runs; ++r) {
            const auto inst = gen_instance(c.instance_spec(), derive_seed({7, 0, static_cast<std::uint64_t>(r)}));
            const auto params = c.confidence(inst);
            Policy policy(PolicyConfig::make(PolicyKind::lin_ucb, params), c.N, inst.dim());
            auto streams = EpisodeStreams::make(derive_seed({7, 1, static_cast<std::uint64_t>(r)}),
                                                derive_seed({7, 2, static_cast<std::uint64_t>(r)}), c.N);
            for (std::uint64_t t = 0; t < c.T; ++t) {
                const auto round = sample_round(inst, streams.context, streams.reports);
                std::vector<Offer> offers;
                for (const auto& o : round) offers.push_back({o.agent_id, o.x_reported});
                const auto sel = policy.select_arm(offers, streams.policy);
                const auto& chosen = round[static_cast<std::size_t>(*sel)];
                policy.observe(*sel, chosen.x_reported, sample_reward(inst, chosen.x_true, streams.noise));
                policy.post_round();
            }
            const auto& state = policy.global();
            const Vec theta_eff = inst.reward_scale * inst.theta_star;
            const double err = std::abs(probe.dot(fit_theta(state).mean - theta_eff));
            const double bound = alpha_radius(params, static_cast<double>(state.count())) * weighted_norm(probe, state);
            violations += err > bound;
        }
        const double freq = static_cast<double>(violations) / runs;
        return Outcome{freq <= 0.05 + 0.02, "violation frequency " + fmt(freq)};
    });

    run_criterion(4, "sub-Gaussian sum frequency", 10.0, [] {
        const double R = 0.1, delta = 0.05;
        const int n = 100, trials = 10000;
        Rng rng(44);
        std::normal_distribution<double> noise(0.0, R);
        const double threshold = std::sqrt(2.0 * R * R * n * std::log(1.0 / delta));
        int exceed = 0;
        for (int k = 0; k < trials; ++k) {
            double s = 0.0;
            for (int i = 0; i < n; ++i) s += noise(rng);
            exceed += s > threshold;
        }
        const double freq = static_cast<double>(exceed) / trials;
        return Outcome{freq <= 0.05 + 0.01, "exceedance frequency " + fmt(freq)};
    });

    run_criterion(5, "no truthful eliminations", 120.0, [] {
        ExperimentConfig c;
        c.misreporters = 0;
        c.algos = {PolicyKind::cobra_ucb, PolicyKind::cobra_ts};
        const auto run = run_experiment(c);
        const int ucb = zero_elimination_reps(run.aggregate.at(PolicyKind::cobra_ucb));
        const int ts = zero_elimination_reps(run.aggregate.at(PolicyKind::cobra_ts));
        return Outcome{ucb >= 19 && ts >= 19, "runs without elimination: cobra_ucb " + std::to_string(ucb) +
                                                  "/20, cobra_ts " + std::to_string(ts) + "/20"};
    });

    run_criterion(6, "strategic ordering", 300.0, [] {
        ExperimentConfig c;  // instance I defaults: all agents over-report, eta = eps_eta = 0.1
        const auto run = run_experiment(c);
        const auto& a = run.aggregate;
        auto final_mean = [&](PolicyKind k) { return a.at(k).mean_cum_regret.back(); };
        auto detected = [&](PolicyKind k) {
            const std::size_t idx = static_cast<std::size_t>(
                std::find(c.algos.begin(), c.algos.end(), k) - c.algos.begin());
            const auto strategies = c.strategies();
            int reps = 0;
            for (const auto& tr : run.traces[idx]) {
                bool hit = false;
                for (const auto& e : tr.eliminations)
                    hit |= strategies[static_cast<std::size_t>(e.agent)].kind == StrategyKind::over_report;
                reps += hit;
            }
            return reps;
        };
        const bool ucb_order = final_mean(PolicyKind::cobra_ucb) < final_mean(PolicyKind::lin_ucb);
        const bool ts_order = final_mean(PolicyKind::cobra_ts) < final_mean(PolicyKind::lin_ts);
        const int det_ucb = detected(PolicyKind::cobra_ucb);
        const int det_ts = detected(PolicyKind::cobra_ts);
        std::string detail = "final regret cobra_ucb " + fmt(final_mean(PolicyKind::cobra_ucb), 2) + " vs lin_ucb " +
                             fmt(final_mean(PolicyKind::lin_ucb), 2) + ", cobra_ts " +
                             fmt(final_mean(PolicyKind::cobra_ts), 2) + " vs lin_ts " +
                             fmt(final_mean(PolicyKind::lin_ts), 2) + "; reps with an over-reporter eliminated: " +
                             "cobra_ucb " + std::to_string(det_ucb) + "/20, cobra_ts " + std::to_string(det_ts) + "/20";
        return Outcome{ucb_order && ts_order && det_ucb >= 15 && det_ts >= 15, detail};
    });

    run_criterion(7, "sublinear growth", 300.0, [] {
        ExperimentConfig c;
        c.T = 2000;
        c.misreporters = 0;
        c.algos = {PolicyKind::lin_ucb};
        const auto run = run_experiment(c);
        const auto& m = run.aggregate.at(PolicyKind::lin_ucb).mean_cum_regret;
        const double ratio = m[1999] / m[999];
        return Outcome{ratio <= 1.7, "R(2000) " + fmt(m[1999], 2) + " / R(1000) " + fmt(m[999], 2) + " = " +
                                         fmt(ratio, 3)};
    });

    run_criterion(8, "monotonic difficulty", 900.0, [] {
        auto sweep = [](auto set) {
            std::vector<double> m, w;
            for (int v : {0, 1, 2, 3, 4}) {
                ExperimentConfig c;
                c.algos = {PolicyKind::cobra_ucb};
                set(c, v);
                const auto run = run_experiment(c);
                const auto& a = run.aggregate.at(PolicyKind::cobra_ucb);
                m.push_back(a.mean_cum_regret.back());
                w.push_back(a.ci_half_width.back());
            }
            return std::pair{m, w};
        };
        const auto [mn, wn] = sweep([](ExperimentConfig& c, int i) {
            c.N = 5 * (i + 1);
            c.d_c = 20;
            c.d_n = 20;
        });
        const auto [md, wd] = sweep([](ExperimentConfig& c, int i) {
            c.N = 10;
            c.d_c = 5 * (i + 1);
            c.d_n = 5 * (i + 1);
        });
        const bool ok = monotone_with_one_overlap(mn, wn) && monotone_with_one_overlap(md, wd);
        return Outcome{ok, "N sweep [" + series(mn, wn) + "]; d sweep [" + series(md, wd) + "]"};
    });

    run_criterion(9, "manipulation sweep", 600.0, [] {
        std::vector<double> m, w;
        for (double eta : {0.1, 0.2, 0.4}) {
            ExperimentConfig c;
            c.eta = eta;
            c.algos = {PolicyKind::cobra_ucb};
            const auto run = run_experiment(c);
            const auto& a = run.aggregate.at(PolicyKind::cobra_ucb);
            m.push_back(a.mean_cum_regret.back());
            w.push_back(a.ci_half_width.back());
        }
        return Outcome{monotone_with_one_overlap(m, w), "eta 0.1/0.2/0.4 [" + series(m, w) + "]"};
    });

    run_criterion(10, "deviation probe", 300.0, [] {
        std::string detail;
        bool ok = true;
        for (auto kind : {PolicyKind::cobra_ucb, PolicyKind::cobra_ts}) {
            ExperimentConfig c;
            c.algos = {kind};
            const auto null = ne_deviation_probe(c, Strategy::truthful());
            const auto dev = ne_deviation_probe(c, Strategy::over_report(0.5, 0.0));
            ok = ok && null.gain == 0.0 && dev.gain <= 0.05 * static_cast<double>(c.T);
            detail += (detail.empty() ? "" : "; ") + to_string(kind) + " null gain " + fmt(null.gain, 2) +
                      ", eta=0.5 gain " + fmt(dev.gain, 2) + " (limit " + fmt(0.05 * c.T, 0) + ")";
        }
        return Outcome{ok, detail};
    });

    run_criterion(11, "polynomial lift", 600.0, [] {
        Vec x(4);
        x << 1, 2, 3, 4;
        Vec expected(14);
        expected << 1, 2, 3, 4, 2, 3, 4, 6, 8, 12, 6, 8, 12, 24;
        const bool exact = poly_lift(x) == expected;
        // Four raw features (two context, two agent) lift to 14 dimensions.
        ExperimentConfig c;
        c.T = 2000;
        c.d_c = 2;
        c.d_n = 2;
        c.lift = Lift::subset_products_deg3;
        c.algos = {PolicyKind::cobra_ts, PolicyKind::lin_ts};
        const auto run = run_experiment(c);
        const double cts = run.aggregate.at(PolicyKind::cobra_ts).mean_cum_regret.back();
        const double lts = run.aggregate.at(PolicyKind::lin_ts).mean_cum_regret.back();
        return Outcome{exact && cts < lts, std::string("worked example ") + (exact ? "exact" : "MISMATCH") +
                                               "; final regret cobra_ts " + fmt(cts, 2) + " vs lin_ts " +
                                               fmt(lts, 2)};
    });

    run_criterion(12, "determinism and I/O", 120.0, [] {
        ExperimentConfig c;
        c.T = 300;
        c.reps = 5;
        const auto base = std::filesystem::temp_directory_path() / "cobra_acceptance";
        std::filesystem::remove_all(base);
        c.out_dir = (base / "a").string();
        c.threads = 1;
        const auto first = run_experiment(c);
        write_outputs(first);
        c.out_dir = (base / "b").string();
        c.threads = 2;
        write_outputs(run_experiment(c));
        const std::string a = slurp(base / "a" / "summary.csv");
        const std::string b = slurp(base / "b" / "summary.csv");
        const bool identical = !a.empty() && a == b;
        const auto parsed = parse_summary_csv(a);
        bool round_trip = parsed.algos.size() == first.aggregate.algos.size();
        for (std::size_t k = 0; round_trip && k < parsed.algos.size(); ++k) {
            round_trip = parsed.algos[k].algo == first.aggregate.algos[k].algo &&
                         parsed.algos[k].mean_cum_regret == first.aggregate.algos[k].mean_cum_regret &&
                         parsed.algos[k].ci_half_width == first.aggregate.algos[k].ci_half_width;
        }
        std::filesystem::remove_all(base);
        return Outcome{identical && round_trip, std::string("summary.csv ") +
                                                    (identical ? "byte-identical" : "DIFFERS") + ", round-trip " +
                                                    (round_trip ? "exact" : "MISMATCH")};
    });

    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
