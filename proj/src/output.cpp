#include "cobra/harness.hpp"

#include <json.hpp>

#include <array>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

namespace cobra {

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw IoError("write failed for " + path.string());
}

std::string trace_csv(const EpisodeTrace& trace) {
    std::string s = "round,selected_agent,regret_inc,cum_regret,eliminated\n";
    for (const auto& r : trace.rounds) {
        s += std::to_string(r.round);
        s += ',';
        s += r.selected ? std::to_string(*r.selected) : std::string("stopped");
        s += ',';
        s += format_double(r.regret_inc);
        s += ',';
        s += format_double(r.cum_regret);
        s += ',';
        for (std::size_t i = 0; i < r.eliminated.size(); ++i) {
            if (i) s += ';';
            s += std::to_string(r.eliminated[i]);
        }
        s += '\n';
    }
    return s;
}

double parse_double(const std::string& field) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || ptr != field.data() + field.size())
        throw std::invalid_argument("summary.csv: bad number '" + field + "'");
    return v;
}

}  // namespace

std::string format_double(double v) {
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    if (ec != std::errc()) throw std::runtime_error("format_double failed");
    return std::string(buf.data(), ptr);
}

std::string summary_csv(const AggregateResult& result) {
    std::string s = "algo,round,mean_cum_regret,ci_half_width\n";
    for (const auto& a : result.algos) {
        const std::string name = to_string(a.algo);
        for (std::size_t t = 0; t < a.mean_cum_regret.size(); ++t) {
            s += name;
            s += ',';
            s += std::to_string(t + 1);
            s += ',';
            s += format_double(a.mean_cum_regret[t]);
            s += ',';
            s += format_double(a.ci_half_width[t]);
            s += '\n';
        }
    }
    return s;
}

AggregateResult parse_summary_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "algo,round,mean_cum_regret,ci_half_width")
        throw std::invalid_argument("summary.csv: unexpected header");
    AggregateResult result;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::array<std::string, 4> f;
        std::istringstream ls(line);
        for (auto& field : f)
            if (!std::getline(ls, field, ',')) throw std::invalid_argument("summary.csv: short row");
        const PolicyKind kind = policy_kind_from_string(f[0]);
        if (result.algos.empty() || result.algos.back().algo != kind) {
            result.algos.push_back(AlgoAggregate{});
            result.algos.back().algo = kind;
        }
        auto& a = result.algos.back();
        if (std::stoull(f[1]) != a.mean_cum_regret.size() + 1)
            throw std::invalid_argument("summary.csv: rounds out of order");
        a.mean_cum_regret.push_back(parse_double(f[2]));
        a.ci_half_width.push_back(parse_double(f[3]));
    }
    return result;
}

void write_outputs(const ExperimentRun& run) {
    const std::filesystem::path dir(run.config.out_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());

    write_file(dir / "summary.csv", summary_csv(run.aggregate));
    for (std::size_t k = 0; k < run.traces.size(); ++k) {
        for (std::size_t r = 0; r < run.traces[k].size(); ++r) {
            const auto name = "trace_" + to_string(run.config.algos[k]) + "_" + std::to_string(r) + ".csv";
            write_file(dir / name, trace_csv(run.traces[k][r]));
        }
    }

    nlohmann::ordered_json j;
    j["config"] = nlohmann::ordered_json::parse(config_to_json(run.config));
    j["seed_derivation"] =
        "instance=mix(seed,0,rep) [mix(seed,0) if fix_instance_across_reps]; "
        "env=mix(seed,1,rep); policy=mix(seed,2,algo_index,rep); mix = chained splitmix64";
    auto& seeds = j["episodes"] = nlohmann::ordered_json::array();
    for (const auto& s : run.seeds) {
        nlohmann::ordered_json e;
        e["algo"] = to_string(s.algo);
        e["rep"] = s.rep;
        e["instance_seed"] = s.instance_seed;
        e["env_seed"] = s.env_seed;
        e["policy_seed"] = s.policy_seed;
        seeds.push_back(std::move(e));
    }
    auto& results = j["results"] = nlohmann::ordered_json::object();
    for (const auto& a : run.aggregate.algos) {
        nlohmann::ordered_json r;
        r["final_regrets"] = a.final_regrets;
        r["eliminations"] = a.eliminations;
        results[to_string(a.algo)] = std::move(r);
    }
    write_file(dir / "run.json", j.dump(2) + "\n");
}

}  // namespace cobra
