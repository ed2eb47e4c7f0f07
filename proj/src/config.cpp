#include "cobra/harness.hpp"

#include <json.hpp>

#include <charconv>
#include <fstream>
#include <sstream>

namespace cobra {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
    T out{};
    const char* first = value.data();
    const char* last = value.data() + value.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc() || ptr != last)
        throw ConfigError("config field '" + key + "': cannot parse '" + value + "'");
    return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw ConfigError("config field '" + key + "': expected a boolean, got '" + value + "'");
}

std::vector<PolicyKind> parse_algos(const std::string& value) {
    std::vector<PolicyKind> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        try {
            out.push_back(policy_kind_from_string(item));
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
    }
    return out;
}

}  // namespace

void ExperimentConfig::validate() const {
    auto fail = [](const std::string& msg) { throw ConfigError(msg); };
    if (T < 1) fail("T must be >= 1");
    if (N < 1) fail("N must be >= 1");
    if (d_c < 1 || d_n < 1) fail("d_c and d_n must be >= 1");
    if (!(lambda > 0.0)) fail("lambda must be > 0");
    if (!(R >= 0.0)) fail("R must be >= 0");
    if (!(delta > 0.0 && delta < 1.0)) fail("delta must lie in (0,1)");
    if (!(reward_scale > 0.0)) fail("reward_scale must be > 0");
    if (!(eta >= 0.0) || !(eps_eta >= 0.0)) fail("eta and eps_eta must be >= 0");
    if (reps < 1) fail("reps must be >= 1");
    if (algos.empty()) fail("algos must name at least one algorithm");
    if (misreporters < -1 || misreporters > N) fail("misreporters must lie in [-1, N]");
    if (probe_agent < 0 || probe_agent >= N) fail("probe_agent must lie in [0, N)");
    if (threads < 0) fail("threads must be >= 0");
}

std::vector<Strategy> ExperimentConfig::strategies() const {
    const int k = misreporters < 0 ? N : misreporters;
    std::vector<Strategy> out(static_cast<std::size_t>(N), Strategy::truthful());
    for (int n = 0; n < k; ++n) out[static_cast<std::size_t>(n)] = Strategy::over_report(eta, eps_eta);
    return out;
}

InstanceSpec ExperimentConfig::instance_spec() const {
    InstanceSpec s;
    s.d_c = d_c;
    s.d_n = d_n;
    s.num_agents = N;
    s.reward_scale = reward_scale;
    s.noise_scale = R;
    s.lift = lift;
    s.strategies = strategies();
    return s;
}

ConfidenceParams ExperimentConfig::confidence(const ProblemInstance& instance) const {
    ConfidenceParams p;
    p.noise_scale = R;
    p.dim = instance.dim();
    p.lambda = lambda;
    p.delta = delta;
    p.param_bound = instance.param_bound();
    p.feature_bound = instance.feature_bound();
    return p;
}

void set_config_field(ExperimentConfig& c, const std::string& key, const std::string& value) {
    try {
        if (key == "T") c.T = parse_number<std::uint64_t>(key, value);
        else if (key == "N") c.N = parse_number<int>(key, value);
        else if (key == "d_c" || key == "dc") c.d_c = parse_number<int>(key, value);
        else if (key == "d_n" || key == "dn") c.d_n = parse_number<int>(key, value);
        else if (key == "lambda") c.lambda = parse_number<double>(key, value);
        else if (key == "R" || key == "noise") c.R = parse_number<double>(key, value);
        else if (key == "delta") c.delta = parse_number<double>(key, value);
        else if (key == "reward_scale" || key == "scale") c.reward_scale = parse_number<double>(key, value);
        else if (key == "eta") c.eta = parse_number<double>(key, value);
        else if (key == "eps_eta" || key == "eps-eta") c.eps_eta = parse_number<double>(key, value);
        else if (key == "reps") c.reps = parse_number<int>(key, value);
        else if (key == "seed") c.seed = parse_number<std::uint64_t>(key, value);
        else if (key == "algos") c.algos = parse_algos(value);
        else if (key == "lift") c.lift = lift_from_string(value);
        else if (key == "misreporters") c.misreporters = parse_number<int>(key, value);
        else if (key == "loom_check_scope") c.loom_check_scope = check_scope_from_string(value);
        else if (key == "fix_instance_across_reps") c.fix_instance_across_reps = parse_bool(key, value);
        else if (key == "monitor_assumptions") c.monitor_assumptions = parse_bool(key, value);
        else if (key == "probe_agent") c.probe_agent = parse_number<int>(key, value);
        else if (key == "threads") c.threads = parse_number<int>(key, value);
        else if (key == "out_dir" || key == "out-dir") c.out_dir = value;
        else throw ConfigError("unknown config field '" + key + "'");
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config field '") + key + "': " + e.what());
    }
}

ExperimentConfig parse_config(const std::string& text, ExperimentConfig base) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string body = trim(line);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        std::string value = trim(body.substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
            value = value.substr(1, value.size() - 2);
        set_config_field(base, trim(body.substr(0, eq)), value);
    }
    return base;
}

ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), std::move(base));
}

std::string config_to_json(const ExperimentConfig& c) {
    nlohmann::ordered_json j;
    j["T"] = c.T;
    j["N"] = c.N;
    j["d_c"] = c.d_c;
    j["d_n"] = c.d_n;
    j["lambda"] = c.lambda;
    j["R"] = c.R;
    j["delta"] = c.delta;
    j["reward_scale"] = c.reward_scale;
    j["eta"] = c.eta;
    j["eps_eta"] = c.eps_eta;
    j["reps"] = c.reps;
    j["seed"] = c.seed;
    std::vector<std::string> algos;
    for (auto a : c.algos) algos.push_back(to_string(a));
    j["algos"] = algos;
    j["lift"] = to_string(c.lift);
    j["misreporters"] = c.misreporters;
    j["loom_check_scope"] = to_string(c.loom_check_scope);
    j["fix_instance_across_reps"] = c.fix_instance_across_reps;
    j["monitor_assumptions"] = c.monitor_assumptions;
    j["probe_agent"] = c.probe_agent;
    j["threads"] = c.threads;
    j["out_dir"] = c.out_dir;
    return j.dump(2);
}

}  // namespace cobra
