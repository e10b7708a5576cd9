#pragma once

#include <cstdint>
#include <fstream>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mdplab/chain.hpp"
#include "mdplab/mdp.hpp"
#include "mdplab/schedule.hpp"

namespace mdplab {

// Flat key = value experiment description; '#' comments, unknown keys are a
// load-time error. The full key table is documented in the README.
struct ExperimentConfig {
    enum class EnvKind { File, Example, Random };
    EnvKind env_kind = EnvKind::Example;
    std::string mdp_file;
    int example_n = 4;
    double example_k = 1.0;
    double example_q = 0.5;
    int random_states = 5;
    int random_actions = 3;
    std::uint64_t random_seed = 1;
    double gamma = 0.9; // example/random environments; file carries its own

    std::string algorithm = "qlearn"; // qlearn | td | vrq
    LearningRateSchedule schedule = ConstantRate{0.1};
    long long horizon = 100'000; // T
    long long record_every = 1'000;
    std::vector<std::uint64_t> seeds;
    std::string out_dir = "runs";

    std::vector<double> eta_grid; // sweep over constant rates; empty = schedule as-is
    double diag_delta = 0.1;      // floor/decay diagnostics in sweep summaries
    double diag_eps = 0.01;

    // vrq: explicit parameters, or vr_auto derives them from (vr_eps, vr_delta)
    bool vr_auto = false;
    int vr_epochs = 4;
    long long vr_recenter = 10'000;
    long long vr_epoch_length = 20'000;
    double vr_eta = 0.01;
    double vr_eps = 0.1;
    double vr_delta = 0.1;
    double vr_c0 = 1.0, vr_c1 = 1.0, vr_c2 = 1.0, vr_c3 = 1.0;
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

inline std::vector<std::string> split_ws(const std::string& s) {
    std::istringstream ss(s);
    std::vector<std::string> out;
    for (std::string tok; ss >> tok;) out.push_back(tok);
    return out;
}

template <typename T>
inline T parse_number(const std::string& s, const std::string& key) {
    std::istringstream ss(s);
    T v{};
    if (!(ss >> v) || !(ss >> std::ws).eof())
        throw std::invalid_argument("config: bad value '" + s + "' for key '" + key + "'");
    return v;
}

} // namespace detail

inline LearningRateSchedule parse_schedule(const std::string& value) {
    const auto toks = detail::split_ws(value);
    if (toks.empty()) throw std::invalid_argument("config: empty schedule");
    const std::string& kind = toks[0];
    auto arg = [&](std::size_t i) -> double {
        if (toks.size() <= i)
            throw std::invalid_argument("config: schedule '" + kind + "' is missing arguments");
        return detail::parse_number<double>(toks[i], "schedule");
    };
    LearningRateSchedule schedule;
    if (kind == "constant")
        schedule = ConstantRate{arg(1)};
    else if (kind == "linear")
        schedule = LinearRate{};
    else if (kind == "polynomial")
        schedule = PolynomialRate{arg(1)};
    else if (kind == "rescaled")
        schedule = RescaledLinearRate{arg(1), arg(2)};
    else if (kind == "adaptive")
        schedule = AdaptiveRate{toks.size() > 1 ? arg(1) : 1.0};
    else
        throw std::invalid_argument("config: unknown schedule '" + kind + "'");
    validate(schedule);
    return schedule;
}

inline ExperimentConfig parse_config(std::istream& in) {
    ExperimentConfig cfg;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": expected 'key = value'");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));

        if (key == "environment") {
            const auto toks = detail::split_ws(value);
            if (toks.empty()) throw std::invalid_argument("config: empty environment");
            if (toks[0] == "file" && toks.size() == 2) {
                cfg.env_kind = ExperimentConfig::EnvKind::File;
                cfg.mdp_file = toks[1];
            } else if (toks[0] == "example" && toks.size() == 4) {
                cfg.env_kind = ExperimentConfig::EnvKind::Example;
                cfg.example_n = detail::parse_number<int>(toks[1], key);
                cfg.example_k = detail::parse_number<double>(toks[2], key);
                cfg.example_q = detail::parse_number<double>(toks[3], key);
            } else if (toks[0] == "random" && toks.size() == 4) {
                cfg.env_kind = ExperimentConfig::EnvKind::Random;
                cfg.random_states = detail::parse_number<int>(toks[1], key);
                cfg.random_actions = detail::parse_number<int>(toks[2], key);
                cfg.random_seed = detail::parse_number<std::uint64_t>(toks[3], key);
            } else {
                throw std::invalid_argument(
                    "config: environment must be 'file PATH', 'example N K Q' "
                    "or 'random S A SEED'");
            }
        } else if (key == "gamma") {
            cfg.gamma = detail::parse_number<double>(value, key);
        } else if (key == "algorithm") {
            if (value != "qlearn" && value != "td" && value != "vrq")
                throw std::invalid_argument("config: unknown algorithm '" + value + "'");
            cfg.algorithm = value;
        } else if (key == "schedule") {
            cfg.schedule = parse_schedule(value);
        } else if (key == "T") {
            cfg.horizon = detail::parse_number<long long>(value, key);
        } else if (key == "record_every") {
            cfg.record_every = detail::parse_number<long long>(value, key);
        } else if (key == "seeds") {
            cfg.seeds.clear();
            std::string item;
            std::istringstream ss(value);
            while (std::getline(ss, item, ',')) {
                item = detail::trim(item);
                if (!item.empty())
                    cfg.seeds.push_back(detail::parse_number<std::uint64_t>(item, key));
            }
        } else if (key == "out_dir") {
            cfg.out_dir = value;
        } else if (key == "eta_grid") {
            cfg.eta_grid.clear();
            std::string item;
            std::istringstream ss(value);
            while (std::getline(ss, item, ',')) {
                item = detail::trim(item);
                if (!item.empty())
                    cfg.eta_grid.push_back(detail::parse_number<double>(item, key));
            }
        } else if (key == "diag_delta") {
            cfg.diag_delta = detail::parse_number<double>(value, key);
        } else if (key == "diag_eps") {
            cfg.diag_eps = detail::parse_number<double>(value, key);
        } else if (key == "vr_auto") {
            cfg.vr_auto = (value == "true" || value == "1");
        } else if (key == "vr_epochs") {
            cfg.vr_epochs = detail::parse_number<int>(value, key);
        } else if (key == "vr_recenter") {
            cfg.vr_recenter = detail::parse_number<long long>(value, key);
        } else if (key == "vr_epoch_length") {
            cfg.vr_epoch_length = detail::parse_number<long long>(value, key);
        } else if (key == "vr_eta") {
            cfg.vr_eta = detail::parse_number<double>(value, key);
        } else if (key == "vr_eps") {
            cfg.vr_eps = detail::parse_number<double>(value, key);
        } else if (key == "vr_delta") {
            cfg.vr_delta = detail::parse_number<double>(value, key);
        } else if (key == "vr_c0") {
            cfg.vr_c0 = detail::parse_number<double>(value, key);
        } else if (key == "vr_c1") {
            cfg.vr_c1 = detail::parse_number<double>(value, key);
        } else if (key == "vr_c2") {
            cfg.vr_c2 = detail::parse_number<double>(value, key);
        } else if (key == "vr_c3") {
            cfg.vr_c3 = detail::parse_number<double>(value, key);
        } else {
            throw std::invalid_argument("config: unknown key '" + key + "'");
        }
    }
    return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file: " + path);
    return parse_config(in);
}

// Single-action environment wrapper of the constructed example chain: the
// state chain equals the chain kernel, rewards are r(x) = (x+1)/n.
inline TabularMdp example_chain_mdp(int n, double k, double q, double gamma) {
    const StateActionChain chain = build_example_chain(n, k, q);
    std::vector<double> rewards(n);
    for (int x = 0; x < n; ++x) rewards[x] = static_cast<double>(x + 1) / n;
    return TabularMdp(n, 1, chain.kernel, std::move(rewards), gamma);
}

inline TabularMdp build_environment(const ExperimentConfig& cfg) {
    switch (cfg.env_kind) {
    case ExperimentConfig::EnvKind::File:
        return load_mdp_file(cfg.mdp_file);
    case ExperimentConfig::EnvKind::Example:
        return example_chain_mdp(cfg.example_n, cfg.example_k, cfg.example_q,
                                 cfg.gamma);
    case ExperimentConfig::EnvKind::Random:
        return make_random_mdp(cfg.random_states, cfg.random_actions, cfg.gamma,
                               cfg.random_seed);
    }
    throw std::logic_error("build_environment: unreachable");
}

inline std::string environment_id(const ExperimentConfig& cfg) {
    std::ostringstream os;
    os.precision(12);
    switch (cfg.env_kind) {
    case ExperimentConfig::EnvKind::File:
        os << "file " << cfg.mdp_file;
        break;
    case ExperimentConfig::EnvKind::Example:
        os << "example n=" << cfg.example_n << " k=" << cfg.example_k
           << " q=" << cfg.example_q << " gamma=" << cfg.gamma;
        break;
    case ExperimentConfig::EnvKind::Random:
        os << "random states=" << cfg.random_states
           << " actions=" << cfg.random_actions << " seed=" << cfg.random_seed
           << " gamma=" << cfg.gamma;
        break;
    }
    return os.str();
}

} // namespace mdplab
