// mdplab command-line front end: exact solvers, chain diagnostics, learning
// runs and sweeps, all emitting deterministic CSV.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <json.hpp>

#include "mdplab/chain.hpp"
#include "mdplab/config.hpp"
#include "mdplab/diagnostics.hpp"
#include "mdplab/qlearning.hpp"
#include "mdplab/solve.hpp"
#include "mdplab/sweep.hpp"
#include "mdplab/vrq.hpp"

namespace {

using namespace mdplab;

nlohmann::ordered_json metadata_json(const RunMetadata& meta) {
    nlohmann::ordered_json j;
    j["seed"] = meta.seed;
    j["algorithm"] = meta.algorithm;
    j["schedule"] = meta.schedule;
    j["T"] = meta.T;
    j["gamma"] = meta.gamma;
    j["environment"] = meta.environment;
    j["rng"] = meta.rng_algorithm;
    for (const auto& [name, value] : meta.constants) j["constants"][name] = value;
    return j;
}

void write_metadata(const RunMetadata& meta, const std::filesystem::path& path) {
    std::ofstream out(path);
    out << metadata_json(meta).dump(2) << '\n';
}

StateActionChain chain_from_cli(const std::string& mdp_file,
                                const std::vector<double>& example,
                                const std::vector<std::string>& random,
                                double gamma) {
    if (!mdp_file.empty()) {
        const TabularMdp mdp = load_mdp_file(mdp_file);
        return induce_chain(mdp, Policy::uniform(mdp.n_states, mdp.n_actions));
    }
    if (!example.empty()) {
        if (example.size() != 3)
            throw CLI::ValidationError("--example expects N K Q");
        return build_example_chain(static_cast<int>(example[0]), example[1],
                                   example[2]);
    }
    if (!random.empty()) {
        if (random.size() != 3)
            throw CLI::ValidationError("--random expects S A SEED");
        const TabularMdp mdp =
            make_random_mdp(std::stoi(random[0]), std::stoi(random[1]), gamma,
                            std::stoull(random[2]));
        return induce_chain(mdp, Policy::uniform(mdp.n_states, mdp.n_actions));
    }
    throw CLI::ValidationError("pass one of --mdp, --example, --random");
}

int run_learning_command(const std::string& algorithm, const std::string& config_path,
                         std::optional<std::uint64_t> seed_override,
                         std::optional<std::string> out_override) {
    ExperimentConfig cfg = load_config(config_path);
    cfg.algorithm = algorithm;
    if (out_override) cfg.out_dir = *out_override;
    std::vector<std::uint64_t> seeds = cfg.seeds;
    if (seed_override) seeds = {*seed_override};
    if (seeds.empty()) seeds = {1};

    const TabularMdp mdp = build_environment(cfg);
    std::filesystem::create_directories(cfg.out_dir);
    const std::string env_id = environment_id(cfg);

    for (std::uint64_t seed : seeds) {
        std::ostringstream stem;
        stem << algorithm << "_seed" << seed;
        const auto csv_path =
            std::filesystem::path(cfg.out_dir) / (stem.str() + ".csv");
        const auto meta_path =
            std::filesystem::path(cfg.out_dir) / (stem.str() + ".meta.json");

        if (algorithm == "vrq") {
            VrConfig vc;
            if (cfg.vr_auto) {
                const Policy behavior = Policy::uniform(mdp.n_states, mdp.n_actions);
                const StateActionChain chain = induce_chain(mdp, behavior);
                vc = vrq_params(cfg.vr_eps, cfg.vr_delta, mdp.discount,
                                chain.mu_min,
                                static_cast<double>(mixing_time(chain)),
                                mdp.pair_count(), cfg.vr_c0, cfg.vr_c1, cfg.vr_c2,
                                cfg.vr_c3);
            } else {
                vc.epochs = cfg.vr_epochs;
                vc.recenter_samples = cfg.vr_recenter;
                vc.epoch_length = cfg.vr_epoch_length;
                vc.eta = cfg.vr_eta;
            }
            auto res = run_vrq(mdp, Policy::uniform(mdp.n_states, mdp.n_actions),
                               vc, seed);
            res.meta.environment = env_id;
            std::ofstream csv(csv_path);
            write_epoch_csv(res.epochs, csv);
            write_metadata(res.meta, meta_path);
            std::cout << "seed " << seed << " final_error "
                      << format_double(res.epochs.back().linf_error) << " samples "
                      << res.samples_consumed << '\n';
        } else if (algorithm == "td") {
            auto res = run_td(mdp, cfg.schedule, cfg.horizon, seed, cfg.record_every);
            res.trace.meta.environment = env_id;
            std::ofstream csv(csv_path);
            write_trace_csv(res.trace, csv);
            write_metadata(res.trace.meta, meta_path);
            std::cout << "seed " << seed << " final_error "
                      << format_double(res.trace.rows.back().linf_error) << '\n';
        } else {
            auto res = run_qlearning(mdp, Policy::uniform(mdp.n_states, mdp.n_actions),
                                     cfg.schedule, cfg.horizon, seed,
                                     cfg.record_every);
            res.trace.meta.environment = env_id;
            std::ofstream csv(csv_path);
            write_trace_csv(res.trace, csv);
            write_metadata(res.trace.meta, meta_path);
            std::cout << "seed " << seed << " final_error "
                      << format_double(res.trace.rows.back().linf_error) << '\n';
        }
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tabular MDP laboratory: asynchronous Q-learning, its "
                 "variance-reduced variant, TD learning, and exact Markov "
                 "chain diagnostics"};
    app.require_subcommand(1);

    // solve
    auto* solve_cmd = app.add_subcommand("solve", "print Q* of an MDP file");
    std::string solve_file;
    double solve_tol = 1e-10;
    int solve_max_iters = 0;
    solve_cmd->add_option("mdp-file", solve_file, "MDP file")->required();
    solve_cmd->add_option("--tol", solve_tol, "fixed-point tolerance");
    solve_cmd->add_option("--max-iters", solve_max_iters, "iteration cap (0 = auto)");

    // diagnose
    auto* diag_cmd =
        app.add_subcommand("diagnose", "chain diagnostics CSV (mu_min, t_mix, t_cover)");
    std::string diag_mdp, diag_out;
    std::vector<double> diag_example;
    std::vector<std::string> diag_random;
    double diag_gamma = 0.9;
    int diag_mc = 5000;
    std::uint64_t diag_seed = 1;
    diag_cmd->add_option("--mdp", diag_mdp, "MDP file (uniform behavior policy)");
    diag_cmd->add_option("--example", diag_example, "example chain N K Q")
        ->expected(3);
    diag_cmd->add_option("--random", diag_random, "random MDP S A SEED")->expected(3);
    diag_cmd->add_option("--gamma", diag_gamma, "discount for --random");
    diag_cmd->add_option("--mc-trajectories", diag_mc,
                         "Monte Carlo trajectories when n > 14");
    diag_cmd->add_option("--seed", diag_seed, "Monte Carlo seed");
    diag_cmd->add_option("--out", diag_out, "output file (default stdout)");

    // example-chain
    auto* ex_cmd = app.add_subcommand(
        "example-chain", "constructed chain: analytic vs numeric stationary law");
    int ex_n = 4;
    double ex_k = 1.0, ex_q = 0.5;
    ex_cmd->add_option("--n", ex_n, "number of states (even, >= 4)")->required();
    ex_cmd->add_option("--k", ex_k, "occupancy skew k >= 1")->required();
    ex_cmd->add_option("--q", ex_q, "jump intensity, q(k+1) < 2")->required();

    // learning runs
    std::string cfg_path;
    std::optional<std::uint64_t> seed_override;
    std::optional<std::string> out_override;
    auto add_run_options = [&](CLI::App* cmd) {
        cmd->add_option("--config", cfg_path, "experiment config file")->required();
        cmd->add_option_function<std::uint64_t>(
            "--seed", [&](std::uint64_t v) { seed_override = v; },
            "override the config seed list");
        cmd->add_option_function<std::string>(
            "--out", [&](const std::string& v) { out_override = v; },
            "override the output directory");
    };
    auto* qlearn_cmd = app.add_subcommand("qlearn", "asynchronous Q-learning run");
    add_run_options(qlearn_cmd);
    auto* td_cmd = app.add_subcommand("td", "TD learning run (singleton actions)");
    add_run_options(td_cmd);
    auto* vrq_cmd = app.add_subcommand("vrq", "variance-reduced Q-learning run");
    add_run_options(vrq_cmd);
    auto* sweep_cmd = app.add_subcommand("sweep", "seed x parameter grid sweep");
    add_run_options(sweep_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_exit_code() == 0 ? 0 : 1;
    }

    try {
        if (solve_cmd->parsed()) {
            const TabularMdp mdp = load_mdp_file(solve_file);
            const auto res = value_iteration(mdp, solve_tol, solve_max_iters);
            for (int s = 0; s < mdp.n_states; ++s)
                for (int a = 0; a < mdp.n_actions; ++a)
                    std::cout << s << ' ' << a << ' '
                              << format_double(res.q[pair_index(s, a, mdp.n_actions)])
                              << '\n';
            return 0;
        }
        if (diag_cmd->parsed()) {
            const StateActionChain chain =
                chain_from_cli(diag_mdp, diag_example, diag_random, diag_gamma);
            const long long t_mix = mixing_time(chain);
            long long t_cover = 0, half = 0;
            if (chain.n <= 14) {
                t_cover = cover_time_exact(chain);
            } else {
                const auto est = cover_time_mc(chain, diag_mc, diag_seed);
                t_cover = est.estimate;
                half = est.half_width;
            }
            std::ostringstream csv;
            csv << "n,mu_min,t_mix,t_cover,t_cover_halfwidth,lambda2_analytic\n"
                << chain.n << ',' << format_double(chain.mu_min) << ',' << t_mix
                << ',' << t_cover << ',' << half << ',';
            if (chain.lambda2_analytic)
                csv << format_double(*chain.lambda2_analytic);
            csv << '\n';
            if (diag_out.empty()) {
                std::cout << csv.str();
            } else {
                std::ofstream out(diag_out);
                out << csv.str();
            }
            return 0;
        }
        if (ex_cmd->parsed()) {
            const StateActionChain chain = build_example_chain(ex_n, ex_k, ex_q);
            const auto numeric = stationary_distribution(chain.kernel, chain.n);
            std::cout << "mu_min=" << format_double(chain.mu_min) << '\n'
                      << "lambda2=" << format_double(*chain.lambda2_analytic) << '\n'
                      << "stationary_analytic_vs_numeric_max_diff="
                      << format_double(linf_distance(chain.stationary, numeric))
                      << '\n';
            return 0;
        }
        if (qlearn_cmd->parsed())
            return run_learning_command("qlearn", cfg_path, seed_override, out_override);
        if (td_cmd->parsed())
            return run_learning_command("td", cfg_path, seed_override, out_override);
        if (vrq_cmd->parsed())
            return run_learning_command("vrq", cfg_path, seed_override, out_override);
        if (sweep_cmd->parsed()) {
            ExperimentConfig cfg = load_config(cfg_path);
            if (out_override) cfg.out_dir = *out_override;
            if (seed_override) cfg.seeds = {*seed_override};
            const auto rows = run_sweep(cfg, cfg.out_dir);
            std::cout << rows.size() << " runs -> " << cfg.out_dir << "/summary.csv\n";
            return 0;
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
