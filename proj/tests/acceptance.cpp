// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Statistical criteria run on fixed seeds, so outcomes are
// reproducible run to run.

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "mdplab/chain.hpp"
#include "mdplab/config.hpp"
#include "mdplab/diagnostics.hpp"
#include "mdplab/qlearning.hpp"
#include "mdplab/solve.hpp"
#include "mdplab/vrq.hpp"

using namespace mdplab;

namespace {

int g_failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail,
            double seconds) {
    std::printf("[%s] criterion %2d %-24s %s (%.1fs)\n", pass ? "PASS" : "FAIL",
                id, name.c_str(), detail.c_str(), seconds);
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double trace_floor(const RunTrace& trace) {
    const auto& rows = trace.rows;
    const std::size_t tail = (rows.size() + 9) / 10;
    double acc = 0.0;
    for (std::size_t i = rows.size() - tail; i < rows.size(); ++i)
        acc += rows[i].linf_error;
    return acc / static_cast<double>(tail);
}

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                             start)
            .count();
    }
};

// fixed 5-state / 3-action ergodic environment used by criteria 4 and 8
TabularMdp bench_env() { return make_random_mdp(5, 3, 0.9, 12345); }

void criterion1_oracle_consistency() {
    Timer timer;
    int pass_count = 0;
    double worst_gap = 0.0, worst_residual = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const int states = 2 + trial % 5;  // 2..6
        const int actions = 1 + trial % 4; // 1..4
        const double gamma = (trial % 2 == 0) ? 0.5 : 0.9;
        const TabularMdp mdp =
            make_random_mdp(states, actions, gamma, 9000 + trial);
        const QTable q_star = value_iteration(mdp, 1e-10).q;
        const double residual =
            linf_distance(bellman_optimality(mdp, q_star), q_star);
        const auto pe = policy_evaluation_exact(
            mdp, greedy_policy(q_star, states, actions));
        const double gap = linf_distance(q_star, pe.q);
        worst_gap = std::max(worst_gap, gap);
        worst_residual = std::max(worst_residual, residual);
        if (gap <= 1e-8 && residual <= 1e-9) ++pass_count;
    }
    std::ostringstream detail;
    detail << pass_count << "/50 MDPs, worst gap " << format_double(worst_gap)
           << ", worst residual " << format_double(worst_residual);
    report(1, "oracle consistency", pass_count == 50, detail.str(), timer.seconds());
}

void criterion2_example_chain_values() {
    Timer timer;
    const StateActionChain chain = build_example_chain(4, 1.0, 0.5);
    const bool exact = chain.mu_min == 0.25 && chain.lambda2_analytic &&
                       *chain.lambda2_analytic == 0.5;
    const auto numeric = stationary_distribution(chain.kernel, chain.n);
    const double diff = linf_distance(chain.stationary, numeric);
    std::ostringstream detail;
    detail << "mu_min " << format_double(chain.mu_min) << ", lambda2 "
           << format_double(*chain.lambda2_analytic) << ", stationary diff "
           << format_double(diff);
    report(2, "example-chain values", exact && diff <= 1e-10, detail.str(),
           timer.seconds());
}

StateActionChain random_chain(int n, std::uint64_t seed) {
    Xoshiro256ss rng(seed);
    std::vector<double> kernel(static_cast<std::size_t>(n) * n);
    for (int x = 0; x < n; ++x) {
        double sum = 0.0;
        for (int y = 0; y < n; ++y) {
            const double u = rng.uniform();
            kernel[static_cast<std::size_t>(x) * n + y] = 0.02 + u * u * u;
            sum += kernel[static_cast<std::size_t>(x) * n + y];
        }
        for (int y = 0; y < n; ++y) kernel[static_cast<std::size_t>(x) * n + y] /= sum;
    }
    return make_chain(std::move(kernel), n);
}

void criterion3_cover_time_agreement() {
    Timer timer;
    int agree = 0;
    std::ostringstream detail;
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 4 + trial % 7; // 4..10
        const StateActionChain chain = random_chain(n, 2000 + trial);
        const long long exact = cover_time_exact(chain);
        const auto mc = cover_time_mc(chain, 5000, 3000 + trial);
        if (std::llabs(mc.estimate - exact) <= mc.half_width) ++agree;
    }
    detail << agree << "/10 within the Monte Carlo half-width";
    report(3, "cover-time oracles", agree >= 9, detail.str(), timer.seconds());
}

void criterion4_qlearning_convergence() {
    Timer timer;
    const TabularMdp mdp = bench_env();
    const Policy behavior = Policy::uniform(5, 3);
    const StateActionChain chain = induce_chain(mdp, behavior);
    const long long T = 5'000'000;
    // recipe-shaped constant rate at eps = 0.1, delta = 0.1, tuned constant
    const double eta = mixing_rate_recipe(0.1, 0.1, T, mixing_time(chain), 0.9,
                                          mdp.pair_count(), 8000.0);
    int ok = 0;
    double worst = 0.0;
    for (int seed = 0; seed < 20; ++seed) {
        const auto res = run_qlearning(mdp, behavior, ConstantRate{eta}, T,
                                       100 + seed, 100000);
        const double err = res.trace.rows.back().linf_error;
        worst = std::max(worst, err);
        if (err <= 0.1) ++ok;
    }
    std::ostringstream detail;
    detail << ok << "/20 seeds reached 0.1 (eta " << format_double(eta)
           << ", worst " << format_double(worst) << ")";
    report(4, "Q-learning convergence", ok >= 18, detail.str(), timer.seconds());
}

struct FloorRuns {
    std::vector<RunTrace> fast; // eta
    std::vector<RunTrace> slow; // eta / 4
    double eta = 1e-3;
    long long T = 2'000'000;
};

FloorRuns floor_runs() {
    FloorRuns runs;
    const TabularMdp env = example_chain_mdp(4, 1.0, 0.5, 0.9);
    const Policy only = Policy::deterministic({0, 0, 0, 0});
    for (int seed = 0; seed < 10; ++seed) {
        runs.fast.push_back(run_qlearning(env, only, ConstantRate{runs.eta},
                                          runs.T, 500 + seed, 200)
                                .trace);
        runs.slow.push_back(run_qlearning(env, only, ConstantRate{runs.eta / 4},
                                          runs.T, 500 + seed, 200)
                                .trace);
    }
    return runs;
}

void criterion5_floor_scaling(const FloorRuns& runs, double run_seconds) {
    std::vector<double> ratios;
    for (int seed = 0; seed < 10; ++seed)
        ratios.push_back(trace_floor(runs.fast[seed]) /
                         trace_floor(runs.slow[seed]));
    const double med = median(ratios);
    std::ostringstream detail;
    detail << "median F(eta)/F(eta/4) = " << format_double(med)
           << " (prediction 2, accept [1.4, 2.9])";
    report(5, "error-floor scaling", med >= 1.4 && med <= 2.9, detail.str(),
           run_seconds);
}

void criterion6_blockwise_decay(const FloorRuns& runs) {
    Timer timer;
    const StateActionChain chain = build_example_chain(4, 1.0, 0.5);
    bool pass = true;
    std::ostringstream detail;
    for (const auto& [traces, eta] :
         {std::pair{&runs.fast, runs.eta}, {&runs.slow, runs.eta / 4}}) {
        const auto diag =
            compute_diagnostics(chain, eta, 0.9, runs.T, 0.1, 0.01);
        std::vector<double> factors;
        for (const auto& trace : *traces)
            factors.push_back(fit_blockwise_decay(trace, diag).decay_factor);
        const double med = median(factors);
        const double threshold = 1.0 - diag.rho / 4.0;
        pass = pass && med <= threshold;
        detail << "eta " << format_double(eta) << ": factor "
               << format_double(med) << " <= " << format_double(threshold) << "; ";
    }
    report(6, "blockwise decay", pass, detail.str(), timer.seconds());
}

void criterion7_occupancy_concentration() {
    Timer timer;
    const StateActionChain chain = build_example_chain(4, 1.0, 0.5);
    const long long t_mix = mixing_time(chain);
    const double delta = 0.1;
    const long long t = static_cast<long long>(
        std::ceil(443.0 * static_cast<double>(t_mix) / chain.mu_min *
                  std::log(4.0 * chain.n / delta)));
    const double failure = occupancy_check(chain, t, 200, 424242);
    std::ostringstream detail;
    detail << "failure fraction " << format_double(failure) << " at t = " << t;
    report(7, "occupancy concentration", failure <= delta, detail.str(),
           timer.seconds());
}

void criterion8_vr_acceleration() {
    Timer timer;
    const TabularMdp mdp = bench_env();
    const Policy behavior = Policy::uniform(5, 3);
    const StateActionChain chain = induce_chain(mdp, behavior);
    const double t_mix = static_cast<double>(mixing_time(chain));
    // oracle-informed recipes at eps = 0.3, delta = 0.1; tuned constants
    const VrConfig vc = vrq_params(0.3, 0.1, 0.9, chain.mu_min, t_mix,
                                   mdp.pair_count(), 8.0, 0.01, 0.04, 1.0);
    const long long equal_samples =
        static_cast<long long>(vc.epochs) * (vc.recenter_samples + vc.epoch_length);
    const double eta_plain = mixing_rate_recipe(0.1, 0.1, equal_samples, t_mix,
                                                0.9, mdp.pair_count(), 8000.0);
    const int n_seeds = 20;
    std::vector<double> contraction;
    int vr_wins = 0;
    for (int seed = 0; seed < n_seeds; ++seed) {
        const auto vr = run_vrq(mdp, behavior, vc, 700 + seed);
        const auto plain = run_qlearning(mdp, behavior, ConstantRate{eta_plain},
                                         equal_samples, 700 + seed,
                                         equal_samples / 50);
        const double e_first = vr.epochs[1].linf_error;
        const double e_final = vr.epochs.back().linf_error;
        contraction.push_back(
            std::pow(e_final / e_first, 1.0 / (vc.epochs - 1)));
        if (e_final < plain.trace.rows.back().linf_error) ++vr_wins;
    }
    const double med = median(contraction);
    std::ostringstream detail;
    detail << "median per-epoch factor " << format_double(med) << " (M = "
           << vc.epochs << ", N = " << vc.recenter_samples << ", t_epoch = "
           << vc.epoch_length << "), VR wins " << vr_wins << "/" << n_seeds;
    report(8, "VR acceleration",
           med <= 0.75 && vr_wins * 10 >= n_seeds * 7, detail.str(),
           timer.seconds());
}

void criterion9_td_equivalence() {
    Timer timer;
    int ok = 0;
    for (int trial = 0; trial < 20; ++trial) {
        const int states = 2 + trial % 6;
        const TabularMdp mrp = make_random_mdp(states, 1, 0.9, 5000 + trial);
        const Policy only = Policy::deterministic(std::vector<int>(states, 0));
        const auto td = run_td(mrp, ConstantRate{0.2}, 3000, 60 + trial, 500);
        const auto ql =
            run_qlearning(mrp, only, ConstantRate{0.2}, 3000, 60 + trial, 500);
        if (td.v == extract_values(ql.state.q, states, 1)) ++ok;
    }
    std::ostringstream detail;
    detail << ok << "/20 MRPs identical entrywise";
    report(9, "TD/Q equivalence", ok == 20, detail.str(), timer.seconds());
}

std::string run_cli(const std::string& args) {
    const std::string cmd = std::string(MDPLAB_CLI_PATH) + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    std::string out;
    if (!pipe) return out;
    std::array<char, 512> buf;
    while (fgets(buf.data(), buf.size(), pipe)) out += buf.data();
    pclose(pipe);
    return out;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void criterion10_cli_determinism() {
    Timer timer;
    const auto dir = std::filesystem::temp_directory_path() / "mdplab_acceptance";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    const auto cfg = dir / "exp.conf";
    std::ofstream(cfg) << "environment = random 5 3 77\n"
                          "gamma = 0.9\n"
                          "schedule = constant 0.005\n"
                          "T = 50000\n"
                          "record_every = 1000\n"
                          "seeds = 11\n";
    bool pass = true;
    std::ostringstream detail;
    for (const std::string alg : {"qlearn", "td", "vrq"}) {
        if (alg == "td") {
            std::ofstream(cfg) << "environment = example 6 2 0.4\n"
                                  "gamma = 0.9\n"
                                  "schedule = constant 0.005\n"
                                  "T = 50000\n"
                                  "record_every = 1000\n"
                                  "seeds = 11\n";
        } else if (alg == "vrq") {
            std::ofstream(cfg) << "environment = random 5 3 77\n"
                                  "gamma = 0.9\n"
                                  "vr_epochs = 3\n"
                                  "vr_recenter = 2000\n"
                                  "vr_epoch_length = 4000\n"
                                  "vr_eta = 0.05\n"
                                  "seeds = 11\n";
        }
        const auto out_a = dir / (alg + "_a");
        const auto out_b = dir / (alg + "_b");
        run_cli(alg + " --config " + cfg.string() + " --out " + out_a.string());
        run_cli(alg + " --config " + cfg.string() + " --out " + out_b.string());
        const std::string a = slurp(out_a / (alg + "_seed11.csv"));
        const std::string b = slurp(out_b / (alg + "_seed11.csv"));
        const bool same = !a.empty() && a == b;
        pass = pass && same;
        detail << alg << (same ? " identical; " : " DIFFERS; ");
    }
    std::filesystem::remove_all(dir);
    report(10, "CLI determinism", pass, detail.str(), timer.seconds());
}

} // namespace

int main() {
    Timer total;
    criterion1_oracle_consistency();
    criterion2_example_chain_values();
    criterion3_cover_time_agreement();
    criterion4_qlearning_convergence();
    {
        Timer shared; // the 2e6-step runs feed criteria 5 and 6
        const FloorRuns runs = floor_runs();
        criterion5_floor_scaling(runs, shared.seconds());
        criterion6_blockwise_decay(runs);
    }
    criterion7_occupancy_concentration();
    criterion8_vr_acceleration();
    criterion9_td_equivalence();
    criterion10_cli_determinism();
    std::printf("%s: %d criterion(s) failed (%.1fs total)\n",
                g_failures == 0 ? "ALL PASS" : "FAILURES", g_failures,
                total.seconds());
    return g_failures == 0 ? 0 : 1;
}
