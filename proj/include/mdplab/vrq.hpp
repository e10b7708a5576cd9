#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "mdplab/mdp.hpp"
#include "mdplab/sampler.hpp"
#include "mdplab/solve.hpp"
#include "mdplab/trace.hpp"

namespace mdplab {

// Batch estimate of T(Q_bar) built from N consecutive trajectory samples.
// Pairs the batch never visited fall back to Q_bar itself and are flagged.
struct RecenteringEstimate {
    QTable t_bar;
    std::vector<long long> visit_counts;
    std::vector<char> unvisited;
    int unvisited_count = 0;
};

struct VrConfig {
    int epochs = 0;              // M
    long long recenter_samples = 0; // N
    long long epoch_length = 0;  // t_epoch
    double eta = 0.0;            // within-epoch constant rate
    double c0 = 1.0, c1 = 1.0, c2 = 1.0, c3 = 1.0;

    void validate() const {
        if (epochs < 0 || recenter_samples < 1 || epoch_length < 0)
            throw std::invalid_argument("VrConfig: nonpositive sizes");
        if (!(eta > 0.0 && eta <= 1.0))
            throw std::invalid_argument("VrConfig: eta must lie in (0,1]");
    }
};

// T~(Q_bar)(s,a) = r(s,a) + gamma * (empirical mean of max_a' Q_bar(s',a')
// over the batch transitions leaving (s,a)). Consumes exactly N samples.
inline RecenteringEstimate recenter(TrajectorySampler& sampler, const QTable& q_bar,
                                    long long N, double gamma, int n_states,
                                    int n_actions) {
    if (N < 1) throw std::invalid_argument("recenter: N must be >= 1");
    const int n = n_states * n_actions;
    const ValueTable v_bar = extract_values(q_bar, n_states, n_actions);
    RecenteringEstimate est;
    est.visit_counts.assign(n, 0);
    est.unvisited.assign(n, 0);
    std::vector<double> sums(n, 0.0);
    for (long long i = 0; i < N; ++i) {
        const Transition tr = sampler.step();
        const int pair = pair_index(tr.state, tr.action, n_actions);
        ++est.visit_counts[pair];
        sums[pair] += v_bar[tr.next_state];
    }
    est.t_bar.resize(n);
    const auto& mdp = sampler.mdp();
    for (int s = 0; s < n_states; ++s)
        for (int a = 0; a < n_actions; ++a) {
            const int pair = pair_index(s, a, n_actions);
            if (est.visit_counts[pair] > 0) {
                est.t_bar[pair] = mdp.reward_at(s, a) +
                                  gamma * sums[pair] / est.visit_counts[pair];
            } else {
                est.t_bar[pair] = q_bar[pair];
                est.unvisited[pair] = 1;
                ++est.unvisited_count;
            }
        }
    return est;
}

// Variance-reduced update at the sampled pair:
// Q_t = (1-eta) Q_{t-1} + eta (T_t(Q_{t-1}) - T_t(Q_bar) + T~(Q_bar)).
// The reward terms of the two empirical operators cancel, leaving
// gamma (max Q_{t-1}(s',.) - max Q_bar(s',.)) + T~(Q_bar).
inline void vr_step(QTable& q, const Transition& tr, const QTable& q_bar,
                    const RecenteringEstimate& t_bar, double eta, double gamma,
                    int n_actions) {
    if (!(eta > 0.0 && eta <= 1.0))
        throw std::invalid_argument("vr_step: eta must lie in (0,1]");
    const int pair = pair_index(tr.state, tr.action, n_actions);
    const int next_base = tr.next_state * n_actions;
    double next_q = q[next_base], next_bar = q_bar[next_base];
    for (int a = 1; a < n_actions; ++a) {
        next_q = std::max(next_q, q[next_base + a]);
        next_bar = std::max(next_bar, q_bar[next_base + a]);
    }
    q[pair] = (1.0 - eta) * q[pair] +
              eta * (gamma * (next_q - next_bar) + t_bar.t_bar[pair]);
}

// One epoch: recenter on N fresh samples, then t_epoch variance-reduced
// updates starting from Q_0 = Q_bar. Advances the sampler by exactly
// N + t_epoch transitions.
inline QTable run_epoch(const QTable& q_bar, TrajectorySampler& sampler,
                        long long N, long long t_epoch, double eta, double gamma,
                        int* unvisited_pairs = nullptr) {
    const auto& mdp = sampler.mdp();
    const RecenteringEstimate est =
        recenter(sampler, q_bar, N, gamma, mdp.n_states, mdp.n_actions);
    if (unvisited_pairs) *unvisited_pairs = est.unvisited_count;
    QTable q = q_bar;
    for (long long t = 0; t < t_epoch; ++t)
        vr_step(q, sampler.step(), q_bar, est, eta, gamma, mdp.n_actions);
    return q;
}

struct VrqResult {
    QTable q; // Q_M^epoch
    std::vector<EpochRow> epochs;
    QTable q_star;
    RunMetadata meta;
    long long samples_consumed = 0;
};

// Multi-epoch variance-reduced Q-learning on one continuous trajectory;
// Q_0^epoch = 0 and the Markov state persists across epoch boundaries.
// Total samples consumed: M (N + t_epoch).
inline VrqResult run_vrq(const TabularMdp& mdp, const Policy& behavior,
                         const VrConfig& config, std::uint64_t seed,
                         int start_state = 0) {
    config.validate();
    const QTable q_star = value_iteration(mdp).q;
    TrajectorySampler sampler(mdp, behavior, seed, start_state);
    VrqResult out;
    out.q.assign(mdp.pair_count(), 0.0);
    out.q_star = q_star;
    out.meta = {seed,
                "vr eta=" + format_double(config.eta),
                config.epochs * (config.recenter_samples + config.epoch_length),
                mdp.discount,
                "",
                std::string(Xoshiro256ss::algorithm_id),
                "vrq",
                {{"N", static_cast<double>(config.recenter_samples)},
                 {"t_epoch", static_cast<double>(config.epoch_length)},
                 {"M", static_cast<double>(config.epochs)}}};
    out.epochs.push_back({0, linf_distance(out.q, q_star), 0, 0});
    int unvisited_total = 0;
    for (int m = 1; m <= config.epochs; ++m) {
        int unvisited = 0;
        out.q = run_epoch(out.q, sampler, config.recenter_samples,
                          config.epoch_length, config.eta, mdp.discount,
                          &unvisited);
        unvisited_total += unvisited;
        out.epochs.push_back(
            {m, linf_distance(out.q, q_star), unvisited, sampler.steps()});
    }
    out.meta.constants.emplace_back("unvisited_pair_events",
                                    static_cast<double>(unvisited_total));
    out.samples_consumed = sampler.steps();
    return out;
}

// Parameter recipes for target accuracy eps and failure probability delta.
// The epoch length appears inside its own log factor and is resolved by
// fixed-point iteration from t = 1e3.
inline double vrq_epoch_length_rhs(double eps, double delta, double gamma,
                                   double mu_min, double t_mix, long long n_pairs,
                                   double t_epoch, double c2) {
    return c2 / mu_min *
           (1.0 / std::pow(1.0 - gamma, 3) + t_mix / (1.0 - gamma)) *
           std::log(1.0 / ((1.0 - gamma) * (1.0 - gamma) * eps)) *
           std::log(static_cast<double>(n_pairs) * t_epoch / delta);
}

inline double vrq_recenter_samples(double eps, double delta, double gamma,
                                   double mu_min, double t_mix, long long n_pairs,
                                   double t_epoch, double c1) {
    return c1 / mu_min *
           (1.0 / (std::pow(1.0 - gamma, 3) * std::min(1.0, eps * eps)) + t_mix) *
           std::log(static_cast<double>(n_pairs) * t_epoch / delta);
}

inline VrConfig vrq_params(double eps, double delta, double gamma, double mu_min,
                           double t_mix, long long n_pairs, double c0 = 1.0,
                           double c1 = 1.0, double c2 = 1.0, double c3 = 1.0) {
    if (!(eps > 0.0 && eps <= 1.0 / (1.0 - gamma)))
        throw std::invalid_argument("vrq_params: eps out of range");
    if (!(delta > 0.0 && delta < 1.0) || !(mu_min > 0.0) || !(t_mix >= 1.0))
        throw std::invalid_argument("vrq_params: bad arguments");
    double t_epoch = 1e3;
    bool settled = false;
    for (int round = 0; round < 100; ++round) {
        const double next =
            vrq_epoch_length_rhs(eps, delta, gamma, mu_min, t_mix, n_pairs,
                                 t_epoch, c2);
        const bool done = std::abs(next - t_epoch) < 1e-6 * t_epoch;
        t_epoch = next;
        if (done) {
            settled = true;
            break;
        }
    }
    if (!settled)
        throw std::runtime_error("vrq_params: epoch-length fixed point did not settle");
    VrConfig config;
    config.c0 = c0;
    config.c1 = c1;
    config.c2 = c2;
    config.c3 = c3;
    config.epoch_length = static_cast<long long>(std::ceil(t_epoch));
    const double log_term =
        std::log(static_cast<double>(n_pairs) * t_epoch / delta);
    config.eta = std::min(
        1.0, c0 / log_term *
                 std::min((1.0 - gamma) * (1.0 - gamma) / (gamma * gamma),
                          1.0 / t_mix));
    config.recenter_samples = static_cast<long long>(std::ceil(
        vrq_recenter_samples(eps, delta, gamma, mu_min, t_mix, n_pairs, t_epoch, c1)));
    config.epochs = std::max(
        1, static_cast<int>(std::ceil(
               c3 * std::log(1.0 / (eps * (1.0 - gamma) * (1.0 - gamma))))));
    return config;
}

} // namespace mdplab
