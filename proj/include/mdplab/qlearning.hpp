#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>

#include "mdplab/mdp.hpp"
#include "mdplab/sampler.hpp"
#include "mdplab/schedule.hpp"
#include "mdplab/solve.hpp"
#include "mdplab/trace.hpp"

namespace mdplab {

// Q-learning iterate plus schedule state: visit counts K_t, the running
// occupancy estimate mu_hat, and the snapshot table the adaptive schedule
// reports.
struct LearnerState {
    QTable q;
    QTable snapshot;
    VisitCounter counter;
    double mu_hat = 0.0;
    long long t = 0;
    double last_eta = 0.0;
};

inline LearnerState make_learner_state(int n_states, int n_actions) {
    const int n = n_states * n_actions;
    return {QTable(n, 0.0), QTable(n, 0.0), VisitCounter(n), 1.0 / n, 0, 0.0};
}

// eta_t for a step; mu_hat is only consulted by the adaptive schedule.
inline double step_eta(const LearningRateSchedule& schedule, long long t,
                       double mu_hat, double gamma) {
    if (const auto* c = std::get_if<ConstantRate>(&schedule)) return c->eta;
    if (std::holds_alternative<LinearRate>(schedule))
        return 1.0 / static_cast<double>(t);
    if (const auto* p = std::get_if<PolynomialRate>(&schedule))
        return 1.0 / std::pow(static_cast<double>(t), p->omega);
    if (const auto* rl = std::get_if<RescaledLinearRate>(&schedule))
        return std::min(1.0, rl->scale / (static_cast<double>(t) + rl->offset));
    const auto& ad = std::get<AdaptiveRate>(schedule);
    // log 1 = 0 makes the rate degenerate at t = 1; the schedule starts there
    // at the clamp value.
    if (t == 1) return 1.0;
    return adaptive_eta(t, mu_hat, gamma, ad.c_eta);
}

// One asynchronous update along the trajectory: the sampled entry moves to
// (1 - eta_t) Q_{t-1}(s,a) + eta_t (r(s,a) + gamma max_a' Q_{t-1}(s',a'));
// every other entry is untouched. Under the adaptive schedule this also
// advances K_t, mu_hat and the snapshot.
inline void q_step(LearnerState& state, const Transition& tr,
                   const LearningRateSchedule& schedule, double gamma,
                   int n_actions) {
    const int pair = pair_index(tr.state, tr.action, n_actions);
    const long long t = state.t + 1;
    state.counter.record(pair);
    if (is_adaptive(schedule))
        state.mu_hat = adaptive_mu_update(state.mu_hat, state.counter.min_count(),
                                          t, state.counter.size());
    const double eta = step_eta(schedule, t, state.mu_hat, gamma);
    if (!(eta > 0.0 && eta <= 1.0))
        throw std::logic_error("q_step: schedule produced eta outside (0,1]");
    // Snapshot refresh per the adaptive recursion: when the rate changes at
    // step t, the table frozen is Q_{t-1}.
    if (is_adaptive(schedule) && t >= 2 && eta != state.last_eta)
        state.snapshot = state.q;

    const int next_base = tr.next_state * n_actions;
    double next_value = state.q[next_base];
    for (int a = 1; a < n_actions; ++a)
        next_value = std::max(next_value, state.q[next_base + a]);
    state.q[pair] = (1.0 - eta) * state.q[pair] +
                    eta * (tr.reward + gamma * next_value);
    state.last_eta = eta;
    state.t = t;
}

// Non-adaptive schedules define the snapshot as the current table, so
// downstream consumers are uniform.
inline const QTable& effective_snapshot(const LearnerState& state,
                                        const LearningRateSchedule& schedule) {
    return is_adaptive(schedule) ? state.snapshot : state.q;
}

struct QlearnResult {
    LearnerState state;
    RunTrace trace;
    QTable q_star;
};

// Asynchronous Q-learning on a single trajectory, Q_0 = 0. The trace records
// (t, ||Q_t - Q*||_inf, eta_t) every record_every steps and at t = T, with
// the snapshot error added under adaptive schedules.
inline QlearnResult run_qlearning(const TabularMdp& mdp, const Policy& behavior,
                                  const LearningRateSchedule& schedule,
                                  long long T, std::uint64_t seed,
                                  long long record_every, int start_state = 0) {
    if (T < 1) throw std::invalid_argument("run_qlearning: T must be >= 1");
    if (record_every < 1)
        throw std::invalid_argument("run_qlearning: record_every must be >= 1");
    validate(schedule);
    const QTable q_star = value_iteration(mdp).q;
    const double bound = 1.0 / (1.0 - mdp.discount);

    TrajectorySampler sampler(mdp, behavior, seed, start_state);
    LearnerState state = make_learner_state(mdp.n_states, mdp.n_actions);
    RunTrace trace;
    trace.rows.reserve(static_cast<std::size_t>(T / record_every) + 2);
    trace.meta = {seed,
                  describe(schedule),
                  T,
                  mdp.discount,
                  "",
                  std::string(Xoshiro256ss::algorithm_id),
                  "qlearn",
                  {}};
    for (long long t = 1; t <= T; ++t) {
        q_step(state, sampler.step(), schedule, mdp.discount, mdp.n_actions);
        if (t % record_every == 0 || t == T) {
            for (double v : state.q)
                if (!(v >= 0.0 && v <= bound + 1e-9))
                    throw std::logic_error(
                        "run_qlearning: iterate escaped [0, 1/(1-gamma)]");
            TraceRow row{t, linf_distance(state.q, q_star), state.last_eta, {}};
            if (is_adaptive(schedule))
                row.snapshot_error = linf_distance(state.snapshot, q_star);
            trace.rows.push_back(row);
        }
    }
    return {std::move(state), std::move(trace), q_star};
}

struct TdResult {
    ValueTable v;
    RunTrace trace;
    ValueTable v_star;
};

// TD learning on a Markov reward process (an MDP whose action set is a
// singleton): V_t(s_{t-1}) = (1-eta_t) V_{t-1}(s_{t-1}) +
// eta_t (r(s_{t-1}) + gamma V_{t-1}(s_t)). Consumes the trajectory stream
// exactly like run_qlearning does, so the two match bitwise on shared seeds.
inline TdResult run_td(const TabularMdp& mrp, const LearningRateSchedule& schedule,
                       long long T, std::uint64_t seed, long long record_every,
                       int start_state = 0) {
    if (mrp.n_actions != 1)
        throw std::invalid_argument("run_td: the action space must be a singleton");
    if (T < 1) throw std::invalid_argument("run_td: T must be >= 1");
    if (record_every < 1)
        throw std::invalid_argument("run_td: record_every must be >= 1");
    validate(schedule);
    const Policy only_action = Policy::deterministic(std::vector<int>(mrp.n_states, 0));
    const ValueTable v_star = policy_evaluation_exact(mrp, only_action).v;

    TrajectorySampler sampler(mrp, only_action, seed, start_state);
    ValueTable v(mrp.n_states, 0.0);
    VisitCounter counter(mrp.n_states);
    double mu_hat = 1.0 / mrp.n_states;
    double last_eta = 0.0;
    RunTrace trace;
    trace.meta = {seed,
                  describe(schedule),
                  T,
                  mrp.discount,
                  "",
                  std::string(Xoshiro256ss::algorithm_id),
                  "td",
                  {}};
    for (long long t = 1; t <= T; ++t) {
        const Transition tr = sampler.step();
        counter.record(tr.state);
        if (is_adaptive(schedule))
            mu_hat = adaptive_mu_update(mu_hat, counter.min_count(), t,
                                        mrp.n_states);
        const double eta = step_eta(schedule, t, mu_hat, mrp.discount);
        if (!(eta > 0.0 && eta <= 1.0))
            throw std::logic_error("run_td: schedule produced eta outside (0,1]");
        v[tr.state] = (1.0 - eta) * v[tr.state] +
                      eta * (tr.reward + mrp.discount * v[tr.next_state]);
        last_eta = eta;
        if (t % record_every == 0 || t == T)
            trace.rows.push_back({t, linf_distance(v, v_star), last_eta, {}});
    }
    return {std::move(v), std::move(trace), v_star};
}

} // namespace mdplab
