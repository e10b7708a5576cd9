#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "mdplab/mdp.hpp"

namespace mdplab {

// Thrown when an iterative solver fails to reach its tolerance; carries the
// final residual.
struct ConvergenceError : std::runtime_error {
    ConvergenceError(const std::string& what, double residual_)
        : std::runtime_error(what), residual(residual_) {}
    double residual;
};

// One application of the Bellman optimality operator:
// T(q)(s,a) = r(s,a) + gamma * sum_{s'} P(s'|s,a) * max_{a'} q(s',a').
inline QTable bellman_optimality(const TabularMdp& mdp, const QTable& q) {
    if (q.size() != static_cast<std::size_t>(mdp.pair_count()))
        throw std::invalid_argument("bellman_optimality: dimension mismatch");
    const ValueTable v = extract_values(q, mdp.n_states, mdp.n_actions);
    QTable out(q.size());
    for (int s = 0; s < mdp.n_states; ++s) {
        for (int a = 0; a < mdp.n_actions; ++a) {
            double exp_v = 0.0;
            const auto row = mdp.transition_row(s, a);
            for (int s2 = 0; s2 < mdp.n_states; ++s2) exp_v += row[s2] * v[s2];
            out[pair_index(s, a, mdp.n_actions)] =
                mdp.reward_at(s, a) + mdp.discount * exp_v;
        }
    }
    return out;
}

inline int default_value_iteration_cap(double tol, double gamma) {
    return static_cast<int>(
               std::ceil(std::log(tol * (1.0 - gamma)) / std::log(gamma))) +
           64;
}

struct ValueIterationResult {
    QTable q;
    int iterations = 0;
    double residual = 0.0;
};

// Fixed-point iteration for Q*; the returned table satisfies
// ||T(Q) - Q||_inf <= tol. Ground-truth oracle for every learner in the lab.
inline ValueIterationResult value_iteration(const TabularMdp& mdp,
                                            double tol = 1e-10,
                                            int max_iters = 0) {
    if (!(tol > 0.0)) throw std::invalid_argument("value_iteration: tol must be > 0");
    if (max_iters <= 0) max_iters = default_value_iteration_cap(tol, mdp.discount);
    QTable q(mdp.pair_count(), 0.0);
    double residual = linf_norm(bellman_optimality(mdp, q)); // ||T(0) - 0||
    for (int it = 1; it <= max_iters; ++it) {
        QTable next = bellman_optimality(mdp, q);
        residual = linf_distance(next, q);
        q = std::move(next);
        // ||T(q) - q|| <= gamma * ||q - q_prev|| = gamma * residual <= tol
        if (residual <= tol) return {std::move(q), it, residual};
    }
    throw ConvergenceError("value_iteration: no convergence after " +
                               std::to_string(max_iters) +
                               " iterations, residual " + std::to_string(residual),
                           residual);
}

namespace detail {

// Gaussian elimination with partial pivoting; a is n x n row-major, solves in
// place. The systems here are I - gamma*P with gamma < 1, far from singular.
inline std::vector<double> solve_dense(std::vector<double> a,
                                       std::vector<double> b, int n) {
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        for (int row = col + 1; row < n; ++row)
            if (std::abs(a[row * n + col]) > std::abs(a[pivot * n + col]))
                pivot = row;
        if (std::abs(a[pivot * n + col]) < 1e-14)
            throw std::logic_error("solve_dense: singular system");
        if (pivot != col) {
            for (int j = col; j < n; ++j) std::swap(a[col * n + j], a[pivot * n + j]);
            std::swap(b[col], b[pivot]);
        }
        const double inv = 1.0 / a[col * n + col];
        for (int row = col + 1; row < n; ++row) {
            const double f = a[row * n + col] * inv;
            if (f == 0.0) continue;
            for (int j = col; j < n; ++j) a[row * n + j] -= f * a[col * n + j];
            b[row] -= f * b[col];
        }
    }
    std::vector<double> x(n);
    for (int row = n - 1; row >= 0; --row) {
        double acc = b[row];
        for (int j = row + 1; j < n; ++j) acc -= a[row * n + j] * x[j];
        x[row] = acc / a[row * n + row];
    }
    return x;
}

} // namespace detail

struct PolicyEvaluation {
    QTable q;     // Q^pi = (I - gamma P^pi)^{-1} r
    ValueTable v; // V^pi = (I - gamma P_pi)^{-1} r_pi
};

// Exact policy evaluation by direct linear solve of the Bellman consistency
// equations Q^pi = r + gamma P Pi^pi Q^pi and V^pi = r_pi + gamma P_pi V^pi.
inline PolicyEvaluation policy_evaluation_exact(const TabularMdp& mdp,
                                                const Policy& policy) {
    policy.validate(mdp.n_states, mdp.n_actions);
    const int S = mdp.n_states, A = mdp.n_actions, n = S * A;
    const double g = mdp.discount;

    // (I - gamma P^pi) over state-action pairs:
    // P^pi((s,a),(s',a')) = P(s'|s,a) * pi(a'|s')
    std::vector<double> m(static_cast<std::size_t>(n) * n, 0.0);
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) {
            const int i = pair_index(s, a, A);
            m[static_cast<std::size_t>(i) * n + i] += 1.0;
            const auto row = mdp.transition_row(s, a);
            for (int s2 = 0; s2 < S; ++s2)
                for (int a2 = 0; a2 < A; ++a2) {
                    const double p = row[s2] * policy.prob(s2, a2);
                    if (p != 0.0)
                        m[static_cast<std::size_t>(i) * n + pair_index(s2, a2, A)] -= g * p;
                }
        }
    PolicyEvaluation out;
    out.q = detail::solve_dense(std::move(m), mdp.reward, n);

    // (I - gamma P_pi) over states: P_pi(s,s') = sum_a pi(a|s) P(s'|s,a)
    std::vector<double> ms(static_cast<std::size_t>(S) * S, 0.0);
    std::vector<double> r_pi(S, 0.0);
    for (int s = 0; s < S; ++s) {
        ms[static_cast<std::size_t>(s) * S + s] += 1.0;
        for (int a = 0; a < A; ++a) {
            const double pa = policy.prob(s, a);
            if (pa == 0.0) continue;
            r_pi[s] += pa * mdp.reward_at(s, a);
            const auto row = mdp.transition_row(s, a);
            for (int s2 = 0; s2 < S; ++s2)
                ms[static_cast<std::size_t>(s) * S + s2] -= g * pa * row[s2];
        }
    }
    out.v = detail::solve_dense(std::move(ms), std::move(r_pi), S);
    return out;
}

// Per-pair variance of v under the transition kernel:
// Var(s,a) = sum P(s'|s,a) v(s')^2 - (sum P(s'|s,a) v(s'))^2.
// Tiny negatives from cancellation are clamped to zero.
inline QTable variance_vector(const TabularMdp& mdp, const ValueTable& v) {
    if (v.size() != static_cast<std::size_t>(mdp.n_states))
        throw std::invalid_argument("variance_vector: dimension mismatch");
    QTable out(mdp.pair_count());
    for (int s = 0; s < mdp.n_states; ++s)
        for (int a = 0; a < mdp.n_actions; ++a) {
            const auto row = mdp.transition_row(s, a);
            double m1 = 0.0, m2 = 0.0;
            for (int s2 = 0; s2 < mdp.n_states; ++s2) {
                m1 += row[s2] * v[s2];
                m2 += row[s2] * v[s2] * v[s2];
            }
            double var = m2 - m1 * m1;
            if (var < 0.0) {
                if (var < -1e-12)
                    throw std::logic_error("variance_vector: negative variance");
                var = 0.0;
            }
            out[pair_index(s, a, mdp.n_actions)] = var;
        }
    return out;
}

} // namespace mdplab
