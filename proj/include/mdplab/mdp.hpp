#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mdplab/rng.hpp"

namespace mdplab {

// Q-function estimate over flattened state-action pairs; index = s * |A| + a.
using QTable = std::vector<double>;
// Value function over states.
using ValueTable = std::vector<double>;

inline int pair_index(int state, int action, int n_actions) {
    return state * n_actions + action;
}

constexpr double kRowSumTol = 1e-12;

// Finite discounted MDP (S, A, P, r, gamma). Rewards are deterministic,
// live in [0,1], and transition rows are validated at construction.
struct TabularMdp {
    int n_states = 0;
    int n_actions = 0;
    std::vector<double> transition; // [(s*|A| + a)*|S| + s'] row-major
    std::vector<double> reward;     // [s*|A| + a]
    double discount = 0.0;

    TabularMdp(int states, int actions, std::vector<double> p,
               std::vector<double> r, double gamma)
        : n_states(states), n_actions(actions), transition(std::move(p)),
          reward(std::move(r)), discount(gamma) {
        validate();
    }

    int pair_count() const { return n_states * n_actions; }

    double prob(int s, int a, int s2) const {
        return transition[(static_cast<std::size_t>(s) * n_actions + a) * n_states + s2];
    }

    double reward_at(int s, int a) const {
        return reward[pair_index(s, a, n_actions)];
    }

    std::span<const double> transition_row(int s, int a) const {
        return {transition.data() +
                    (static_cast<std::size_t>(s) * n_actions + a) * n_states,
                static_cast<std::size_t>(n_states)};
    }

private:
    void validate() const {
        if (n_states <= 0 || n_actions <= 0)
            throw std::invalid_argument("TabularMdp: state/action counts must be positive");
        if (!(discount > 0.0 && discount < 1.0))
            throw std::invalid_argument("TabularMdp: discount must lie strictly in (0,1)");
        if (reward.size() != static_cast<std::size_t>(pair_count()))
            throw std::invalid_argument("TabularMdp: reward size mismatch");
        if (transition.size() != static_cast<std::size_t>(pair_count()) * n_states)
            throw std::invalid_argument("TabularMdp: transition size mismatch");
        for (double r : reward)
            if (!(r >= 0.0 && r <= 1.0))
                throw std::invalid_argument("TabularMdp: rewards must lie in [0,1]");
        for (int s = 0; s < n_states; ++s) {
            for (int a = 0; a < n_actions; ++a) {
                double sum = 0.0;
                for (double p : transition_row(s, a)) {
                    if (p < 0.0)
                        throw std::invalid_argument("TabularMdp: negative transition probability");
                    sum += p;
                }
                if (std::abs(sum - 1.0) > kRowSumTol)
                    throw std::invalid_argument("TabularMdp: transition row does not sum to 1");
            }
        }
    }
};

// Stationary action-selection rule: deterministic (state -> action) or
// stochastic (state -> distribution over actions).
class Policy {
public:
    static Policy deterministic(std::vector<int> actions) {
        Policy p;
        p.det_ = std::move(actions);
        return p;
    }

    static Policy stochastic(std::vector<double> probs, int n_states, int n_actions) {
        Policy p;
        p.probs_ = std::move(probs);
        p.n_actions_ = n_actions;
        if (p.probs_.size() != static_cast<std::size_t>(n_states) * n_actions)
            throw std::invalid_argument("Policy: probability table size mismatch");
        return p;
    }

    static Policy uniform(int n_states, int n_actions) {
        return stochastic(std::vector<double>(
                              static_cast<std::size_t>(n_states) * n_actions,
                              1.0 / n_actions),
                          n_states, n_actions);
    }

    bool is_deterministic() const { return !det_.empty(); }

    int action(int s) const { return det_.at(s); }

    double prob(int s, int a) const {
        if (is_deterministic()) return det_[s] == a ? 1.0 : 0.0;
        return probs_[static_cast<std::size_t>(s) * n_actions_ + a];
    }

    std::span<const double> row(int s) const {
        return {probs_.data() + static_cast<std::size_t>(s) * n_actions_,
                static_cast<std::size_t>(n_actions_)};
    }

    void validate(int n_states, int n_actions) const {
        if (is_deterministic()) {
            if (det_.size() != static_cast<std::size_t>(n_states))
                throw std::invalid_argument("Policy: wrong number of states");
            for (int a : det_)
                if (a < 0 || a >= n_actions)
                    throw std::invalid_argument("Policy: action out of range");
            return;
        }
        if (n_actions_ != n_actions ||
            probs_.size() != static_cast<std::size_t>(n_states) * n_actions)
            throw std::invalid_argument("Policy: dimension mismatch");
        for (int s = 0; s < n_states; ++s) {
            double sum = 0.0;
            for (double p : row(s)) {
                if (p < 0.0) throw std::invalid_argument("Policy: negative probability");
                sum += p;
            }
            if (std::abs(sum - 1.0) > kRowSumTol)
                throw std::invalid_argument("Policy: row does not sum to 1");
        }
    }

private:
    std::vector<int> det_;
    std::vector<double> probs_;
    int n_actions_ = 0;
};

// V(s) = max_a Q(s,a).
inline ValueTable extract_values(const QTable& q, int n_states, int n_actions) {
    ValueTable v(n_states);
    for (int s = 0; s < n_states; ++s) {
        double best = q[pair_index(s, 0, n_actions)];
        for (int a = 1; a < n_actions; ++a)
            best = std::max(best, q[pair_index(s, a, n_actions)]);
        v[s] = best;
    }
    return v;
}

// Greedy policy; ties break toward the lowest action index.
inline Policy greedy_policy(const QTable& q, int n_states, int n_actions) {
    std::vector<int> act(n_states, 0);
    for (int s = 0; s < n_states; ++s) {
        double best = q[pair_index(s, 0, n_actions)];
        for (int a = 1; a < n_actions; ++a) {
            const double v = q[pair_index(s, a, n_actions)];
            if (v > best) { // strict: lowest index wins ties
                best = v;
                act[s] = a;
            }
        }
    }
    return Policy::deterministic(std::move(act));
}

inline double linf_distance(std::span<const double> a, std::span<const double> b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

inline double linf_norm(std::span<const double> a) {
    double d = 0.0;
    for (double x : a) d = std::max(d, std::abs(x));
    return d;
}

// Ergodic random MDP with a fixed construction per seed: transition rows are
// floored at 0.1 mass before normalization so every entry is positive.
inline TabularMdp make_random_mdp(int n_states, int n_actions, double gamma,
                                  std::uint64_t seed) {
    Xoshiro256ss rng(seed);
    std::vector<double> p(static_cast<std::size_t>(n_states) * n_actions * n_states);
    std::vector<double> r(static_cast<std::size_t>(n_states) * n_actions);
    for (int s = 0; s < n_states; ++s) {
        for (int a = 0; a < n_actions; ++a) {
            double sum = 0.0;
            const std::size_t base =
                (static_cast<std::size_t>(s) * n_actions + a) * n_states;
            for (int s2 = 0; s2 < n_states; ++s2) {
                p[base + s2] = 0.1 + rng.uniform();
                sum += p[base + s2];
            }
            for (int s2 = 0; s2 < n_states; ++s2) p[base + s2] /= sum;
            r[pair_index(s, a, n_actions)] = rng.uniform();
        }
    }
    return TabularMdp(n_states, n_actions, std::move(p), std::move(r), gamma);
}

// --- plain-text MDP file format ---
//   mdp <|S|> <|A|> <gamma>
//   r <s> <a> <value>            (|S|*|A| lines)
//   p <s> <a> <p_0> ... <p_{|S|-1}>
// Whitespace-separated; '#' starts a comment.

inline TabularMdp load_mdp(std::istream& in) {
    std::string stripped;
    for (std::string line; std::getline(in, line);) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        stripped += line;
        stripped += '\n';
    }
    std::istringstream ss(stripped);
    std::string tag;
    if (!(ss >> tag) || tag != "mdp")
        throw std::invalid_argument("mdp file: expected header 'mdp <S> <A> <gamma>'");
    int n_states = 0, n_actions = 0;
    double gamma = 0.0;
    if (!(ss >> n_states >> n_actions >> gamma))
        throw std::invalid_argument("mdp file: malformed header");
    if (n_states <= 0 || n_actions <= 0)
        throw std::invalid_argument("mdp file: bad dimensions");
    const std::size_t pairs = static_cast<std::size_t>(n_states) * n_actions;
    std::vector<double> r(pairs, -1.0);
    std::vector<double> p(pairs * n_states, -1.0);
    std::vector<char> r_seen(pairs, 0), p_seen(pairs, 0);
    while (ss >> tag) {
        int s = 0, a = 0;
        if (!(ss >> s >> a))
            throw std::invalid_argument("mdp file: malformed '" + tag + "' line");
        if (s < 0 || s >= n_states || a < 0 || a >= n_actions)
            throw std::invalid_argument("mdp file: state/action index out of range");
        const std::size_t idx = static_cast<std::size_t>(pair_index(s, a, n_actions));
        if (tag == "r") {
            if (!(ss >> r[idx]))
                throw std::invalid_argument("mdp file: malformed reward value");
            r_seen[idx] = 1;
        } else if (tag == "p") {
            for (int s2 = 0; s2 < n_states; ++s2)
                if (!(ss >> p[idx * n_states + s2]))
                    throw std::invalid_argument("mdp file: malformed probability row");
            p_seen[idx] = 1;
        } else {
            throw std::invalid_argument("mdp file: unknown tag '" + tag + "'");
        }
    }
    for (std::size_t i = 0; i < pairs; ++i)
        if (!r_seen[i] || !p_seen[i])
            throw std::invalid_argument("mdp file: missing reward or transition rows");
    return TabularMdp(n_states, n_actions, std::move(p), std::move(r), gamma);
}

inline TabularMdp load_mdp_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open mdp file: " + path);
    return load_mdp(in);
}

inline void save_mdp(const TabularMdp& mdp, std::ostream& out) {
    out.precision(17);
    out << "mdp " << mdp.n_states << ' ' << mdp.n_actions << ' ' << mdp.discount << '\n';
    for (int s = 0; s < mdp.n_states; ++s)
        for (int a = 0; a < mdp.n_actions; ++a)
            out << "r " << s << ' ' << a << ' ' << mdp.reward_at(s, a) << '\n';
    for (int s = 0; s < mdp.n_states; ++s)
        for (int a = 0; a < mdp.n_actions; ++a) {
            out << "p " << s << ' ' << a;
            for (double v : mdp.transition_row(s, a)) out << ' ' << v;
            out << '\n';
        }
}

} // namespace mdplab
