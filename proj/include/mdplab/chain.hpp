#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "mdplab/mdp.hpp"
#include "mdplab/rng.hpp"
#include "mdplab/solve.hpp"

namespace mdplab {

// The |S||A|-state Markov chain a stationary behavior policy induces over
// state-action pairs; home of mu, mu_min, t_mix and t_cover.
struct StateActionChain {
    int n = 0;
    std::vector<double> kernel;     // n x n row-stochastic, row-major
    std::vector<double> stationary; // mu, sums to 1, all entries > 0
    double mu_min = 0.0;
    // Analytic second eigenvalue; set only for the constructed example chain.
    std::optional<double> lambda2_analytic;

    double k(int x, int y) const {
        return kernel[static_cast<std::size_t>(x) * n + y];
    }
    std::span<const double> row(int x) const {
        return {kernel.data() + static_cast<std::size_t>(x) * n,
                static_cast<std::size_t>(n)};
    }
};

// Stationary distribution by power iteration on the transpose of the
// half-lazy kernel (I+P)/2 (same fixed point, immune to periodicity),
// starting from uniform; l1 tolerance 1e-13, cap 1e6 sweeps.
inline std::vector<double> stationary_distribution(const std::vector<double>& kernel,
                                                   int n) {
    std::vector<double> mu(n, 1.0 / n), next(n);
    for (long long it = 0; it < 1'000'000; ++it) {
        for (int y = 0; y < n; ++y) next[y] = 0.5 * mu[y];
        for (int x = 0; x < n; ++x) {
            const double mx = 0.5 * mu[x];
            if (mx == 0.0) continue;
            const double* row = kernel.data() + static_cast<std::size_t>(x) * n;
            for (int y = 0; y < n; ++y) next[y] += mx * row[y];
        }
        double sum = 0.0;
        for (double v : next) sum += v;
        for (double& v : next) v /= sum;
        double diff = 0.0;
        for (int y = 0; y < n; ++y) diff += std::abs(next[y] - mu[y]);
        mu.swap(next);
        if (diff < 1e-13) {
            // residual against the original kernel
            double res = 0.0;
            for (int y = 0; y < n; ++y) {
                double acc = -mu[y];
                for (int x = 0; x < n; ++x)
                    acc += mu[x] * kernel[static_cast<std::size_t>(x) * n + y];
                res += std::abs(acc);
            }
            if (res > 1e-10)
                throw std::runtime_error(
                    "stationary_distribution: chain is not uniformly ergodic "
                    "(stationarity residual " + std::to_string(res) + ")");
            return mu;
        }
    }
    throw std::runtime_error(
        "stationary_distribution: power iteration did not converge; "
        "chain is not uniformly ergodic");
}

inline StateActionChain make_chain(std::vector<double> kernel, int n) {
    StateActionChain chain;
    chain.n = n;
    chain.kernel = std::move(kernel);
    for (int x = 0; x < n; ++x) {
        double sum = 0.0;
        for (double v : chain.row(x)) {
            if (v < 0.0)
                throw std::invalid_argument("StateActionChain: negative kernel entry");
            sum += v;
        }
        if (std::abs(sum - 1.0) > kRowSumTol)
            throw std::invalid_argument("StateActionChain: kernel row does not sum to 1");
    }
    chain.stationary = stationary_distribution(chain.kernel, n);
    chain.mu_min = *std::min_element(chain.stationary.begin(), chain.stationary.end());
    if (chain.mu_min <= 1e-12)
        throw std::runtime_error(
            "StateActionChain: stationary distribution has a zero entry; "
            "chain is not uniformly ergodic");
    return chain;
}

// Chain over state-action pairs:
// P^b((s,a),(s',a')) = P(s'|s,a) * pi_b(a'|s').
inline StateActionChain induce_chain(const TabularMdp& mdp, const Policy& behavior) {
    behavior.validate(mdp.n_states, mdp.n_actions);
    const int S = mdp.n_states, A = mdp.n_actions, n = S * A;
    std::vector<double> kernel(static_cast<std::size_t>(n) * n, 0.0);
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) {
            const int x = pair_index(s, a, A);
            const auto row = mdp.transition_row(s, a);
            for (int s2 = 0; s2 < S; ++s2)
                for (int a2 = 0; a2 < A; ++a2)
                    kernel[static_cast<std::size_t>(x) * n + pair_index(s2, a2, A)] =
                        row[s2] * behavior.prob(s2, a2);
        }
    return make_chain(std::move(kernel), n);
}

// Reversible example chain with closed-form stationary distribution and
// spectrum: kernel = (1 - q(k+1)/2) I + (q/n) [k 1 1^T | 1 1^T], giving
// mu = 2/((k+1)n) * (k,...,k,1,...,1) and lambda_i = 1 - q(k+1)/2 (i >= 2).
inline StateActionChain build_example_chain(int n, double k, double q) {
    if (n < 4 || n % 2 != 0)
        throw std::invalid_argument("build_example_chain: n must be even and >= 4");
    if (!(k >= 1.0))
        throw std::invalid_argument("build_example_chain: k must be >= 1");
    if (!(q > 0.0) || !(q * (k + 1.0) < 2.0))
        throw std::invalid_argument("build_example_chain: need 0 < q and q(k+1) < 2");
    const double lazy = 1.0 - q * (k + 1.0) / 2.0;
    std::vector<double> kernel(static_cast<std::size_t>(n) * n);
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y)
            kernel[static_cast<std::size_t>(x) * n + y] =
                (y < n / 2 ? k * q / n : q / n) + (x == y ? lazy : 0.0);
    StateActionChain chain;
    chain.n = n;
    chain.kernel = std::move(kernel);
    chain.stationary.resize(n);
    for (int x = 0; x < n; ++x)
        chain.stationary[x] = 2.0 * (x < n / 2 ? k : 1.0) / ((k + 1.0) * n);
    chain.mu_min = 2.0 / ((k + 1.0) * n);
    chain.lambda2_analytic = lazy;
    return chain;
}

struct MixingTimeError : std::runtime_error {
    MixingTimeError(const std::string& what, double tv_at_t_max_)
        : std::runtime_error(what), tv_at_t_max(tv_at_t_max_) {}
    double tv_at_t_max;
};

namespace detail {

inline std::vector<double> mat_mul(const std::vector<double>& a,
                                   const std::vector<double>& b, int n) {
    std::vector<double> c(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) {
            const double aik = a[static_cast<std::size_t>(i) * n + k];
            if (aik == 0.0) continue;
            const double* brow = b.data() + static_cast<std::size_t>(k) * n;
            double* crow = c.data() + static_cast<std::size_t>(i) * n;
            for (int j = 0; j < n; ++j) crow[j] += aik * brow[j];
        }
    return c;
}

// max over starts x of d_TV(P^t(.|x), mu), given the matrix power P^t
inline double worst_start_tv(const std::vector<double>& pt,
                             const std::vector<double>& mu, int n) {
    double worst = 0.0;
    for (int x = 0; x < n; ++x) {
        double tv = 0.0;
        for (int y = 0; y < n; ++y)
            tv += std::abs(pt[static_cast<std::size_t>(x) * n + y] - mu[y]);
        worst = std::max(worst, 0.5 * tv);
    }
    return worst;
}

} // namespace detail

// Smallest t with worst-start total-variation distance to mu at most `level`,
// by exact matrix powers. Repeated squaring brackets the answer; the final
// scan advances one step at a time so the returned t is exactly minimal.
inline long long mixing_time(const StateActionChain& chain, double level = 0.25,
                             long long t_max = 1'000'000) {
    if (!(level > 0.0 && level < 1.0))
        throw std::invalid_argument("mixing_time: level must lie in (0,1)");
    const int n = chain.n;
    {
        // t = 0: rows are point masses
        double worst = 0.0;
        for (int x = 0; x < n; ++x)
            worst = std::max(worst, 1.0 - chain.stationary[x]);
        if (worst <= level) return 0;
    }
    std::vector<double> power = chain.kernel; // P^t at t = lo
    long long lo = 1;
    if (detail::worst_start_tv(power, chain.stationary, n) <= level) return 1;
    while (true) {
        if (2 * lo > t_max) {
            // clamp the bracket at t_max
            std::vector<double> rest = power; // P^lo
            long long steps = t_max - lo;
            std::vector<double> base = chain.kernel;
            while (steps > 0) { // binary powering of the remainder
                if (steps & 1) rest = detail::mat_mul(rest, base, n);
                base = detail::mat_mul(base, base, n);
                steps >>= 1;
            }
            const double tv = detail::worst_start_tv(rest, chain.stationary, n);
            if (tv > level)
                throw MixingTimeError(
                    "mixing_time: level " + std::to_string(level) +
                        " not reached by t_max (TV " + std::to_string(tv) + ")",
                    tv);
            break;
        }
        std::vector<double> sq = detail::mat_mul(power, power, n);
        if (detail::worst_start_tv(sq, chain.stationary, n) <= level) break;
        power = std::move(sq);
        lo *= 2;
    }
    // TV is within level somewhere in (lo, min(2*lo, t_max)]; scan upward.
    long long t = lo;
    while (t <= 2 * t_max) {
        power = detail::mat_mul(power, chain.kernel, n);
        ++t;
        if (detail::worst_start_tv(power, chain.stationary, n) <= level) return t;
    }
    throw std::logic_error("mixing_time: scan failed to land inside the bracket");
}

// Exact cover time via dynamic programming over (visited bitmask, position).
// Time 0 counts as a visit of the start, so a singleton chain covers at t=0.
inline long long cover_time_exact(const StateActionChain& chain) {
    const int n = chain.n;
    if (n > 14)
        throw std::invalid_argument(
            "cover_time_exact: n > 14; use cover_time_mc for larger chains");
    if (n == 1) return 0;
    const int full = (1 << n) - 1;
    long long worst = 0;
    for (int x0 = 0; x0 < n; ++x0) {
        std::vector<double> p(static_cast<std::size_t>(full + 1) * n, 0.0);
        p[static_cast<std::size_t>(1 << x0) * n + x0] = 1.0;
        double covered = 0.0;
        long long t = 0;
        double prev_covered = 0.0;
        while (covered < 0.5) {
            std::vector<double> next(p.size(), 0.0);
            for (int m = 1; m <= full; ++m) {
                const double* pm = p.data() + static_cast<std::size_t>(m) * n;
                for (int x = 0; x < n; ++x) {
                    const double px = pm[x];
                    if (px == 0.0) continue;
                    const auto row = chain.row(x);
                    for (int y = 0; y < n; ++y) {
                        const double pr = row[y];
                        if (pr == 0.0) continue;
                        const int nm = m | (1 << y);
                        if (nm == full)
                            covered += px * pr;
                        else
                            next[static_cast<std::size_t>(nm) * n + y] += px * pr;
                    }
                }
            }
            p.swap(next);
            ++t;
            if (covered + 1e-15 < prev_covered)
                throw std::logic_error("cover_time_exact: coverage not monotone");
            prev_covered = covered;
            if (t > 5'000'000)
                throw std::runtime_error(
                    "cover_time_exact: coverage probability never reached 1/2; "
                    "chain looks reducible");
        }
        worst = std::max(worst, t);
    }
    return worst;
}

struct CoverTimeEstimate {
    long long estimate = 0;
    long long half_width = 0;
};

// Monte Carlo cover time: per start, simulate cover times and estimate the
// coverage CDF; the estimate is the first t whose worst-start coverage
// reaches 1/2, and Wald 95% bounds on the per-start CDFs give the half-width.
// Each start owns sub-stream hash64(seed, start).
inline CoverTimeEstimate cover_time_mc(const StateActionChain& chain,
                                       int n_trajectories, std::uint64_t seed) {
    if (n_trajectories < 100)
        throw std::invalid_argument("cover_time_mc: need at least 100 trajectories");
    const int n = chain.n;
    if (n > 64)
        throw std::invalid_argument("cover_time_mc: visited-set mask holds at most 64 pairs");
    constexpr long long kTrajCap = 1'000'000;
    std::vector<std::vector<long long>> times(n); // sorted cover times per start
    long long t_upper = 0;
    for (int x0 = 0; x0 < n; ++x0) {
        Xoshiro256ss rng(hash64(seed, static_cast<std::uint64_t>(x0)));
        auto& ts = times[x0];
        ts.reserve(n_trajectories);
        for (int i = 0; i < n_trajectories; ++i) {
            std::uint64_t visited = 1ULL << x0;
            const std::uint64_t full = (n == 64) ? ~0ULL : ((1ULL << n) - 1);
            int x = x0;
            long long t = 0;
            while (visited != full && t < kTrajCap) {
                x = rng.categorical(chain.row(x));
                visited |= 1ULL << x;
                ++t;
            }
            ts.push_back(t);
        }
        std::sort(ts.begin(), ts.end());
        t_upper = std::max(t_upper, ts.back());
    }

    const double z = 1.959963984540054; // 97.5% normal quantile
    const double nn = n_trajectories;
    auto scan = [&](auto bound) -> long long {
        std::vector<std::size_t> ptr(n, 0);
        for (long long t = 0; t <= t_upper; ++t) {
            double worst = 1.0;
            for (int x0 = 0; x0 < n; ++x0) {
                auto& ts = times[x0];
                while (ptr[x0] < ts.size() && ts[ptr[x0]] <= t) ++ptr[x0];
                worst = std::min(worst, bound(ptr[x0] / nn));
            }
            if (worst >= 0.5) return t;
        }
        return t_upper + 1;
    };

    const long long est = scan([](double p) { return p; });
    const long long t_lo =
        scan([&](double p) { return p + z * std::sqrt(p * (1.0 - p) / nn); });
    const long long t_hi =
        scan([&](double p) { return p - z * std::sqrt(p * (1.0 - p) / nn); });
    return {est, std::max(t_hi - est, est - t_lo)};
}

// Empirical failure frequency of the occupancy event
// { exists x : sum_{i=1..t} 1{X_i = x} <= t mu(x) / 2 },
// with X_1 the start; rep r starts at pair r mod n with sub-stream
// hash64(seed, r).
inline double occupancy_check(const StateActionChain& chain, long long t,
                              int reps, std::uint64_t seed) {
    if (t < 1) throw std::invalid_argument("occupancy_check: t must be >= 1");
    const int n = chain.n;
    int failures = 0;
    std::vector<long long> counts(n);
    for (int r = 0; r < reps; ++r) {
        Xoshiro256ss rng(hash64(seed, static_cast<std::uint64_t>(r)));
        std::fill(counts.begin(), counts.end(), 0);
        int x = r % n;
        counts[x] = 1; // X_1 = start
        for (long long i = 1; i < t; ++i) {
            x = rng.categorical(chain.row(x));
            ++counts[x];
        }
        for (int y = 0; y < n; ++y)
            if (static_cast<double>(counts[y]) <= 0.5 * static_cast<double>(t) * chain.stationary[y]) {
                ++failures;
                break;
            }
    }
    return static_cast<double>(failures) / reps;
}

} // namespace mdplab
