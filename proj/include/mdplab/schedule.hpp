#pragma once

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>

namespace mdplab {

// Learning-rate schedules. Constant is the workhorse the theory is stated
// for; linear and polynomial exist for comparison sweeps only; rescaled
// linear is eta_t = scale / (t + offset); adaptive is the data-driven
// piecewise-constant rate built from the running occupancy estimate.
struct ConstantRate {
    double eta = 0.1;
};
struct LinearRate {};
struct PolynomialRate {
    double omega = 0.6;
};
struct RescaledLinearRate {
    double scale = 1.0;
    double offset = 0.0;
};
struct AdaptiveRate {
    double c_eta = 1.0;
};

using LearningRateSchedule =
    std::variant<ConstantRate, LinearRate, PolynomialRate, RescaledLinearRate,
                 AdaptiveRate>;

inline void validate(const LearningRateSchedule& schedule) {
    if (const auto* c = std::get_if<ConstantRate>(&schedule)) {
        if (!(c->eta > 0.0 && c->eta <= 1.0))
            throw std::invalid_argument("ConstantRate: eta must lie in (0,1]");
    } else if (const auto* p = std::get_if<PolynomialRate>(&schedule)) {
        if (!(p->omega > 0.5 && p->omega < 1.0))
            throw std::invalid_argument("PolynomialRate: omega must lie in (0.5,1)");
    } else if (const auto* rl = std::get_if<RescaledLinearRate>(&schedule)) {
        if (!(rl->scale > 0.0) || rl->offset < 0.0)
            throw std::invalid_argument("RescaledLinearRate: need scale > 0, offset >= 0");
    } else if (const auto* ad = std::get_if<AdaptiveRate>(&schedule)) {
        if (!(ad->c_eta > 0.0))
            throw std::invalid_argument("AdaptiveRate: c_eta must be positive");
    }
}

inline bool is_adaptive(const LearningRateSchedule& schedule) {
    return std::holds_alternative<AdaptiveRate>(schedule);
}

inline std::string describe(const LearningRateSchedule& schedule) {
    std::ostringstream os;
    os.precision(12);
    if (const auto* c = std::get_if<ConstantRate>(&schedule))
        os << "constant eta=" << c->eta;
    else if (std::holds_alternative<LinearRate>(schedule))
        os << "linear";
    else if (const auto* p = std::get_if<PolynomialRate>(&schedule))
        os << "polynomial omega=" << p->omega;
    else if (const auto* rl = std::get_if<RescaledLinearRate>(&schedule))
        os << "rescaled scale=" << rl->scale << " offset=" << rl->offset;
    else if (const auto* ad = std::get_if<AdaptiveRate>(&schedule))
        os << "adaptive c_eta=" << ad->c_eta;
    return os.str();
}

// Recursive minimum-occupancy estimate: reset to the uniform guess while some
// pair is unvisited, keep the previous estimate while the empirical minimum
// stays within a factor of 2, and re-anchor otherwise.
inline double adaptive_mu_update(double mu_hat_prev, long long min_count,
                                 long long t, int n_pairs) {
    if (t < 1 || min_count < 0)
        throw std::invalid_argument("adaptive_mu_update: bad arguments");
    if (min_count == 0) return 1.0 / n_pairs;
    if (mu_hat_prev <= 0.0)
        throw std::logic_error("adaptive_mu_update: nonpositive previous estimate");
    const double empirical = static_cast<double>(min_count) / static_cast<double>(t);
    const double ratio = empirical / mu_hat_prev;
    if (ratio > 0.5 && ratio < 2.0) return mu_hat_prev;
    return empirical;
}

// Data-driven rate eta_t = min{1, c_eta * exp(floor(log( log t /
// (mu_hat (1-gamma) gamma^2 t) )))}; piecewise constant in t since it only
// moves when the floored exponent does.
inline double adaptive_eta(long long t, double mu_hat, double gamma, double c_eta) {
    if (t < 2) throw std::invalid_argument("adaptive_eta: t must be >= 2");
    if (!(mu_hat > 0.0)) throw std::invalid_argument("adaptive_eta: mu_hat must be > 0");
    const double inner = std::log(static_cast<double>(t)) /
                         (mu_hat * (1.0 - gamma) * gamma * gamma *
                          static_cast<double>(t));
    return std::min(1.0, c_eta * std::exp(std::floor(std::log(inner))));
}

// Constant rate of the mixing-time sample-complexity recipe:
// c1 / log(n T / delta) * min{ (1-gamma)^4 eps^2 / gamma^2, 1/t_mix },
// clamped to (0,1]. The universal constant is exposed; only its existence is
// pinned by the theory.
inline double mixing_rate_recipe(double eps, double delta, long long T,
                                 long long t_mix, double gamma,
                                 long long n_pairs, double c1 = 0.5) {
    if (!(eps > 0.0 && eps <= 1.0 / (1.0 - gamma)))
        throw std::invalid_argument("mixing_rate_recipe: eps out of range");
    if (!(delta > 0.0 && delta < 1.0))
        throw std::invalid_argument("mixing_rate_recipe: delta out of range");
    const double log_term =
        std::log(static_cast<double>(n_pairs) * static_cast<double>(T) / delta);
    const double eps_branch =
        std::pow(1.0 - gamma, 4) * eps * eps / (gamma * gamma);
    const double mix_branch = 1.0 / static_cast<double>(t_mix);
    return std::min(1.0, c1 / log_term * std::min(eps_branch, mix_branch));
}

// Cover-time variant: the 1/t_mix branch is replaced by 1.
inline double cover_rate_recipe(double eps, double delta, long long T,
                                double gamma, long long n_pairs,
                                double c1 = 0.5) {
    return mixing_rate_recipe(eps, delta, T, 1, gamma, n_pairs, c1);
}

} // namespace mdplab
