#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "mdplab/chain.hpp"
#include "mdplab/trace.hpp"

namespace mdplab {

// Analysis-frame quantities of the blockwise error-decay prediction, used as
// run diagnostics.
struct DiagnosticsConfig {
    double delta = 0.0;
    double eps = 0.0;
    double eta = 0.0;
    double gamma = 0.0;
    long long T = 0;
    long long t_mix = 0;
    double mu_min = 0.0;
    double t_frame = 0.0;   // (443 t_mix / mu_min) log(4 n T / delta)
    double t_th = 0.0;      // max{ 2 log(1/((1-gamma)^2 eps)) / (eta mu_min), t_frame }
    double mu_frame = 0.0;  // mu_min t_frame / 2
    double rho = 0.0;       // (1-gamma)(1 - (1-eta)^mu_frame)
    long long t_cover = -1; // exact DP value; -1 when n > 14
    double t_cover_all = 0.0; // t_cover log(T/delta); NaN when t_cover unknown
};

// Per-frame geometric decay factor (1-gamma)(1 - (1-eta)^mu_frame).
inline double blockwise_decay_rate(double eta, double gamma, double mu_frame) {
    return (1.0 - gamma) * (1.0 - std::pow(1.0 - eta, mu_frame));
}

inline DiagnosticsConfig compute_diagnostics(const StateActionChain& chain,
                                             double eta, double gamma,
                                             long long T, double delta,
                                             double eps) {
    if (!(eta > 0.0 && eta < 1.0))
        throw std::invalid_argument("compute_diagnostics: eta must lie in (0,1)");
    if (!(delta > 0.0 && delta < 1.0) || !(eps > 0.0) || T < 1)
        throw std::invalid_argument("compute_diagnostics: bad arguments");
    DiagnosticsConfig d;
    d.delta = delta;
    d.eps = eps;
    d.eta = eta;
    d.gamma = gamma;
    d.T = T;
    d.mu_min = chain.mu_min;
    d.t_mix = mixing_time(chain);
    d.t_frame = 443.0 * static_cast<double>(d.t_mix) / chain.mu_min *
                std::log(4.0 * chain.n * static_cast<double>(T) / delta);
    d.t_th = std::max(2.0 * std::log(1.0 / ((1.0 - gamma) * (1.0 - gamma) * eps)) /
                          (eta * chain.mu_min),
                      d.t_frame);
    d.mu_frame = 0.5 * chain.mu_min * d.t_frame;
    d.rho = blockwise_decay_rate(eta, gamma, d.mu_frame);
    if (chain.n <= 14) {
        d.t_cover = cover_time_exact(chain);
        d.t_cover_all = static_cast<double>(d.t_cover) *
                        std::log(static_cast<double>(T) / delta);
    } else {
        d.t_cover_all = std::nan("");
    }
    return d;
}

struct DecayFit {
    double decay_factor = 1.0;
    double floor = 0.0;
    int frames = 0;
    int qualifying_ratios = 0;
};

// Frame-based fit of the blockwise decay prediction. The trace past t_th is
// cut into frames of length t_frame; the per-frame error is the in-frame max,
// the floor is the mean error over the final 10% of the trace, and the decay
// factor is the geometric-mean ratio of successive frame errors while the
// leading frame sits above 3x the floor. A trace flat at its floor has no
// such ratio; then the factor falls back to the geometric mean over all
// successive frames (exactly 1 for a constant trace).
inline DecayFit fit_blockwise_decay(const RunTrace& trace,
                                    const DiagnosticsConfig& diag) {
    const auto& rows = trace.rows;
    if (rows.empty()) throw std::invalid_argument("fit_blockwise_decay: empty trace");
    const long long t_last = rows.back().t;
    const double span = static_cast<double>(t_last) - diag.t_th;
    const int complete_frames =
        span > 0 ? static_cast<int>(std::floor(span / diag.t_frame)) : 0;
    if (complete_frames < 5)
        throw std::invalid_argument(
            "fit_blockwise_decay: trace holds fewer than 5 complete frames past t_th");

    DecayFit fit;
    const std::size_t tail = (rows.size() + 9) / 10;
    double acc = 0.0;
    for (std::size_t i = rows.size() - tail; i < rows.size(); ++i)
        acc += rows[i].linf_error;
    fit.floor = acc / static_cast<double>(tail);

    std::vector<double> frame_error(complete_frames, 0.0);
    for (const auto& row : rows) {
        const double offset = static_cast<double>(row.t) - diag.t_th;
        if (offset <= 0) continue;
        const int k = static_cast<int>(std::floor(offset / diag.t_frame));
        if (k < complete_frames)
            frame_error[k] = std::max(frame_error[k], row.linf_error);
    }
    fit.frames = complete_frames;

    double log_sum = 0.0;
    int used = 0;
    for (int k = 0; k + 1 < complete_frames; ++k) {
        if (frame_error[k] > 3.0 * fit.floor && frame_error[k] > 0.0 &&
            frame_error[k + 1] > 0.0) {
            log_sum += std::log(frame_error[k + 1] / frame_error[k]);
            ++used;
        }
    }
    if (used == 0) {
        for (int k = 0; k + 1 < complete_frames; ++k) {
            if (frame_error[k] > 0.0 && frame_error[k + 1] > 0.0) {
                log_sum += std::log(frame_error[k + 1] / frame_error[k]);
                ++used;
            }
        }
    } else {
        fit.qualifying_ratios = used;
    }
    fit.decay_factor = used > 0 ? std::exp(log_sum / used) : 1.0;
    return fit;
}

} // namespace mdplab
