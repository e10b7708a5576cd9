#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "mdplab/config.hpp"
#include "mdplab/diagnostics.hpp"
#include "mdplab/qlearning.hpp"
#include "mdplab/vrq.hpp"

namespace mdplab {

struct SweepRow {
    double eta = 0.0; // the swept parameter (0 when the schedule is not constant)
    std::uint64_t seed = 0;
    double final_error = 0.0;
    std::optional<double> floor;
    std::optional<double> decay_factor;
    long long samples = 0;
    std::string status = "ok";
};

inline void write_summary_csv(const std::vector<SweepRow>& rows, std::ostream& out) {
    out << "eta,seed,final_error,floor,decay_factor,samples,status\n";
    for (const auto& row : rows) {
        out << format_double(row.eta) << ',' << row.seed << ','
            << format_double(row.final_error) << ',';
        if (row.floor) out << format_double(*row.floor);
        out << ',';
        if (row.decay_factor) out << format_double(*row.decay_factor);
        out << ',' << row.samples << ',' << row.status << '\n';
    }
}

// Runs the cross-product of the eta grid (constant schedules) and the seed
// list; per-run traces land in out_dir, one summary row per run. A failing
// run is recorded in its row and does not abort the sweep.
inline std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg,
                                       const std::string& out_dir) {
    if (cfg.algorithm != "qlearn" && cfg.algorithm != "td")
        throw std::invalid_argument(
            "run_sweep: only qlearn and td sweeps are supported, got '" +
            cfg.algorithm + "'");
    std::filesystem::create_directories(out_dir);
    const TabularMdp mdp = build_environment(cfg);
    const Policy behavior = Policy::uniform(mdp.n_states, mdp.n_actions);

    std::vector<LearningRateSchedule> grid;
    if (cfg.eta_grid.empty())
        grid.push_back(cfg.schedule);
    else
        for (double eta : cfg.eta_grid) grid.push_back(ConstantRate{eta});

    std::optional<StateActionChain> chain;
    std::vector<SweepRow> rows;
    for (const auto& schedule : grid) {
        for (std::uint64_t seed : cfg.seeds) {
            SweepRow row;
            if (const auto* c = std::get_if<ConstantRate>(&schedule)) row.eta = c->eta;
            row.seed = seed;
            try {
                RunTrace trace;
                if (cfg.algorithm == "td") {
                    auto res = run_td(mdp, schedule, cfg.horizon, seed,
                                      cfg.record_every);
                    trace = std::move(res.trace);
                    row.final_error = trace.rows.back().linf_error;
                    row.samples = cfg.horizon;
                } else {
                    auto res = run_qlearning(mdp, behavior, schedule, cfg.horizon,
                                             seed, cfg.record_every);
                    trace = std::move(res.trace);
                    row.final_error = trace.rows.back().linf_error;
                    row.samples = cfg.horizon;
                }
                trace.meta.environment = environment_id(cfg);

                const std::size_t tail = (trace.rows.size() + 9) / 10;
                double acc = 0.0;
                for (std::size_t i = trace.rows.size() - tail; i < trace.rows.size(); ++i)
                    acc += trace.rows[i].linf_error;
                row.floor = acc / static_cast<double>(tail);

                // blockwise decay diagnostics apply to constant rates only
                if (const auto* c = std::get_if<ConstantRate>(&schedule)) {
                    if (!chain) chain = induce_chain(mdp, behavior);
                    try {
                        const auto diag =
                            compute_diagnostics(*chain, c->eta, mdp.discount,
                                                cfg.horizon, cfg.diag_delta,
                                                cfg.diag_eps);
                        row.decay_factor =
                            fit_blockwise_decay(trace, diag).decay_factor;
                    } catch (const std::invalid_argument&) {
                        // too few frames; leave the column empty
                    }
                }

                std::ostringstream name;
                name << cfg.algorithm << "_eta" << format_double(row.eta)
                     << "_seed" << seed << ".csv";
                std::ofstream out(std::filesystem::path(out_dir) / name.str());
                write_trace_csv(trace, out);
            } catch (const std::exception& e) {
                row.status = std::string("failed: ") + e.what();
            }
            rows.push_back(std::move(row));
        }
    }
    std::ofstream summary(std::filesystem::path(out_dir) / "summary.csv");
    write_summary_csv(rows, summary);
    return rows;
}

} // namespace mdplab
