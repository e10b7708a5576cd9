#pragma once

#include <cstdint>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace mdplab {

// %.12g formatting; used everywhere numbers land in CSV so that runs with
// equal seeds produce byte-identical files.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

struct TraceRow {
    long long t = 0;
    double linf_error = 0.0;
    double eta = 0.0;
    std::optional<double> snapshot_error; // adaptive schedules only
};

struct RunMetadata {
    std::uint64_t seed = 0;
    std::string schedule;
    long long T = 0;
    double gamma = 0.0;
    std::string environment;
    std::string rng_algorithm;
    std::string algorithm;
    std::vector<std::pair<std::string, double>> constants;
};

// Time-stamped l_inf-error records of a single learning run.
struct RunTrace {
    std::vector<TraceRow> rows;
    RunMetadata meta;
};

inline void write_trace_csv(const RunTrace& trace, std::ostream& out) {
    out << "t,linf_error,eta,snapshot_error\n";
    for (const auto& row : trace.rows) {
        out << row.t << ',' << format_double(row.linf_error) << ','
            << format_double(row.eta) << ',';
        if (row.snapshot_error) out << format_double(*row.snapshot_error);
        out << '\n';
    }
}

struct EpochRow {
    int epoch = 0;
    double linf_error = 0.0;
    int unvisited_pairs = 0;
    long long samples_consumed = 0;
};

inline void write_epoch_csv(const std::vector<EpochRow>& rows, std::ostream& out) {
    out << "epoch,linf_error,unvisited_pairs,samples_consumed\n";
    for (const auto& row : rows)
        out << row.epoch << ',' << format_double(row.linf_error) << ','
            << row.unvisited_pairs << ',' << row.samples_consumed << '\n';
}

} // namespace mdplab
