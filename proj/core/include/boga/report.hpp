#pragma once

#include "boga/config.hpp"
#include "boga/engine.hpp"

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace boga {

/// Trailing-window running statistic: at index i, the mean of the top 25%
/// (ceiling, at least one element) of the most recent min(i+1, window)
/// values.
std::vector<double> running_top_quartile(const std::vector<double>& values, std::size_t window);

struct ReportOptions {
    std::size_t window = 40; // evaluations, for the running top quartile
    std::vector<std::pair<int, int>> bands = {{0, 10}, {10, 50}, {50, 100}};
};

/// Read a campaign log directory (or a sweep directory of several) and write
/// trajectory, R^2-series and fitness-distribution tables, each with an SVG
/// plot alongside. Throws MalformedLogError on an unparseable record.
void emit_report(const std::filesystem::path& log_dir, const std::filesystem::path& out_dir,
                 const ReportOptions& options = {});

struct SweepCellResult {
    int k_propose = 0;
    std::uint64_t seed = 0;
    bool ok = false;
    double final_window_mean = 0.0;
    double best_score = 0.0;
    std::uint64_t objective_evals = 0;
    std::string log_dir;
    std::string error;
};

/// Mean score of all evaluations in the final `window_generations`
/// generations of the run.
double final_window_mean(const CampaignLog& log, int window_generations = 10);

/// Run the k_propose x seeds cross product with paired seeds. Cell failures
/// are recorded and the sweep continues. `parallel_cells` <= 0 picks the
/// hardware concurrency.
std::vector<SweepCellResult> run_sweep(const SweepSpec& spec, int parallel_cells = 0);

/// sweep_summary.csv: one row per cell, exactly |k_propose| x |seeds|.
void write_sweep_summary(const std::filesystem::path& out_dir,
                         const std::vector<SweepCellResult>& cells);

} // namespace boga
