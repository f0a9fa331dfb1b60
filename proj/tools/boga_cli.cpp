#include "boga/config.hpp"
#include "boga/engine.hpp"
#include "boga/report.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>

namespace {

constexpr int kExitConfigError = 2;
constexpr int kExitEvaluatorError = 3;

void print_counters(const boga::BudgetCounters& c) {
    std::printf("budget:\n");
    std::printf("  objective_evals       %llu\n",
                static_cast<unsigned long long>(c.objective_evals));
    std::printf("  failed_evals          %llu\n",
                static_cast<unsigned long long>(c.failed_evals));
    std::printf("  surrogate_fits        %llu\n",
                static_cast<unsigned long long>(c.surrogate_fits));
    std::printf("  surrogate_predictions %llu\n",
                static_cast<unsigned long long>(c.surrogate_predictions));
    std::printf("  embeddings_computed   %llu\n",
                static_cast<unsigned long long>(c.embeddings_computed));
    for (const auto& [component, ms] : c.wall_clock_ms)
        std::printf("  wall_clock[%s] %.1f ms\n", component.c_str(), ms);
}

int cmd_run(const std::string& config_path, std::optional<std::uint64_t> seed,
            std::optional<std::string> out_dir) {
    boga::CampaignConfig config;
    try {
        config = boga::parse_campaign_config_file(config_path);
        if (seed) config.master_seed = *seed;
        if (out_dir) config.output_dir = *out_dir;
        config.validate();
    } catch (const boga::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfigError;
    }

    try {
        const boga::CampaignLog log = boga::run_campaign(config);
        double best = 0.0;
        std::string best_seq;
        bool first = true;
        const bool minimize = config.objective.direction == boga::Direction::minimize;
        for (const auto& e : log.evaluations) {
            if (first || (minimize ? e.score < best : e.score > best)) {
                best = e.score;
                best_seq = e.sequence;
                first = false;
            }
        }
        std::printf("best sequence: %s\n", best_seq.c_str());
        std::printf("best score:    %.10g\n", best);
        std::printf("evaluations:   %zu over %d generations\n", log.evaluations.size(),
                    log.total_generations);
        if (!config.output_dir.empty())
            std::printf("log directory: %s\n", config.output_dir.c_str());
        print_counters(boga::budget_report(log));
        return 0;
    } catch (const boga::EvaluatorError& e) {
        std::fprintf(stderr, "evaluator error: %s\n", e.what());
        return kExitEvaluatorError;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}

int cmd_sweep(const std::string& config_path, int jobs) {
    boga::SweepSpec spec;
    try {
        spec = boga::parse_sweep_config_file(config_path);
    } catch (const boga::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfigError;
    }

    const auto results = boga::run_sweep(spec, jobs);
    std::size_t failed = 0;
    std::printf("%-10s %-8s %-8s %-18s %-12s\n", "k_propose", "seed", "status",
                "final_window_mean", "best");
    for (const auto& r : results) {
        std::printf("%-10d %-8llu %-8s %-18.6g %-12.6g\n", r.k_propose,
                    static_cast<unsigned long long>(r.seed), r.ok ? "ok" : "failed",
                    r.final_window_mean, r.best_score);
        if (!r.ok) ++failed;
    }
    std::printf("summary table: %s/sweep_summary.csv\n", spec.output_dir.c_str());
    if (failed == results.size()) return kExitEvaluatorError;
    return 0;
}

int cmd_report(const std::string& log_dir, const std::string& out_dir) {
    try {
        boga::emit_report(log_dir, out_dir);
        std::printf("report written to %s\n", out_dir.c_str());
        return 0;
    } catch (const boga::MalformedLogError& e) {
        std::fprintf(stderr, "malformed log: %s\n", e.what());
        return kExitConfigError;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"boga: surrogate-assisted genetic sequence optimization"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    auto* run = app.add_subcommand("run", "Run one optimization campaign");
    run->add_option("--config", config_path, "Campaign config file (JSON)")->required();
    run->add_option("--seed", seed, "Override master_seed");
    run->add_option("--out", out_dir, "Override output_dir");

    std::string sweep_config;
    int sweep_jobs = 0;
    auto* sweep = app.add_subcommand("sweep", "Run a k_propose x seeds sweep");
    sweep->add_option("--config", sweep_config, "Sweep config file (JSON)")->required();
    sweep->add_option("--jobs", sweep_jobs, "Parallel cells (default: hardware)");

    std::string report_log, report_out;
    auto* report = app.add_subcommand("report", "Emit tables and plots from a log directory");
    report->add_option("--log", report_log, "Campaign or sweep log directory")->required();
    report->add_option("--out", report_out, "Output directory")->required();

    CLI11_PARSE(app, argc, argv);

    if (run->parsed()) return cmd_run(config_path, seed, out_dir);
    if (sweep->parsed()) return cmd_sweep(sweep_config, sweep_jobs);
    if (report->parsed()) return cmd_report(report_log, report_out);
    return 1;
}
