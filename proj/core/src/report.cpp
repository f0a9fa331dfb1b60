#include "boga/report.hpp"

#include "boga/log.hpp"
#include "svg_plot.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <thread>

namespace boga {

using json = nlohmann::json;

std::vector<double> running_top_quartile(const std::vector<double>& values, std::size_t window) {
    if (window < 1) throw Error("running_top_quartile: window must be >= 1");
    std::vector<double> out(values.size());
    std::vector<double> scratch;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const std::size_t w = std::min(i + 1, window);
        scratch.assign(values.begin() + static_cast<std::ptrdiff_t>(i + 1 - w),
                       values.begin() + static_cast<std::ptrdiff_t>(i + 1));
        std::sort(scratch.begin(), scratch.end(), std::greater<>());
        const std::size_t q = static_cast<std::size_t>(
            std::ceil(0.25 * static_cast<double>(w)));
        double sum = 0.0;
        for (std::size_t k = 0; k < q; ++k) sum += scratch[k];
        out[i] = sum / static_cast<double>(q);
    }
    return out;
}

namespace {

std::string fmt_num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

struct LoadedEval {
    int generation = 0;
    std::string sequence;
    double score = 0.0;
};

struct LoadedGeneration {
    int generation = 0;
    bool refit = false;
    double validation_r2 = std::numeric_limits<double>::quiet_NaN();
};

struct RunLog {
    std::string label;
    std::string dir;
    std::vector<LoadedEval> evals;
    std::vector<LoadedGeneration> generations;
    std::string config_text;
    std::uint64_t seed = 0;
    int k_propose = 0;
};

RunLog load_run(const std::filesystem::path& dir) {
    RunLog run;
    run.dir = dir.string();

    const auto eval_path = dir / "evaluations.ndjson";
    std::ifstream evals(eval_path);
    if (!evals) throw MalformedLogError("missing log file '" + eval_path.string() + "'");
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(evals, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            const json j = json::parse(line);
            LoadedEval e;
            e.generation = j.at("generation").get<int>();
            e.sequence = j.at("sequence").get<std::string>();
            e.score = j.at("score").get<double>();
            run.evals.push_back(std::move(e));
        } catch (const json::exception& ex) {
            throw MalformedLogError(eval_path.string() + ":" + std::to_string(line_no) + ": " +
                                    ex.what() + " in record: " + line);
        }
    }

    const auto gen_path = dir / "generations.ndjson";
    std::ifstream gens(gen_path);
    if (gens) {
        line_no = 0;
        while (std::getline(gens, line)) {
            ++line_no;
            if (line.empty()) continue;
            try {
                const json j = json::parse(line);
                LoadedGeneration g;
                g.generation = j.at("generation").get<int>();
                g.refit = j.value("surrogate_refit", false);
                if (j.contains("validation_r2") && j.at("validation_r2").is_number())
                    g.validation_r2 = j.at("validation_r2").get<double>();
                run.generations.push_back(g);
            } catch (const json::exception& ex) {
                throw MalformedLogError(gen_path.string() + ":" + std::to_string(line_no) + ": " +
                                        ex.what() + " in record: " + line);
            }
        }
    }

    std::ifstream cfg(dir / "config.json");
    if (cfg) {
        std::string text((std::istreambuf_iterator<char>(cfg)), std::istreambuf_iterator<char>());
        run.config_text = text;
        try {
            const json j = json::parse(text);
            run.seed = j.value("master_seed", 0ULL);
            if (j.contains("schedule") && j.at("schedule").is_array() &&
                !j.at("schedule").empty())
                run.k_propose = j.at("schedule")[0].value("k_propose", 0);
        } catch (const json::exception&) {
            // Provenance only; a stale config.json should not block reports.
        }
    }
    run.label = run.k_propose > 0 ? "k=" + std::to_string(run.k_propose) +
                                        " seed=" + std::to_string(run.seed)
                                  : dir.filename().string();
    return run;
}

std::vector<RunLog> discover_runs(const std::filesystem::path& log_dir) {
    if (std::filesystem::exists(log_dir / "evaluations.ndjson")) {
        auto run = load_run(log_dir);
        if (run.label.empty()) run.label = "run";
        return {std::move(run)};
    }
    std::vector<std::filesystem::path> subdirs;
    if (std::filesystem::is_directory(log_dir)) {
        for (const auto& entry : std::filesystem::directory_iterator(log_dir))
            if (entry.is_directory() &&
                std::filesystem::exists(entry.path() / "evaluations.ndjson"))
                subdirs.push_back(entry.path());
    }
    std::sort(subdirs.begin(), subdirs.end());
    if (subdirs.empty())
        throw MalformedLogError("no evaluations.ndjson under '" + log_dir.string() + "'");
    std::vector<RunLog> runs;
    for (const auto& d : subdirs) runs.push_back(load_run(d));
    return runs;
}

} // namespace

double final_window_mean(const CampaignLog& log, int window_generations) {
    const int threshold = std::max(0, log.total_generations - window_generations);
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& e : log.evaluations) {
        if (e.generation > threshold) {
            sum += e.score;
            ++count;
        }
    }
    return count > 0 ? sum / static_cast<double>(count)
                     : std::numeric_limits<double>::quiet_NaN();
}

void emit_report(const std::filesystem::path& log_dir, const std::filesystem::path& out_dir,
                 const ReportOptions& options) {
    const auto runs = discover_runs(log_dir);
    std::filesystem::create_directories(out_dir);

    std::vector<std::string> comments;
    for (const auto& run : runs) {
        char hash[32];
        std::snprintf(hash, sizeof(hash), "%016llx",
                      static_cast<unsigned long long>(fnv1a(run.config_text)));
        comments.push_back("run=" + run.label + " config_hash=" + hash +
                           " seed=" + std::to_string(run.seed));
    }

    // ---- Trajectory table and plot.
    {
        std::ofstream csv(out_dir / "trajectory.csv", std::ios::trunc);
        csv << "run,generation,best_so_far,generation_mean,running_top_quartile\n";
        svgplot::LinePlot plot;
        plot.title = "Optimization trajectory";
        plot.xlabel = "evaluation";
        plot.ylabel = "running top-quartile score";
        plot.comments = comments;
        for (const auto& run : runs) {
            std::vector<double> scores;
            for (const auto& e : run.evals) scores.push_back(e.score);
            const auto rtq = running_top_quartile(scores, options.window);

            std::map<int, std::pair<double, std::size_t>> per_gen; // sum, count
            std::map<int, std::size_t> last_index;
            for (std::size_t i = 0; i < run.evals.size(); ++i) {
                auto& [sum, count] = per_gen[run.evals[i].generation];
                sum += run.evals[i].score;
                ++count;
                last_index[run.evals[i].generation] = i;
            }
            double best = -std::numeric_limits<double>::infinity();
            std::size_t cursor = 0;
            for (const auto& [gen, stats] : per_gen) {
                for (; cursor <= last_index[gen]; ++cursor)
                    best = std::max(best, scores[cursor]);
                csv << run.label << "," << gen << "," << fmt_num(best) << ","
                    << fmt_num(stats.first / static_cast<double>(stats.second)) << ","
                    << fmt_num(rtq[last_index[gen]]) << "\n";
            }

            svgplot::Series line;
            line.label = run.label;
            for (std::size_t i = 0; i < rtq.size(); ++i) {
                line.x.push_back(static_cast<double>(i + 1));
                line.y.push_back(rtq[i]);
            }
            plot.series.push_back(std::move(line));
            if (runs.size() == 1) {
                svgplot::Series dots;
                dots.label = "evaluations";
                dots.scatter = true;
                for (std::size_t i = 0; i < scores.size(); ++i) {
                    dots.x.push_back(static_cast<double>(i + 1));
                    dots.y.push_back(scores[i]);
                }
                plot.series.push_back(std::move(dots));
            }
        }
        svgplot::write_line_plot(out_dir / "trajectory.svg", plot);
    }

    // ---- Surrogate R^2 series.
    {
        std::ofstream csv(out_dir / "r2_series.csv", std::ios::trunc);
        csv << "run,generation,validation_r2\n";
        svgplot::LinePlot plot;
        plot.title = "Surrogate validation R^2";
        plot.xlabel = "generation";
        plot.ylabel = "R^2";
        plot.comments = comments;
        for (const auto& run : runs) {
            svgplot::Series line;
            line.label = run.label;
            for (const auto& g : run.generations) {
                if (!g.refit || std::isnan(g.validation_r2)) continue;
                csv << run.label << "," << g.generation << "," << fmt_num(g.validation_r2)
                    << "\n";
                line.x.push_back(static_cast<double>(g.generation));
                line.y.push_back(g.validation_r2);
            }
            plot.series.push_back(std::move(line));
        }
        svgplot::write_line_plot(out_dir / "r2_series.svg", plot);
    }

    // ---- Fitness distributions per generation band. Bands are half-open
    // [lo, hi) except the last, which includes its upper edge.
    {
        std::ofstream csv(out_dir / "distributions.csv", std::ios::trunc);
        csv << "run,band,score\n";
        svgplot::HistogramPlot plot;
        plot.title = "Fitness distribution by optimization stage";
        plot.xlabel = "score";
        plot.comments = comments;
        for (const auto& run : runs) {
            for (std::size_t b = 0; b < options.bands.size(); ++b) {
                const auto [lo, hi] = options.bands[b];
                const bool last = b + 1 == options.bands.size();
                const std::string band_name = std::to_string(lo) + "-" + std::to_string(hi);
                svgplot::HistogramGroup group;
                group.label = (runs.size() > 1 ? run.label + " " : "") + band_name;
                for (const auto& e : run.evals) {
                    const bool inside =
                        e.generation >= lo && (last ? e.generation <= hi : e.generation < hi);
                    if (!inside) continue;
                    csv << run.label << "," << band_name << "," << fmt_num(e.score) << "\n";
                    group.values.push_back(e.score);
                }
                plot.groups.push_back(std::move(group));
            }
        }
        svgplot::write_histogram_plot(out_dir / "distributions.svg", plot);
    }
}

std::vector<SweepCellResult> run_sweep(const SweepSpec& spec, int parallel_cells) {
    spec.validate();

    struct Cell {
        int k = 0;
        std::uint64_t seed = 0;
    };
    std::vector<Cell> cells;
    for (int k : spec.k_propose_values)
        for (std::uint64_t s : spec.seeds) cells.push_back({k, s});

    std::vector<SweepCellResult> results(cells.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= cells.size()) return;
            const auto [k, seed] = cells[i];
            SweepCellResult& r = results[i];
            r.k_propose = k;
            r.seed = seed;
            CampaignConfig cfg = spec.base;
            cfg.master_seed = seed;
            for (auto& phase : cfg.schedule) {
                phase.k_propose = k;
                phase.m_select = spec.m_select;
            }
            const auto dir = std::filesystem::path(spec.output_dir) /
                             ("cell_k" + std::to_string(k) + "_seed" + std::to_string(seed));
            cfg.output_dir = dir.string();
            r.log_dir = dir.string();
            try {
                const CampaignLog log = run_campaign(cfg);
                r.ok = true;
                r.final_window_mean = final_window_mean(log);
                r.objective_evals = log.counters.objective_evals;
                double best = -std::numeric_limits<double>::infinity();
                bool minimize = cfg.objective.direction == Direction::minimize;
                if (minimize) best = std::numeric_limits<double>::infinity();
                for (const auto& e : log.evaluations)
                    best = minimize ? std::min(best, e.score) : std::max(best, e.score);
                r.best_score = best;
            } catch (const std::exception& e) {
                r.ok = false;
                r.error = e.what();
                log::error("sweep cell k=" + std::to_string(k) + " seed=" +
                           std::to_string(seed) + " failed: " + e.what());
            }
        }
    };

    std::size_t workers = parallel_cells > 0
                              ? static_cast<std::size_t>(parallel_cells)
                              : std::max<std::size_t>(1, std::thread::hardware_concurrency());
    workers = std::min(workers, cells.size());
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        for (std::size_t w = 0; w < workers; ++w) threads.emplace_back(worker);
        for (auto& t : threads) t.join();
    }

    write_sweep_summary(spec.output_dir, results);
    return results;
}

void write_sweep_summary(const std::filesystem::path& out_dir,
                         const std::vector<SweepCellResult>& cells) {
    std::filesystem::create_directories(out_dir);
    std::ofstream csv(out_dir / "sweep_summary.csv", std::ios::trunc);
    csv << "k_propose,seed,status,final_window_mean,best_score,objective_evals,log_dir\n";
    for (const auto& c : cells) {
        csv << c.k_propose << "," << c.seed << "," << (c.ok ? "ok" : "failed") << ","
            << fmt_num(c.final_window_mean) << "," << fmt_num(c.best_score) << ","
            << c.objective_evals << "," << c.log_dir << "\n";
    }
}

} // namespace boga
