#include "boga/engine.hpp"

#include "boga/config.hpp"
#include "boga/log.hpp"
#include "boga/rng.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <thread>
#include <unordered_map>

namespace boga {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

double ms_since(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

json eval_record_to_json(const EvalRecord& r) {
    json j;
    j["generation"] = r.generation;
    j["sequence"] = r.sequence;
    j["score"] = r.score;
    j["acq_value"] = r.acq_value ? json(*r.acq_value) : json(nullptr);
    j["surrogate_mean"] = r.surrogate_mean ? json(*r.surrogate_mean) : json(nullptr);
    j["surrogate_std"] = r.surrogate_std ? json(*r.surrogate_std) : json(nullptr);
    j["timestamp"] = r.timestamp;
    return j;
}

json generation_record_to_json(const GenerationRecord& r) {
    json j;
    j["record"] = "generation";
    j["generation"] = r.generation;
    j["phase"] = r.phase_index;
    j["evaluated"] = r.evaluated.size();
    json fails = json::array();
    for (const auto& f : r.failures) fails.push_back({{"sequence", f.sequence}, {"reason", f.reason}});
    j["failures"] = fails;
    j["dedup_shortfall"] = r.dedup_shortfall;
    j["surrogate_refit"] = r.surrogate_refit;
    j["validation_r2"] = std::isnan(r.validation_r2) ? json(nullptr) : json(r.validation_r2);
    j["best_so_far"] = r.best_so_far;
    j["dataset_size"] = r.dataset_size;
    j["elite_count"] = r.elite_count;
    j["timing_ms"] = r.timing_ms;
    return j;
}

json counters_to_json(const BudgetCounters& c) {
    json j;
    j["objective_evals"] = c.objective_evals;
    j["failed_evals"] = c.failed_evals;
    j["surrogate_fits"] = c.surrogate_fits;
    j["surrogate_predictions"] = c.surrogate_predictions;
    j["embeddings_computed"] = c.embeddings_computed;
    j["wall_clock_ms"] = c.wall_clock_ms;
    return j;
}

} // namespace

void SchedulePhase::validate() const {
    acquisition.validate();
    if (generations < 1) throw ConfigError("schedule phase: generations must be >= 1");
    if (m_select < 1) throw ConfigError("schedule phase: m_select must be >= 1");
    if (k_propose < m_select) throw ConfigError("schedule phase: k_propose must be >= m_select");
    if (elite_k < 1) throw ConfigError("schedule phase: elite_k must be >= 1");
    elite_strategy.validate();
}

void CampaignConfig::validate() const {
    if (objective.name.empty()) throw ConfigError("objective.name must not be empty");
    if (objective.kind == ObjectiveSpec::Kind::external) {
        if (objective.external.command.empty())
            throw ConfigError("external objective requires a non-empty command");
        if (objective.external.timeout_ms < 1)
            throw ConfigError("external objective timeout_ms must be >= 1");
        if (objective.external.n_jobs < 1)
            throw ConfigError("external objective n_jobs must be >= 1");
    }
    if (objective.mock_latency_ms < 0) throw ConfigError("mock latency must be >= 0");

    if (initial_sequences.empty())
        throw ConfigError("initial_sequences must contain at least one seed");
    if (n_init < 2) throw ConfigError("n_init must be >= 2");
    if (static_cast<std::size_t>(n_init) < initial_sequences.size())
        throw ConfigError("n_init must be >= the number of provided initial_sequences");
    mutation.validate();
    for (const auto& s : initial_sequences) {
        Sequence seq = parse_sequence(s);
        if (seq.length() < mutation.min_length || seq.length() > mutation.max_length)
            throw ConfigError("initial sequence '" + s + "' violates the mutation length bounds");
    }

    if (embedding.pca_components < 1) throw ConfigError("embedding.pca_components must be >= 1");
    if (embedding.encoder == EmbeddingConfig::Encoder::table && embedding.table_path.empty())
        throw ConfigError("embedding.table_path required for the table encoder");
    surrogate.validate();

    if (schedule.empty()) throw ConfigError("schedule must contain at least one phase");
    for (const auto& phase : schedule) phase.validate();

    if (eval_jobs < 1) throw ConfigError("eval_jobs must be >= 1");
    if (surrogate_refit_interval < 1) throw ConfigError("surrogate_refit_interval must be >= 1");
}

int CampaignConfig::total_generations() const {
    int total = 0;
    for (const auto& p : schedule) total += p.generations;
    return total;
}

std::uint64_t expected_objective_evals(const CampaignConfig& config) {
    std::uint64_t total = static_cast<std::uint64_t>(config.n_init);
    for (const auto& p : config.schedule)
        total += static_cast<std::uint64_t>(p.generations) * static_cast<std::uint64_t>(p.m_select);
    return total;
}

// ---------------------------------------------------------------------------
// Objective dispatch

struct Campaign::ObjectiveRunner {
    ObjectiveConfig cfg;
    int eval_jobs;
    std::unique_ptr<SubprocessEvaluator> external;

    ObjectiveRunner(const ObjectiveConfig& c, int jobs) : cfg(c), eval_jobs(jobs) {}

    std::vector<EvalOutcome> evaluate(const std::vector<Sequence>& batch) {
        if (batch.empty()) return {};
        if (cfg.kind == ObjectiveSpec::Kind::external) {
            if (!external) {
                external = std::make_unique<SubprocessEvaluator>(
                    cfg.external.command, cfg.external.n_jobs,
                    std::chrono::milliseconds(cfg.external.timeout_ms));
                external->launch();
            }
            return external->evaluate_batch(batch);
        }

        std::vector<EvalOutcome> outcomes(batch.size());
        const auto latency = std::chrono::milliseconds(
            cfg.kind == ObjectiveSpec::Kind::mock ? cfg.mock_latency_ms : 0);
        auto eval_one = [&](std::size_t i) {
            try {
                outcomes[i].score = mock_expensive(batch[i], cfg.landscape, latency);
                outcomes[i].status = EvalOutcome::Status::ok;
            } catch (const std::exception& e) {
                outcomes[i].status = EvalOutcome::Status::protocol_error;
                outcomes[i].message = e.what();
            }
        };
        const std::size_t workers =
            std::min<std::size_t>(static_cast<std::size_t>(eval_jobs), batch.size());
        if (workers <= 1) {
            for (std::size_t i = 0; i < batch.size(); ++i) eval_one(i);
        } else {
            std::atomic<std::size_t> next{0};
            std::vector<std::thread> threads;
            threads.reserve(workers);
            for (std::size_t w = 0; w < workers; ++w) {
                threads.emplace_back([&] {
                    while (true) {
                        const std::size_t i = next.fetch_add(1);
                        if (i >= batch.size()) return;
                        eval_one(i);
                    }
                });
            }
            for (auto& t : threads) t.join();
        }
        return outcomes;
    }
};

// ---------------------------------------------------------------------------
// Incremental on-disk log

struct Campaign::LogWriter {
    std::filesystem::path dir;
    std::ofstream evals;
    std::ofstream gens;

    LogWriter(const std::filesystem::path& d, const CampaignConfig& config,
              const std::string& config_json)
        : dir(d) {
        std::filesystem::create_directories(dir);
        evals.open(dir / "evaluations.ndjson", std::ios::trunc);
        gens.open(dir / "generations.ndjson", std::ios::trunc);
        if (!evals || !gens)
            throw Error("cannot open log files under '" + dir.string() + "'");
        std::ofstream cfg(dir / "config.json", std::ios::trunc);
        cfg << config_json << "\n";
        (void)config;
    }

    void append_eval(const EvalRecord& r) { evals << eval_record_to_json(r).dump() << "\n"; }

    void append_generation(const GenerationRecord& r) {
        gens << generation_record_to_json(r).dump() << "\n";
        evals.flush();
        gens.flush();
    }

    void write_counters(const BudgetCounters& c) {
        std::ofstream out(dir / "counters.json", std::ios::trunc);
        out << counters_to_json(c).dump(2) << "\n";
    }

    void write_checkpoint(const json& j) {
        std::ofstream out(dir / "checkpoint.json", std::ios::trunc);
        out << j.dump() << "\n";
    }
};

// ---------------------------------------------------------------------------
// Campaign

Campaign::Campaign(CampaignConfig config) : config_(std::move(config)) {
    config_.validate();
    featurizer_.dipeptide = config_.embedding.dipeptide;
    objective_ = std::make_unique<ObjectiveRunner>(config_.objective, config_.eval_jobs);
}

Campaign::~Campaign() = default;

const SchedulePhase& Campaign::phase_for(int generation, std::size_t& index_out) const {
    int cursor = 0;
    for (std::size_t i = 0; i < config_.schedule.size(); ++i) {
        cursor += config_.schedule[i].generations;
        if (generation <= cursor) {
            index_out = i;
            return config_.schedule[i];
        }
    }
    throw Error("generation " + std::to_string(generation) + " is past the end of the schedule");
}

std::vector<EvalOutcome> Campaign::evaluate_objective(const std::vector<Sequence>& batch) {
    try {
        return objective_->evaluate(batch);
    } catch (const EvaluatorLostError&) {
        write_checkpoint();
        throw;
    }
}

EmbeddingVector Campaign::embed_sequence(const Sequence& seq) {
    RawFeatures raw;
    if (embedding_table_) {
        auto it = embedding_table_->find(seq.str());
        if (it == embedding_table_->end())
            throw Error("embedding table has no row for sequence '" + seq.str() +
                        "'; mixed embedding sources are not allowed");
        raw = it->second;
    } else {
        raw = featurize(seq, featurizer_);
    }
    ++counters_.embeddings_computed;
    return project(*pca_, raw);
}

double Campaign::incumbent() const { return best_entry().score; }

const ScoredSequence& Campaign::best_entry() const {
    if (dataset_.empty()) throw Error("campaign has no evaluations yet");
    const Direction dir = config_.objective.direction;
    std::size_t best = 0;
    for (std::size_t i = 1; i < dataset_.size(); ++i) {
        const auto& a = dataset_[i];
        const auto& b = dataset_[best];
        const bool better = dir == Direction::maximize ? a.score > b.score : a.score < b.score;
        if (better || (a.score == b.score && a.sequence.str() < b.sequence.str())) best = i;
    }
    return dataset_[best];
}

void Campaign::refit_surrogate(int generation) {
    std::vector<std::pair<EmbeddingVector, double>> data;
    data.reserve(dataset_.size());
    for (std::size_t i = 0; i < dataset_.size(); ++i) {
        const auto& entry = dataset_[i];
        data.emplace_back(embedding_cache_.at(entry.sequence.str()), entry.score);
    }
    auto rng = make_stream(config_.master_seed, static_cast<std::uint64_t>(generation),
                           StreamPurpose::surrogate);
    surrogate_ = fit_surrogate(data, config_.surrogate, rng);
    ++counters_.surrogate_fits;
}

void Campaign::write_checkpoint() {
    if (!log_) return;
    json j;
    j["version"] = 1;
    j["master_seed"] = config_.master_seed;
    j["generations_completed"] = generation_;
    j["eval_counter"] = eval_counter_;
    json ds = json::array();
    for (std::size_t i = 0; i < dataset_.size(); ++i) {
        const auto& e = dataset_[i];
        ds.push_back({{"sequence", e.sequence.str()}, {"score", e.score},
                      {"generation", e.generation}});
    }
    j["dataset"] = ds;
    log_->write_checkpoint(j);
}

void Campaign::initialize() {
    if (initialized_) return;
    if (!config_.output_dir.empty())
        log_ = std::make_unique<LogWriter>(config_.output_dir, config_,
                                           campaign_config_to_json(config_));

    if (config_.embedding.encoder == EmbeddingConfig::Encoder::table)
        embedding_table_ = load_embedding_table(config_.embedding.table_path);

    // Seed list, topped up to n_init by mutating the provided seeds.
    std::vector<Sequence> init;
    std::unordered_set<std::string> have;
    for (const auto& s : config_.initial_sequences) {
        Sequence seq = parse_sequence(s);
        if (have.insert(seq.str()).second) init.push_back(std::move(seq));
    }
    const auto n_init = static_cast<std::size_t>(config_.n_init);
    if (init.size() < n_init) {
        auto rng = make_stream(config_.master_seed, 0, StreamPurpose::init_topup);
        std::uniform_int_distribution<std::size_t> pick(0, config_.initial_sequences.size() - 1);
        const std::size_t cap = 20 * n_init;
        std::size_t attempts = 0;
        std::size_t duplicates = 0;
        std::vector<Sequence> parents;
        for (const auto& s : config_.initial_sequences) parents.push_back(parse_sequence(s));
        while (init.size() + duplicates < n_init) {
            Sequence child = mutate(parents[pick(rng)], config_.mutation, rng);
            ++attempts;
            if (have.count(child.str()) > 0) {
                if (attempts <= cap) continue;
                ++duplicates; // degenerate landscape: count the slot as filled
                continue;
            }
            have.insert(child.str());
            init.push_back(std::move(child));
        }
        if (duplicates > 0)
            log::warn("initialization produced only " + std::to_string(init.size()) +
                      " distinct sequences of the requested " + std::to_string(n_init));
    }

    // Evaluate the starting set.
    const auto t0 = Clock::now();
    const auto outcomes = evaluate_objective(init);
    counters_.wall_clock_ms["objective"] += ms_since(t0);
    for (std::size_t i = 0; i < init.size(); ++i) {
        if (outcomes[i].is_ok()) {
            dataset_.insert(init[i], outcomes[i].score, 0);
            EvalRecord rec;
            rec.generation = 0;
            rec.sequence = init[i].str();
            rec.score = outcomes[i].score;
            rec.timestamp = ++eval_counter_;
            evaluations_.push_back(rec);
            if (log_) log_->append_eval(rec);
            ++counters_.objective_evals;
        } else {
            init_failures_.push_back(
                {0, init[i].str(), std::string(to_string(outcomes[i].status)) +
                                        (outcomes[i].message.empty() ? "" : ": " + outcomes[i].message)});
            ++counters_.failed_evals;
            log::warn("initialization evaluation failed for '" + init[i].str() + "' (" +
                      to_string(outcomes[i].status) + ")");
        }
    }
    if (dataset_.size() < 2) {
        write_checkpoint();
        throw Error("initialization left fewer than 2 evaluated sequences");
    }

    // Fit PCA on the initial features, then freeze it for the campaign.
    const auto t1 = Clock::now();
    std::vector<std::vector<double>> rows;
    rows.reserve(dataset_.size());
    for (std::size_t i = 0; i < dataset_.size(); ++i) {
        const auto& seq = dataset_[i].sequence;
        RawFeatures raw;
        if (embedding_table_) {
            auto it = embedding_table_->find(seq.str());
            if (it == embedding_table_->end())
                throw Error("embedding table has no row for initial sequence '" + seq.str() + "'");
            raw = it->second;
        } else {
            raw = featurize(seq, featurizer_);
        }
        ++counters_.embeddings_computed;
        rows.push_back(raw.values);
    }
    const std::size_t dim = rows[0].size();
    std::size_t n_comp = static_cast<std::size_t>(config_.embedding.pca_components);
    const std::size_t max_comp = std::min(dataset_.size() - 1, dim);
    if (n_comp > max_comp) {
        log::warn("pca_components clamped from " + std::to_string(n_comp) + " to " +
                  std::to_string(max_comp));
        n_comp = max_comp;
    }
    pca_ = fit_pca(rows, n_comp);
    for (std::size_t i = 0; i < dataset_.size(); ++i)
        embedding_cache_[dataset_[i].sequence.str()] = project(*pca_, rows[i]);
    counters_.wall_clock_ms["embed"] += ms_since(t1);

    if (dataset_.size() >= 4) {
        const auto t2 = Clock::now();
        refit_surrogate(0);
        counters_.wall_clock_ms["surrogate_fit"] += ms_since(t2);
    } else {
        log::warn("fewer than 4 initial evaluations; surrogate fit deferred");
    }

    last_generation_entries_.clear();
    for (std::size_t i = 0; i < dataset_.size(); ++i) last_generation_entries_.push_back(i);
    write_checkpoint();
    initialized_ = true;
}

GenerationRecord Campaign::run_generation() {
    if (!initialized_) throw Error("run_generation before initialize");
    const int t = generation_ + 1;
    std::size_t phase_index = 0;
    const SchedulePhase& phase = phase_for(t, phase_index);

    AcquisitionSpec acq = phase.acquisition;
    acq.direction = config_.objective.direction;

    GenerationRecord record;
    record.generation = t;
    record.phase_index = phase_index;

    auto rng_elites =
        make_stream(config_.master_seed, static_cast<std::uint64_t>(t), StreamPurpose::elites);
    auto rng_pool =
        make_stream(config_.master_seed, static_cast<std::uint64_t>(t), StreamPurpose::pool);

    // Elite parents.
    std::vector<Sequence> elites;
    if (config_.elite_source == EliteSource::history || last_generation_entries_.empty()) {
        elites = select_elites(dataset_, phase.elite_strategy,
                               static_cast<std::size_t>(phase.elite_k),
                               config_.objective.direction, rng_elites);
    } else {
        EvaluationDataset recent;
        for (std::size_t i : last_generation_entries_) {
            const auto& e = dataset_[i];
            recent.insert(e.sequence, e.score, e.generation);
        }
        elites = select_elites(recent, phase.elite_strategy,
                               static_cast<std::size_t>(phase.elite_k),
                               config_.objective.direction, rng_elites);
    }
    if (elites.empty()) {
        log::warn("elite selection returned no parents (threshold too strict?); "
                  "falling back to top_k");
        SelectionStrategy fallback;
        elites = select_elites(dataset_, fallback, static_cast<std::size_t>(phase.elite_k),
                               config_.objective.direction, rng_elites);
    }
    record.elite_count = elites.size();

    // Proposal pool.
    const auto seen = dataset_.sequence_strings();
    const ProposalPool pool = propose_pool(elites, config_.mutation,
                                           static_cast<std::size_t>(phase.k_propose), seen,
                                           rng_pool);

    // Embed.
    const auto t_embed = Clock::now();
    std::vector<EmbeddingVector> zs;
    zs.reserve(pool.size());
    for (const auto& seq : pool) zs.push_back(embed_sequence(seq));
    record.timing_ms["embed"] = ms_since(t_embed);

    // Surrogate predictions.
    const auto t_pred = Clock::now();
    std::vector<PosteriorPrediction> preds(pool.size());
    const bool have_model = surrogate_.has_value();
    if (have_model) {
        preds = surrogate_->predict_batch(zs);
        counters_.surrogate_predictions += pool.size();
    }
    record.timing_ms["surrogate_predict"] = ms_since(t_pred);

    // Acquisition values and the evaluation set.
    const double inc = incumbent();
    std::vector<double> values(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i)
        values[i] = have_model ? acquisition_value(acq, preds[i], inc) : 0.0;

    std::vector<std::size_t> chosen;
    if (acq.select_mode == AcquisitionSpec::SelectMode::strict_top ||
        static_cast<std::size_t>(phase.m_select) == pool.size()) {
        chosen = select_for_evaluation(pool, values, static_cast<std::size_t>(phase.m_select));
    } else {
        // Uniform sampling among the top-valued candidates.
        auto rng_acq = make_stream(config_.master_seed, static_cast<std::uint64_t>(t),
                                   StreamPurpose::acquisition);
        const std::size_t cut =
            std::max<std::size_t>(static_cast<std::size_t>(phase.m_select),
                                  std::min<std::size_t>(
                                      static_cast<std::size_t>(acq.uniform_top_pool), pool.size()));
        auto top = select_for_evaluation(pool, values, cut);
        for (std::size_t i = 0; i < static_cast<std::size_t>(phase.m_select); ++i) {
            std::uniform_int_distribution<std::size_t> pick(i, top.size() - 1);
            std::swap(top[i], top[pick(rng_acq)]);
        }
        top.resize(static_cast<std::size_t>(phase.m_select));
        chosen = std::move(top);
    }

    // Drop candidates that are already evaluated (possible only after the
    // proposal retry cap admitted duplicates).
    std::vector<std::size_t> final_idx;
    std::unordered_set<std::string> committed;
    for (std::size_t i : chosen) {
        const std::string& s = pool[i].str();
        if (dataset_.contains(s) || committed.count(s) > 0) {
            ++record.dedup_shortfall;
            continue;
        }
        committed.insert(s);
        final_idx.push_back(i);
    }

    std::vector<Sequence> batch;
    batch.reserve(final_idx.size());
    for (std::size_t i : final_idx) batch.push_back(pool[i]);

    const auto t_obj = Clock::now();
    const auto outcomes = evaluate_objective(batch);
    record.timing_ms["objective"] = ms_since(t_obj);

    last_generation_entries_.clear();
    for (std::size_t j = 0; j < final_idx.size(); ++j) {
        const std::size_t i = final_idx[j];
        if (outcomes[j].is_ok()) {
            dataset_.insert(pool[i], outcomes[j].score, t);
            last_generation_entries_.push_back(dataset_.size() - 1);
            embedding_cache_[pool[i].str()] = zs[i];
            EvalRecord rec;
            rec.generation = t;
            rec.sequence = pool[i].str();
            rec.score = outcomes[j].score;
            rec.acq_value = values[i];
            if (have_model) {
                rec.surrogate_mean = preds[i].mean;
                rec.surrogate_std = preds[i].std;
            }
            rec.timestamp = ++eval_counter_;
            record.evaluated.push_back(rec);
            evaluations_.push_back(rec);
            if (log_) log_->append_eval(rec);
            ++counters_.objective_evals;
        } else {
            record.failures.push_back(
                {t, pool[i].str(), std::string(to_string(outcomes[j].status)) +
                                       (outcomes[j].message.empty() ? "" : ": " + outcomes[j].message)});
            ++counters_.failed_evals;
        }
    }

    // Refit on the grown dataset.
    if (t % config_.surrogate_refit_interval == 0 && dataset_.size() >= 4) {
        const auto t_fit = Clock::now();
        refit_surrogate(t);
        record.timing_ms["surrogate_fit"] = ms_since(t_fit);
        record.surrogate_refit = true;
        record.validation_r2 = surrogate_->validation_r2();
    }

    record.best_so_far = best_entry().score;
    record.dataset_size = dataset_.size();
    for (const auto& [key, value] : record.timing_ms) counters_.wall_clock_ms[key] += value;

    generation_records_.push_back(record);
    if (log_) log_->append_generation(record);
    write_checkpoint();
    generation_ = t;
    return record;
}

CampaignLog Campaign::snapshot_log() const {
    CampaignLog log;
    log.evaluations = evaluations_;
    log.generations = generation_records_;
    log.init_failures = init_failures_;
    log.counters = counters_;
    log.final_dataset = dataset_.entries();
    log.total_generations = generation_;
    return log;
}

CampaignLog Campaign::run() {
    const auto t0 = Clock::now();
    initialize();
    const int total = config_.total_generations();
    for (int t = generation_; t < total; ++t) run_generation();
    counters_.wall_clock_ms["total"] += ms_since(t0);
    if (log_) log_->write_counters(counters_);
    return snapshot_log();
}

std::unique_ptr<Campaign> initialize_campaign(const CampaignConfig& config) {
    auto campaign = std::make_unique<Campaign>(config);
    campaign->initialize();
    return campaign;
}

CampaignLog run_campaign(const CampaignConfig& config) {
    Campaign campaign(config);
    return campaign.run();
}

BudgetCounters budget_report(const CampaignLog& log) { return log.counters; }

} // namespace boga
