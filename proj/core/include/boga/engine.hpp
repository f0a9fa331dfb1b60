#pragma once

#include "boga/acquisition.hpp"
#include "boga/embed.hpp"
#include "boga/evaluator.hpp"
#include "boga/objectives.hpp"
#include "boga/seqcore.hpp"
#include "boga/surrogate.hpp"

#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace boga {

struct SchedulePhase {
    AcquisitionSpec acquisition;
    int generations = 1;
    int m_select = 1;
    int k_propose = 1; // must be >= m_select
    int elite_k = 1;
    SelectionStrategy elite_strategy;

    void validate() const; // throws ConfigError
};

/// Where elite mutation parents come from: the full evaluation history, or
/// only the most recent generation's additions.
enum class EliteSource { history, last_generation };

struct EmbeddingConfig {
    enum class Encoder { physchem, table };

    Encoder encoder = Encoder::physchem;
    bool dipeptide = false;
    int pca_components = 16; // clamped to min(n_init - 1, D) with a warning
    std::string table_path;  // encoder == table
};

struct ExternalEvaluatorConfig {
    std::vector<std::string> command;
    int n_jobs = 1;
    int timeout_ms = 10000;
};

struct ObjectiveConfig {
    std::string name = "sheet";
    Direction direction = Direction::maximize;
    ObjectiveSpec::Kind kind = ObjectiveSpec::Kind::builtin;
    BuiltinLandscape landscape = BuiltinLandscape::sheet; // builtin and mock kinds
    int mock_latency_ms = 0;                              // mock kind
    ExternalEvaluatorConfig external;                     // external kind
};

struct CampaignConfig {
    ObjectiveConfig objective;
    std::vector<std::string> initial_sequences;
    int n_init = 2;
    MutationParams mutation;
    EmbeddingConfig embedding;
    SurrogateConfig surrogate;
    std::vector<SchedulePhase> schedule;
    std::uint64_t master_seed = 0;
    std::string output_dir; // empty: keep the log in memory only
    EliteSource elite_source = EliteSource::history;
    int eval_jobs = 1;                // worker threads for builtin/mock objectives
    int surrogate_refit_interval = 1; // refit every N generations

    void validate() const; // throws ConfigError
    int total_generations() const;
};

struct BudgetCounters {
    std::uint64_t objective_evals = 0; // successful objective calls only
    std::uint64_t failed_evals = 0;
    std::uint64_t surrogate_fits = 0;
    std::uint64_t surrogate_predictions = 0;
    std::uint64_t embeddings_computed = 0;
    std::map<std::string, double> wall_clock_ms;
};

/// n_init + sum over phases of generations * m_select: the exact number of
/// objective calls a clean run performs.
std::uint64_t expected_objective_evals(const CampaignConfig& config);

struct EvalRecord {
    int generation = 0; // 0 for initialization
    std::string sequence;
    double score = 0.0;
    std::optional<double> acq_value;
    std::optional<double> surrogate_mean;
    std::optional<double> surrogate_std;
    std::uint64_t timestamp = 0; // logical evaluation index, 1-based
};

struct FailureRecord {
    int generation = 0;
    std::string sequence;
    std::string reason;
};

struct GenerationRecord {
    int generation = 0;
    std::size_t phase_index = 0;
    std::vector<EvalRecord> evaluated;
    std::vector<FailureRecord> failures;
    int dedup_shortfall = 0;
    bool surrogate_refit = false;
    double validation_r2 = std::numeric_limits<double>::quiet_NaN();
    double best_so_far = std::numeric_limits<double>::quiet_NaN();
    std::size_t dataset_size = 0;
    std::size_t elite_count = 0;
    std::map<std::string, double> timing_ms;
};

struct CampaignLog {
    std::vector<EvalRecord> evaluations; // initialization plus every generation, in order
    std::vector<GenerationRecord> generations;
    std::vector<FailureRecord> init_failures;
    BudgetCounters counters;
    std::vector<ScoredSequence> final_dataset;
    int total_generations = 0;
};

class Campaign {
  public:
    explicit Campaign(CampaignConfig config); // validates
    ~Campaign();

    Campaign(const Campaign&) = delete;
    Campaign& operator=(const Campaign&) = delete;

    /// Evaluate the initial population, fit PCA on its features, and fit the
    /// initial surrogate. Evaluator loss aborts with a checkpoint on disk.
    void initialize();

    /// Advance one generation: elites -> proposals -> embed -> predict ->
    /// acquisition -> evaluate -> dataset update -> surrogate refit.
    GenerationRecord run_generation();

    /// initialize() plus the full schedule; returns the complete log.
    CampaignLog run();

    bool initialized() const { return initialized_; }
    int generation() const { return generation_; }
    const CampaignConfig& config() const { return config_; }
    const EvaluationDataset& dataset() const { return dataset_; }
    const BudgetCounters& counters() const { return counters_; }
    const ScoredSequence& best_entry() const;
    CampaignLog snapshot_log() const;

  private:
    struct ObjectiveRunner;
    struct LogWriter;

    const SchedulePhase& phase_for(int generation, std::size_t& index_out) const;
    std::vector<EvalOutcome> evaluate_objective(const std::vector<Sequence>& batch);
    EmbeddingVector embed_sequence(const Sequence& seq);
    void refit_surrogate(int generation);
    void write_checkpoint();
    double incumbent() const;

    CampaignConfig config_;
    EvaluationDataset dataset_;
    std::vector<std::size_t> last_generation_entries_;
    std::optional<PcaModel> pca_;
    std::optional<SurrogateModel> surrogate_;
    BudgetCounters counters_;
    std::vector<EvalRecord> evaluations_;
    std::vector<GenerationRecord> generation_records_;
    std::vector<FailureRecord> init_failures_;
    std::unique_ptr<ObjectiveRunner> objective_;
    std::unique_ptr<LogWriter> log_;
    // Frozen projections of every evaluated sequence; surrogate refits reuse
    // them instead of re-embedding the whole dataset each generation.
    std::unordered_map<std::string, EmbeddingVector> embedding_cache_;
    std::optional<std::unordered_map<std::string, RawFeatures>> embedding_table_;
    FeaturizerConfig featurizer_;
    bool initialized_ = false;
    int generation_ = 0;
    std::uint64_t eval_counter_ = 0;
};

/// Free-function forms of the campaign operations.
std::unique_ptr<Campaign> initialize_campaign(const CampaignConfig& config);
CampaignLog run_campaign(const CampaignConfig& config);
BudgetCounters budget_report(const CampaignLog& log);

} // namespace boga
