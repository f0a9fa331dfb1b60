#pragma once

#include "boga/errors.hpp"

#include <cstddef>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace boga {

/// The 20 canonical amino acids, in fixed alphabetical one-letter order.
/// The order is load-bearing: feature layouts and substitution draws index
/// into it.
class Alphabet {
  public:
    static constexpr std::string_view residues() { return "ACDEFGHIKLMNPQRSTVWY"; }
    static constexpr std::size_t size() { return 20; }

    static constexpr bool contains(char c) { return index_of(c) >= 0; }

    /// Index of a residue, or -1 if it is not in the alphabet.
    static constexpr int index_of(char c) {
        constexpr std::string_view r = residues();
        for (std::size_t i = 0; i < r.size(); ++i)
            if (r[i] == c) return static_cast<int>(i);
        return -1;
    }

    static constexpr char at(std::size_t i) { return residues()[i]; }
};

/// A validated peptide sequence. Instances always satisfy: length >= 1 and
/// every residue is a member of Alphabet.
class Sequence {
  public:
    /// Validate and normalize `text` (lowercase input is uppercased).
    /// Throws EmptySequenceError or InvalidResidueError.
    static Sequence parse(std::string_view text);

    /// Wrap a string already known to be valid (used by mutation operators).
    static Sequence unchecked(std::string residues);

    const std::string& str() const { return residues_; }
    std::size_t length() const { return residues_.size(); }
    char operator[](std::size_t i) const { return residues_[i]; }

    friend bool operator==(const Sequence& a, const Sequence& b) {
        return a.residues_ == b.residues_;
    }
    friend auto operator<=>(const Sequence& a, const Sequence& b) {
        return a.residues_ <=> b.residues_;
    }

  private:
    explicit Sequence(std::string residues) : residues_(std::move(residues)) {}
    std::string residues_;
};

inline Sequence parse_sequence(std::string_view text) { return Sequence::parse(text); }

struct ScoredSequence {
    Sequence sequence;
    double score = 0.0;
    int generation = 0;
};

/// Append-only store of evaluated sequences. Insertion order equals
/// evaluation order; duplicate sequence strings are rejected.
class EvaluationDataset {
  public:
    /// Returns false (store unchanged) if the sequence is already present.
    /// Throws Error if the score is NaN or infinite.
    bool insert(Sequence sequence, double score, int generation);

    bool contains(const std::string& sequence) const { return index_.count(sequence) > 0; }
    std::optional<double> score_of(const std::string& sequence) const;

    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }
    const ScoredSequence& operator[](std::size_t i) const { return entries_[i]; }
    const std::vector<ScoredSequence>& entries() const { return entries_; }

    std::unordered_set<std::string> sequence_strings() const;

  private:
    std::vector<ScoredSequence> entries_;
    std::unordered_map<std::string, std::size_t> index_;
};

struct MutationParams {
    double substitution_rate = 0.05; // per residue
    double insertion_rate = 0.05;    // per sequence
    double deletion_rate = 0.05;     // per sequence
    std::size_t min_length = 1;
    std::size_t max_length = 1000;

    /// Throws ConfigError if rates are outside [0,1] or the length bounds are
    /// inverted or zero.
    void validate() const;
};

enum class Direction { maximize, minimize };

inline const char* to_string(Direction d) {
    return d == Direction::maximize ? "maximize" : "minimize";
}

struct SelectionStrategy {
    enum class Kind { top_k, top_fraction_uniform, exponential_rank, threshold };

    Kind kind = Kind::top_k;
    double fraction = 0.5;    // top_fraction_uniform: share of the dataset forming the pool
    double temperature = 1.0; // exponential_rank
    double threshold = 0.0;   // threshold: entries strictly better than this qualify

    /// Throws InvalidStrategyParamsError for out-of-range parameters.
    void validate() const;
};

const char* to_string(SelectionStrategy::Kind kind);

using ProposalPool = std::vector<Sequence>;

/// Apply one round of stochastic mutation: per-residue substitution, then at
/// most one insertion, then at most one deletion. Draws in that fixed order,
/// so a given rng state yields one reproducible child. Length bounds are
/// respected by skipping the indel rather than clamping.
Sequence mutate(const Sequence& parent, const MutationParams& params, std::mt19937_64& rng);

/// Fill a pool of `k_propose` candidates by mutating uniformly drawn elite
/// parents. Candidates already in `seen` or in the pool are rejected until
/// the retry budget (20 * k_propose total attempts) is exhausted, after which
/// duplicates are admitted so degenerate landscapes cannot stall the run.
ProposalPool propose_pool(const std::vector<Sequence>& elites, const MutationParams& params,
                          std::size_t k_propose, const std::unordered_set<std::string>& seen,
                          std::mt19937_64& rng);

/// Indices of dataset entries ordered best-first under `direction`; ties are
/// broken by lexicographically smaller sequence, then earlier generation.
std::vector<std::size_t> ranked_indices(const EvaluationDataset& dataset, Direction direction);

/// Choose elite mutation parents. top_k is deterministic (rng unused); the
/// sampling strategies draw with replacement from the qualifying pool.
std::vector<Sequence> select_elites(const EvaluationDataset& dataset,
                                    const SelectionStrategy& strategy, std::size_t k,
                                    Direction direction, std::mt19937_64& rng);

} // namespace boga
