#include "boga/seqcore.hpp"

#include <algorithm>
#include <cassert>
#include <cctype>
#include <cmath>

namespace boga {

Sequence Sequence::parse(std::string_view text) {
    if (text.empty()) throw EmptySequenceError();
    std::string upper(text);
    for (char& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    for (std::size_t i = 0; i < upper.size(); ++i) {
        if (!Alphabet::contains(upper[i])) throw InvalidResidueError(i, upper[i]);
    }
    return Sequence(std::move(upper));
}

Sequence Sequence::unchecked(std::string residues) {
    assert(!residues.empty());
#ifndef NDEBUG
    for (char c : residues) assert(Alphabet::contains(c));
#endif
    return Sequence(std::move(residues));
}

bool EvaluationDataset::insert(Sequence sequence, double score, int generation) {
    if (!std::isfinite(score))
        throw Error("non-finite score rejected for sequence '" + sequence.str() + "'");
    auto [it, fresh] = index_.try_emplace(sequence.str(), entries_.size());
    if (!fresh) return false;
    entries_.push_back(ScoredSequence{std::move(sequence), score, generation});
    return true;
}

std::optional<double> EvaluationDataset::score_of(const std::string& sequence) const {
    auto it = index_.find(sequence);
    if (it == index_.end()) return std::nullopt;
    return entries_[it->second].score;
}

std::unordered_set<std::string> EvaluationDataset::sequence_strings() const {
    std::unordered_set<std::string> out;
    out.reserve(entries_.size());
    for (const auto& e : entries_) out.insert(e.sequence.str());
    return out;
}

void MutationParams::validate() const {
    auto rate_ok = [](double r) { return std::isfinite(r) && r >= 0.0 && r <= 1.0; };
    if (!rate_ok(substitution_rate) || !rate_ok(insertion_rate) || !rate_ok(deletion_rate))
        throw ConfigError("mutation rates must lie in [0,1]");
    if (min_length < 1 || min_length > max_length)
        throw ConfigError("mutation length bounds require 1 <= min_length <= max_length");
}

void SelectionStrategy::validate() const {
    switch (kind) {
    case Kind::top_k:
        break;
    case Kind::top_fraction_uniform:
        if (!(fraction > 0.0 && fraction <= 1.0))
            throw InvalidStrategyParamsError("top_fraction_uniform requires fraction in (0,1]");
        break;
    case Kind::exponential_rank:
        if (!(temperature > 0.0) || !std::isfinite(temperature))
            throw InvalidStrategyParamsError("exponential_rank requires temperature > 0");
        break;
    case Kind::threshold:
        if (!std::isfinite(threshold))
            throw InvalidStrategyParamsError("threshold must be finite");
        break;
    }
}

const char* to_string(SelectionStrategy::Kind kind) {
    switch (kind) {
    case SelectionStrategy::Kind::top_k: return "top_k";
    case SelectionStrategy::Kind::top_fraction_uniform: return "top_fraction_uniform";
    case SelectionStrategy::Kind::exponential_rank: return "exponential_rank";
    case SelectionStrategy::Kind::threshold: return "threshold";
    }
    return "?";
}

Sequence mutate(const Sequence& parent, const MutationParams& params, std::mt19937_64& rng) {
    if (parent.length() < params.min_length || parent.length() > params.max_length)
        throw Error("mutate: parent length " + std::to_string(parent.length()) +
                    " outside [" + std::to_string(params.min_length) + ", " +
                    std::to_string(params.max_length) + "]");

    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::string child = parent.str();

    // Per-residue substitution; replacement drawn uniformly from the 19
    // other residues.
    for (char& c : child) {
        if (unit(rng) < params.substitution_rate) {
            std::uniform_int_distribution<int> other(0, static_cast<int>(Alphabet::size()) - 2);
            int j = other(rng);
            if (j >= Alphabet::index_of(c)) ++j;
            c = Alphabet::at(static_cast<std::size_t>(j));
        }
    }

    // At most one insertion per sequence, skipped at max_length.
    if (unit(rng) < params.insertion_rate && child.size() < params.max_length) {
        std::uniform_int_distribution<std::size_t> pos(0, child.size());
        std::uniform_int_distribution<std::size_t> res(0, Alphabet::size() - 1);
        std::size_t p = pos(rng);
        child.insert(child.begin() + static_cast<std::ptrdiff_t>(p), Alphabet::at(res(rng)));
    }

    // At most one deletion per sequence, skipped at min_length.
    if (unit(rng) < params.deletion_rate && child.size() > params.min_length) {
        std::uniform_int_distribution<std::size_t> pos(0, child.size() - 1);
        child.erase(child.begin() + static_cast<std::ptrdiff_t>(pos(rng)));
    }

    return Sequence::unchecked(std::move(child));
}

ProposalPool propose_pool(const std::vector<Sequence>& elites, const MutationParams& params,
                          std::size_t k_propose, const std::unordered_set<std::string>& seen,
                          std::mt19937_64& rng) {
    if (elites.empty()) throw Error("propose_pool: elites must be non-empty");
    if (k_propose < 1) throw Error("propose_pool: k_propose must be >= 1");

    const std::size_t attempt_cap = 20 * k_propose;
    std::size_t attempts = 0;

    ProposalPool pool;
    pool.reserve(k_propose);
    std::unordered_set<std::string> in_pool;
    in_pool.reserve(k_propose);

    std::uniform_int_distribution<std::size_t> pick(0, elites.size() - 1);
    while (pool.size() < k_propose) {
        const Sequence& parent = elites[pick(rng)];
        Sequence child = mutate(parent, params, rng);
        ++attempts;
        if (attempts <= attempt_cap &&
            (seen.count(child.str()) > 0 || in_pool.count(child.str()) > 0)) {
            continue;
        }
        in_pool.insert(child.str());
        pool.push_back(std::move(child));
    }
    return pool;
}

namespace {

// better(a, b): does entry a rank strictly ahead of entry b?
bool ranks_before(const ScoredSequence& a, const ScoredSequence& b, Direction direction) {
    if (a.score != b.score)
        return direction == Direction::maximize ? a.score > b.score : a.score < b.score;
    if (a.sequence.str() != b.sequence.str()) return a.sequence.str() < b.sequence.str();
    return a.generation < b.generation;
}

} // namespace

std::vector<std::size_t> ranked_indices(const EvaluationDataset& dataset, Direction direction) {
    std::vector<std::size_t> order(dataset.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
        return ranks_before(dataset[i], dataset[j], direction);
    });
    return order;
}

std::vector<Sequence> select_elites(const EvaluationDataset& dataset,
                                    const SelectionStrategy& strategy, std::size_t k,
                                    Direction direction, std::mt19937_64& rng) {
    if (dataset.empty()) throw Error("select_elites: dataset must be non-empty");
    if (k < 1) throw Error("select_elites: k must be >= 1");
    strategy.validate();

    const std::vector<std::size_t> order = ranked_indices(dataset, direction);

    auto take_ranked = [&](std::size_t n) {
        std::vector<Sequence> out;
        out.reserve(n);
        for (std::size_t r = 0; r < n; ++r) out.push_back(dataset[order[r]].sequence);
        return out;
    };

    switch (strategy.kind) {
    case SelectionStrategy::Kind::top_k:
        return take_ranked(std::min(k, dataset.size()));

    case SelectionStrategy::Kind::top_fraction_uniform: {
        const std::size_t pool = std::min<std::size_t>(
            dataset.size(),
            static_cast<std::size_t>(
                std::ceil(strategy.fraction * static_cast<double>(dataset.size()))));
        std::uniform_int_distribution<std::size_t> pick(0, std::max<std::size_t>(pool, 1) - 1);
        std::vector<Sequence> out;
        out.reserve(k);
        for (std::size_t i = 0; i < k; ++i) out.push_back(dataset[order[pick(rng)]].sequence);
        return out;
    }

    case SelectionStrategy::Kind::exponential_rank: {
        std::vector<double> weights(dataset.size());
        for (std::size_t r = 0; r < weights.size(); ++r)
            weights[r] = std::exp(-static_cast<double>(r) / strategy.temperature);
        std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
        std::vector<Sequence> out;
        out.reserve(k);
        for (std::size_t i = 0; i < k; ++i) out.push_back(dataset[order[pick(rng)]].sequence);
        return out;
    }

    case SelectionStrategy::Kind::threshold: {
        std::vector<Sequence> out;
        for (std::size_t r = 0; r < order.size() && out.size() < k; ++r) {
            const double s = dataset[order[r]].score;
            const bool beats = direction == Direction::maximize ? s > strategy.threshold
                                                                : s < strategy.threshold;
            if (!beats) break; // ranked order: once one fails, the rest fail
            out.push_back(dataset[order[r]].sequence);
        }
        return out;
    }
    }
    throw Error("select_elites: unknown strategy kind");
}

} // namespace boga
