#pragma once

#include "boga/seqcore.hpp"

#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

namespace boga {

using EmbeddingVector = std::vector<double>;

struct FeaturizerConfig {
    bool dipeptide = false; // adds the 400-entry ordered-pair frequency block
};

/// Fixed-length physicochemical descriptor. Block layout, in order:
///   composition[20]            residue frequencies (sums to 1)
///   dipeptide[400]             ordered-pair frequencies (only if configured)
///   length[1]
///   hydrophobicity_stats[3]    mean, best window-5 mean, raw moment
struct RawFeatures {
    std::vector<double> values;
};

std::size_t feature_dim(const FeaturizerConfig& config = {});
std::vector<std::string> feature_names(const FeaturizerConfig& config = {});

RawFeatures featurize(const Sequence& seq, const FeaturizerConfig& config = {});

struct PcaModel {
    std::vector<double> mean;                     // input dimension D
    std::vector<std::vector<double>> components;  // n_components x D, rows orthonormal
    std::vector<double> explained_variance;       // non-increasing

    std::size_t input_dim() const { return mean.size(); }
    std::size_t n_components() const { return components.size(); }
};

/// PCA of the row matrix via SVD of the column-centered data. Requires
/// n >= 2 rows and 1 <= n_components <= min(n-1, D). Components beyond the
/// matrix rank come back as zero rows with zero variance (a warning is
/// logged). Sign convention: each component's largest-magnitude entry is
/// positive.
PcaModel fit_pca(const std::vector<std::vector<double>>& rows, std::size_t n_components);

/// (raw - mean) * components^T. Throws DimensionMismatchError.
EmbeddingVector project(const PcaModel& model, const std::vector<double>& raw);

inline EmbeddingVector project(const PcaModel& model, const RawFeatures& raw) {
    return project(model, raw.values);
}

/// Parse a precomputed embedding table: CSV, header `sequence,<name>,...`,
/// one row per sequence, all rows sharing one dimension. Throws
/// MalformedRowError, DimensionMismatchError, DuplicateSequenceError.
std::unordered_map<std::string, RawFeatures>
load_embedding_table(const std::filesystem::path& path);

} // namespace boga
