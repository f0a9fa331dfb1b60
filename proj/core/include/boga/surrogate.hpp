#pragma once

#include "boga/embed.hpp"

#include <cstdint>
#include <memory>
#include <random>
#include <utility>
#include <vector>

namespace boga {

enum class SurrogateKind { deep_ensemble, evidential };

const char* to_string(SurrogateKind kind);

struct SurrogateConfig {
    SurrogateKind kind = SurrogateKind::deep_ensemble;
    std::vector<int> hidden_sizes = {64, 64};
    int ensemble_size = 5; // deep_ensemble only
    int epochs = 200;
    double learning_rate = 1e-3;
    double validation_fraction = 0.2;
    int batch_size = 128;
    double evidential_lambda = 0.01; // evidence-regularizer weight
    std::uint64_t seed = 0;

    void validate() const; // throws ConfigError
};

struct PosteriorPrediction {
    double mean = 0.0;
    double std = 0.0;
};

/// Mean and population standard deviation (n denominator) across members.
PosteriorPrediction ensemble_prediction(const std::vector<double>& member_means);

/// Predictive mean/std of a Normal-Inverse-Gamma head:
/// mean = gamma, var = beta * (1 + nu) / (nu * (alpha - 1)), alpha clamped
/// above 1 + 1e-6.
PosteriorPrediction nig_prediction(double gamma, double nu, double alpha, double beta);

/// Immutable trained regressor; cheap to copy and safe to share across
/// threads.
class SurrogateModel {
  public:
    PosteriorPrediction predict(const EmbeddingVector& z) const; // throws DimensionMismatchError
    std::vector<PosteriorPrediction> predict_batch(const std::vector<EmbeddingVector>& zs) const;

    SurrogateKind kind() const;
    std::size_t input_dim() const;
    std::size_t train_size() const;
    /// R^2 on the internal holdout split; NaN when the split was degenerate.
    double validation_r2() const;
    bool degenerate_targets() const;
    /// Mean training loss per epoch (standardized targets).
    const std::vector<double>& training_loss_curve() const;

    std::size_t ensemble_size() const;
    /// Same model with members re-ordered (diagnostic; predictions must not
    /// change).
    SurrogateModel with_permuted_members(const std::vector<std::size_t>& order) const;

    struct Impl;
    explicit SurrogateModel(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

  private:
    std::shared_ptr<const Impl> impl_;
};

/// Train a surrogate on (embedding, score) pairs. Requires >= 4 points of a
/// single dimension. Scores are standardized internally; a validation split
/// is held out for the R^2 diagnostic. All randomness (split, member
/// bootstraps, weight init, batch order) derives from `rng` mixed with
/// `config.seed`.
SurrogateModel fit_surrogate(const std::vector<std::pair<EmbeddingVector, double>>& data,
                             const SurrogateConfig& config, std::mt19937_64& rng);

/// 1 - SS_res / SS_tot over the holdout, using predictive means. Throws
/// ConstantTargetsError when targets do not vary, Error when |holdout| < 2.
double validation_r2(const SurrogateModel& model,
                     const std::vector<std::pair<EmbeddingVector, double>>& holdout);

} // namespace boga
