#pragma once

#include "boga/seqcore.hpp"
#include "boga/surrogate.hpp"

#include <vector>

namespace boga {

enum class AcquisitionKind { expected_improvement, ucb, greedy_mean };

AcquisitionKind acquisition_kind_from_name(const std::string& name);
const char* to_string(AcquisitionKind kind);

struct AcquisitionSpec {
    AcquisitionKind kind = AcquisitionKind::expected_improvement;
    double ucb_beta = 1.0;
    Direction direction = Direction::maximize;

    /// strict_top takes the m_select largest acquisition values;
    /// uniform_top samples m_select uniformly among the top `uniform_top_pool`.
    enum class SelectMode { strict_top, uniform_top };
    SelectMode select_mode = SelectMode::strict_top;
    int uniform_top_pool = 50;

    void validate() const; // throws ConfigError
};

/// Standard normal CDF.
double normal_cdf(double z);
/// Standard normal PDF.
double normal_pdf(double z);

/// Closed-form expected improvement over the incumbent. With
/// d = mean - incumbent (maximize; mirrored for minimize):
/// EI = d * Phi(d / s) + s * phi(d / s) for s > 0, else max(d, 0).
double expected_improvement(const PosteriorPrediction& pred, double incumbent,
                            Direction direction);

/// mean + beta * std for maximize; -(mean - beta * std) for minimize, so
/// larger is always better.
double upper_confidence_bound(const PosteriorPrediction& pred, double beta, Direction direction);

/// Acquisition value under `spec` (larger is better in both directions).
double acquisition_value(const AcquisitionSpec& spec, const PosteriorPrediction& pred,
                         double incumbent);

/// Indices of the m_select largest acquisition values. Ties break toward the
/// lexicographically smaller sequence, then the smaller pool index. When
/// m_select equals the pool size all indices are returned in pool order.
/// Throws SizeMismatchError when |values| != |pool|.
std::vector<std::size_t> select_for_evaluation(const ProposalPool& pool,
                                               const std::vector<double>& values,
                                               std::size_t m_select);

} // namespace boga
