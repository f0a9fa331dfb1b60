#include "boga/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace boga {

AcquisitionKind acquisition_kind_from_name(const std::string& name) {
    if (name == "expected_improvement") return AcquisitionKind::expected_improvement;
    if (name == "ucb") return AcquisitionKind::ucb;
    if (name == "greedy_mean") return AcquisitionKind::greedy_mean;
    throw ConfigError("unknown acquisition '" + name +
                      "' (expected expected_improvement|ucb|greedy_mean)");
}

const char* to_string(AcquisitionKind kind) {
    switch (kind) {
    case AcquisitionKind::expected_improvement: return "expected_improvement";
    case AcquisitionKind::ucb: return "ucb";
    case AcquisitionKind::greedy_mean: return "greedy_mean";
    }
    return "?";
}

void AcquisitionSpec::validate() const {
    if (kind == AcquisitionKind::ucb && !(ucb_beta >= 0.0))
        throw ConfigError("ucb requires beta >= 0");
    if (select_mode == SelectMode::uniform_top && uniform_top_pool < 1)
        throw ConfigError("uniform_top selection requires a pool of >= 1");
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z * std::numbers::sqrt2 / 2.0); }

double normal_pdf(double z) {
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

double expected_improvement(const PosteriorPrediction& pred, double incumbent,
                            Direction direction) {
    const double d = direction == Direction::maximize ? pred.mean - incumbent
                                                      : incumbent - pred.mean;
    if (pred.std <= 0.0) return std::max(d, 0.0);
    const double z = d / pred.std;
    return d * normal_cdf(z) + pred.std * normal_pdf(z);
}

double upper_confidence_bound(const PosteriorPrediction& pred, double beta, Direction direction) {
    return direction == Direction::maximize ? pred.mean + beta * pred.std
                                            : -(pred.mean - beta * pred.std);
}

double acquisition_value(const AcquisitionSpec& spec, const PosteriorPrediction& pred,
                         double incumbent) {
    switch (spec.kind) {
    case AcquisitionKind::expected_improvement:
        return expected_improvement(pred, incumbent, spec.direction);
    case AcquisitionKind::ucb:
        return upper_confidence_bound(pred, spec.ucb_beta, spec.direction);
    case AcquisitionKind::greedy_mean:
        return spec.direction == Direction::maximize ? pred.mean : -pred.mean;
    }
    throw Error("unknown acquisition kind");
}

std::vector<std::size_t> select_for_evaluation(const ProposalPool& pool,
                                               const std::vector<double>& values,
                                               std::size_t m_select) {
    if (values.size() != pool.size())
        throw SizeMismatchError("select_for_evaluation: " + std::to_string(values.size()) +
                                " values for " + std::to_string(pool.size()) + " candidates");
    if (m_select < 1 || m_select > pool.size())
        throw Error("select_for_evaluation: m_select must lie in [1, pool size]");

    std::vector<std::size_t> idx(pool.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    if (m_select == pool.size()) return idx; // acquisition ordering irrelevant

    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        if (values[a] != values[b]) return values[a] > values[b];
        if (pool[a].str() != pool[b].str()) return pool[a].str() < pool[b].str();
        return a < b;
    });
    idx.resize(m_select);
    return idx;
}

} // namespace boga
