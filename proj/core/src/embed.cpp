#include "boga/embed.hpp"

#include "boga/log.hpp"
#include "boga/objectives.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace boga {

namespace {

constexpr std::size_t kCompositionDim = 20;
constexpr std::size_t kDipeptideDim = 400;
constexpr std::size_t kLengthDim = 1;
constexpr std::size_t kHydroStatsDim = 3;

} // namespace

std::size_t feature_dim(const FeaturizerConfig& config) {
    return kCompositionDim + (config.dipeptide ? kDipeptideDim : 0) + kLengthDim + kHydroStatsDim;
}

std::vector<std::string> feature_names(const FeaturizerConfig& config) {
    std::vector<std::string> names;
    names.reserve(feature_dim(config));
    for (std::size_t i = 0; i < kCompositionDim; ++i)
        names.push_back(std::string("comp_") + Alphabet::at(i));
    if (config.dipeptide) {
        for (std::size_t i = 0; i < kCompositionDim; ++i)
            for (std::size_t j = 0; j < kCompositionDim; ++j)
                names.push_back(std::string("di_") + Alphabet::at(i) + Alphabet::at(j));
    }
    names.push_back("length");
    names.push_back("hydro_mean");
    names.push_back("hydro_window5_max");
    names.push_back("hydro_moment");
    return names;
}

RawFeatures featurize(const Sequence& seq, const FeaturizerConfig& config) {
    const std::size_t len = seq.length();
    RawFeatures out;
    out.values.assign(feature_dim(config), 0.0);
    std::size_t offset = 0;

    // Composition.
    for (std::size_t i = 0; i < len; ++i)
        out.values[offset + static_cast<std::size_t>(Alphabet::index_of(seq[i]))] +=
            1.0 / static_cast<double>(len);
    offset += kCompositionDim;

    // Ordered dipeptide frequencies.
    if (config.dipeptide) {
        if (len >= 2) {
            const double w = 1.0 / static_cast<double>(len - 1);
            for (std::size_t i = 0; i + 1 < len; ++i) {
                const auto a = static_cast<std::size_t>(Alphabet::index_of(seq[i]));
                const auto b = static_cast<std::size_t>(Alphabet::index_of(seq[i + 1]));
                out.values[offset + a * kCompositionDim + b] += w;
            }
        }
        offset += kDipeptideDim;
    }

    out.values[offset++] = static_cast<double>(len);

    // Hydrophobicity: mean, best mean over windows of length min(5, L), raw moment.
    const auto& scale = HydrophobicityScale::eisenberg();
    double sum = 0.0;
    for (std::size_t i = 0; i < len; ++i) sum += scale.of(seq[i]);
    out.values[offset++] = sum / static_cast<double>(len);

    const std::size_t w = std::min<std::size_t>(5, len);
    double window_sum = 0.0;
    for (std::size_t i = 0; i < w; ++i) window_sum += scale.of(seq[i]);
    double best_window = window_sum;
    for (std::size_t i = w; i < len; ++i) {
        window_sum += scale.of(seq[i]) - scale.of(seq[i - w]);
        best_window = std::max(best_window, window_sum);
    }
    out.values[offset++] = best_window / static_cast<double>(w);

    out.values[offset++] = hydrophobic_moment_raw(seq);
    return out;
}

PcaModel fit_pca(const std::vector<std::vector<double>>& rows, std::size_t n_components) {
    const std::size_t n = rows.size();
    if (n < 2) throw Error("fit_pca: need at least 2 rows");
    const std::size_t dim = rows[0].size();
    for (const auto& r : rows)
        if (r.size() != dim) throw DimensionMismatchError("fit_pca: ragged input rows");
    if (n_components < 1 || n_components > std::min(n - 1, dim))
        throw Error("fit_pca: n_components must lie in [1, min(n-1, D)]");

    Eigen::MatrixXd data(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < dim; ++j)
            data(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];

    const Eigen::RowVectorXd mean = data.colwise().mean();
    const Eigen::MatrixXd centered = data.rowwise() - mean;

    Eigen::BDCSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
    const Eigen::VectorXd& sigma = svd.singularValues();
    const Eigen::MatrixXd& v = svd.matrixV();

    // Rank via a relative singular-value cutoff.
    const double tol =
        sigma.size() > 0 ? sigma(0) * static_cast<double>(std::max(n, dim)) * 1e-14 : 0.0;
    std::size_t rank = 0;
    for (Eigen::Index i = 0; i < sigma.size(); ++i)
        if (sigma(i) > tol) ++rank;

    if (n_components > rank) {
        log::warn("fit_pca: requested " + std::to_string(n_components) +
                  " components but matrix rank is " + std::to_string(rank) +
                  "; excess components are zero with zero variance");
    }

    PcaModel model;
    model.mean.assign(mean.data(), mean.data() + mean.size());
    model.components.assign(n_components, std::vector<double>(dim, 0.0));
    model.explained_variance.assign(n_components, 0.0);

    const std::size_t keep = std::min<std::size_t>(n_components, rank);
    for (std::size_t c = 0; c < keep; ++c) {
        Eigen::VectorXd comp = v.col(static_cast<Eigen::Index>(c));
        // Sign convention: largest-magnitude entry positive.
        Eigen::Index imax = 0;
        comp.cwiseAbs().maxCoeff(&imax);
        if (comp(imax) < 0.0) comp = -comp;
        for (std::size_t j = 0; j < dim; ++j)
            model.components[c][j] = comp(static_cast<Eigen::Index>(j));
        const double s = sigma(static_cast<Eigen::Index>(c));
        model.explained_variance[c] = s * s / static_cast<double>(n - 1);
    }
    return model;
}

EmbeddingVector project(const PcaModel& model, const std::vector<double>& raw) {
    if (raw.size() != model.input_dim())
        throw DimensionMismatchError("project: vector dimension " + std::to_string(raw.size()) +
                                     " != model dimension " + std::to_string(model.input_dim()));
    EmbeddingVector out(model.n_components(), 0.0);
    for (std::size_t c = 0; c < model.n_components(); ++c) {
        double acc = 0.0;
        const auto& comp = model.components[c];
        for (std::size_t j = 0; j < raw.size(); ++j) acc += (raw[j] - model.mean[j]) * comp[j];
        out[c] = acc;
    }
    return out;
}

std::unordered_map<std::string, RawFeatures>
load_embedding_table(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open embedding table '" + path.string() + "'");

    std::string line;
    std::size_t line_no = 0;

    auto split = [](const std::string& s) {
        std::vector<std::string> fields;
        std::stringstream ss(s);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (!s.empty() && s.back() == ',') fields.push_back("");
        return fields;
    };

    if (!std::getline(in, line)) throw MalformedRowError(1, "missing header");
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split(line);
    if (header.empty() || header[0] != "sequence")
        throw MalformedRowError(line_no, "header must start with 'sequence'");
    const std::size_t dim = header.size() - 1;
    if (dim == 0) throw MalformedRowError(line_no, "header names no feature columns");

    std::unordered_map<std::string, RawFeatures> table;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split(line);
        if (fields.size() != dim + 1)
            throw MalformedRowError(line_no, "expected " + std::to_string(dim + 1) +
                                                 " fields, got " + std::to_string(fields.size()));
        RawFeatures feat;
        feat.values.reserve(dim);
        for (std::size_t i = 1; i < fields.size(); ++i) {
            try {
                std::size_t consumed = 0;
                const double v = std::stod(fields[i], &consumed);
                if (consumed != fields[i].size())
                    throw MalformedRowError(line_no, "trailing characters in numeric field");
                if (!std::isfinite(v))
                    throw MalformedRowError(line_no, "non-finite feature value");
                feat.values.push_back(v);
            } catch (const MalformedRowError&) {
                throw;
            } catch (const std::exception&) {
                throw MalformedRowError(line_no, "cannot parse '" + fields[i] + "' as a number");
            }
        }
        auto [it, fresh] = table.emplace(fields[0], std::move(feat));
        (void)it;
        if (!fresh) throw DuplicateSequenceError(line_no, fields[0]);
    }
    return table;
}

} // namespace boga
