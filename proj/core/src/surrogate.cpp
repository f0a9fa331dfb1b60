#include "boga/surrogate.hpp"

#include "boga/errors.hpp"
#include "boga/rng.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace boga {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

double softplus(double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); }
double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Digamma via upward recurrence into the asymptotic series.
double digamma(double x) {
    double result = 0.0;
    while (x < 6.0) {
        result -= 1.0 / x;
        x += 1.0;
    }
    const double inv = 1.0 / x;
    const double inv2 = inv * inv;
    result += std::log(x) - 0.5 * inv -
              inv2 * (1.0 / 12.0 - inv2 * (1.0 / 120.0 - inv2 / 252.0));
    return result;
}

// Plain feed-forward net, tanh hidden layers, linear output.
struct Mlp {
    std::vector<MatrixXd> w; // layer l: (out x in)
    std::vector<VectorXd> b;

    static Mlp init(std::size_t input_dim, const std::vector<int>& hidden, std::size_t out_dim,
                    std::mt19937_64& rng) {
        Mlp net;
        std::vector<std::size_t> dims;
        dims.push_back(input_dim);
        for (int h : hidden) dims.push_back(static_cast<std::size_t>(h));
        dims.push_back(out_dim);
        for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
            const auto in = static_cast<Eigen::Index>(dims[l]);
            const auto out = static_cast<Eigen::Index>(dims[l + 1]);
            const double scale = std::sqrt(1.0 / static_cast<double>(dims[l]));
            std::normal_distribution<double> gauss(0.0, scale);
            MatrixXd wl(out, in);
            for (Eigen::Index i = 0; i < out; ++i)
                for (Eigen::Index j = 0; j < in; ++j) wl(i, j) = gauss(rng);
            net.w.push_back(std::move(wl));
            net.b.push_back(VectorXd::Zero(out));
        }
        return net;
    }

    std::size_t layers() const { return w.size(); }

    // Returns activations per layer; back() is the linear output (B x out).
    std::vector<MatrixXd> forward(const MatrixXd& x) const {
        std::vector<MatrixXd> acts;
        acts.reserve(layers() + 1);
        acts.push_back(x);
        for (std::size_t l = 0; l < layers(); ++l) {
            MatrixXd z = acts.back() * w[l].transpose();
            z.rowwise() += b[l].transpose();
            if (l + 1 < layers()) z = z.array().tanh();
            acts.push_back(std::move(z));
        }
        return acts;
    }

    MatrixXd output(const MatrixXd& x) const { return forward(x).back(); }
};

struct AdamState {
    std::vector<MatrixXd> mw, vw;
    std::vector<VectorXd> mb, vb;
    long step = 0;

    explicit AdamState(const Mlp& net) {
        for (std::size_t l = 0; l < net.layers(); ++l) {
            mw.push_back(MatrixXd::Zero(net.w[l].rows(), net.w[l].cols()));
            vw.push_back(MatrixXd::Zero(net.w[l].rows(), net.w[l].cols()));
            mb.push_back(VectorXd::Zero(net.b[l].size()));
            vb.push_back(VectorXd::Zero(net.b[l].size()));
        }
    }

    void apply(Mlp& net, const std::vector<MatrixXd>& gw, const std::vector<VectorXd>& gb,
               double lr) {
        constexpr double beta1 = 0.9;
        constexpr double beta2 = 0.999;
        constexpr double eps = 1e-8;
        ++step;
        const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step));
        const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
        for (std::size_t l = 0; l < net.layers(); ++l) {
            mw[l] = beta1 * mw[l] + (1.0 - beta1) * gw[l];
            vw[l] = beta2 * vw[l] + (1.0 - beta2) * gw[l].cwiseProduct(gw[l]);
            net.w[l].array() -=
                lr * (mw[l].array() / c1) / ((vw[l].array() / c2).sqrt() + eps);
            mb[l] = beta1 * mb[l] + (1.0 - beta1) * gb[l];
            vb[l] = beta2 * vb[l] + (1.0 - beta2) * gb[l].cwiseProduct(gb[l]);
            net.b[l].array() -=
                lr * (mb[l].array() / c1) / ((vb[l].array() / c2).sqrt() + eps);
        }
    }
};

// Backprop from d(loss)/d(output) through the net; returns parameter grads.
void backward(const Mlp& net, const std::vector<MatrixXd>& acts, const MatrixXd& dout,
              std::vector<MatrixXd>& gw, std::vector<VectorXd>& gb) {
    gw.assign(net.layers(), MatrixXd());
    gb.assign(net.layers(), VectorXd());
    MatrixXd delta = dout;
    for (std::size_t l = net.layers(); l-- > 0;) {
        gw[l] = delta.transpose() * acts[l];
        gb[l] = delta.colwise().sum().transpose();
        if (l > 0) {
            delta = delta * net.w[l];
            // tanh'(z) = 1 - tanh(z)^2; acts[l] already holds tanh(z).
            delta.array() *= 1.0 - acts[l].array().square();
        }
    }
}

struct NigParams {
    double gamma, nu, alpha, beta;
};

NigParams nig_transform(double r0, double r1, double r2, double r3) {
    return NigParams{r0, softplus(r1) + 1e-6, softplus(r2) + 1.0 + 1e-6, softplus(r3) + 1e-6};
}

struct Standardizer {
    VectorXd mean;
    VectorXd scale; // zero-variance columns get scale 1

    static Standardizer fit(const MatrixXd& x) {
        Standardizer s;
        s.mean = x.colwise().mean();
        VectorXd var = (x.rowwise() - s.mean.transpose()).array().square().colwise().mean();
        s.scale = var.array().sqrt();
        for (Eigen::Index i = 0; i < s.scale.size(); ++i)
            if (s.scale(i) < 1e-12) s.scale(i) = 1.0;
        return s;
    }

    MatrixXd apply(const MatrixXd& x) const {
        return (x.rowwise() - mean.transpose()).array().rowwise() /
               scale.transpose().array();
    }
};

} // namespace

struct SurrogateModel::Impl {
    SurrogateKind kind = SurrogateKind::deep_ensemble;
    std::size_t input_dim = 0;
    std::size_t train_size = 0;
    double validation_r2 = std::numeric_limits<double>::quiet_NaN();
    bool degenerate = false;
    std::vector<double> loss_curve;

    Standardizer input_std;
    double target_mean = 0.0;
    double target_scale = 1.0;

    std::vector<Mlp> members; // ensemble members, or a single evidential net

    MatrixXd standardize_inputs(const std::vector<EmbeddingVector>& zs) const {
        MatrixXd x(static_cast<Eigen::Index>(zs.size()), static_cast<Eigen::Index>(input_dim));
        for (std::size_t i = 0; i < zs.size(); ++i) {
            if (zs[i].size() != input_dim)
                throw DimensionMismatchError(
                    "predict: vector dimension " + std::to_string(zs[i].size()) +
                    " != model input dimension " + std::to_string(input_dim));
            for (std::size_t j = 0; j < input_dim; ++j)
                x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = zs[i][j];
        }
        return input_std.apply(x);
    }

    std::vector<PosteriorPrediction> predict_rows(const std::vector<EmbeddingVector>& zs) const {
        std::vector<PosteriorPrediction> out(zs.size());
        if (degenerate) {
            for (auto& p : out) p = PosteriorPrediction{target_mean, 0.0};
            return out;
        }
        const MatrixXd x = standardize_inputs(zs);
        if (kind == SurrogateKind::deep_ensemble) {
            MatrixXd means(x.rows(), static_cast<Eigen::Index>(members.size()));
            for (std::size_t m = 0; m < members.size(); ++m)
                means.col(static_cast<Eigen::Index>(m)) = members[m].output(x);
            for (Eigen::Index i = 0; i < x.rows(); ++i) {
                const double mu = means.row(i).mean();
                const double var = (means.row(i).array() - mu).square().mean();
                out[static_cast<std::size_t>(i)] =
                    PosteriorPrediction{mu * target_scale + target_mean,
                                        std::sqrt(var) * target_scale};
            }
        } else {
            const MatrixXd raw = members[0].output(x);
            for (Eigen::Index i = 0; i < x.rows(); ++i) {
                const NigParams p = nig_transform(raw(i, 0), raw(i, 1), raw(i, 2), raw(i, 3));
                PosteriorPrediction pred = nig_prediction(p.gamma, p.nu, p.alpha, p.beta);
                out[static_cast<std::size_t>(i)] =
                    PosteriorPrediction{pred.mean * target_scale + target_mean,
                                        pred.std * target_scale};
            }
        }
        return out;
    }
};

const char* to_string(SurrogateKind kind) {
    return kind == SurrogateKind::deep_ensemble ? "deep_ensemble" : "evidential";
}

void SurrogateConfig::validate() const {
    if (!(validation_fraction > 0.0 && validation_fraction < 1.0))
        throw ConfigError("surrogate validation_fraction must lie in (0,1)");
    if (kind == SurrogateKind::deep_ensemble && ensemble_size < 2)
        throw ConfigError("deep_ensemble requires ensemble_size >= 2");
    if (epochs < 1) throw ConfigError("surrogate epochs must be >= 1");
    if (!(learning_rate > 0.0)) throw ConfigError("surrogate learning_rate must be > 0");
    if (batch_size < 1) throw ConfigError("surrogate batch_size must be >= 1");
    for (int h : hidden_sizes)
        if (h < 1) throw ConfigError("surrogate hidden layer sizes must be >= 1");
    if (evidential_lambda < 0.0) throw ConfigError("evidential_lambda must be >= 0");
}

PosteriorPrediction ensemble_prediction(const std::vector<double>& member_means) {
    const double n = static_cast<double>(member_means.size());
    const double mu = std::accumulate(member_means.begin(), member_means.end(), 0.0) / n;
    double var = 0.0;
    for (double m : member_means) var += (m - mu) * (m - mu);
    return PosteriorPrediction{mu, std::sqrt(var / n)};
}

PosteriorPrediction nig_prediction(double gamma, double nu, double alpha, double beta) {
    const double a = std::max(alpha, 1.0 + 1e-6);
    const double var = beta * (1.0 + nu) / (nu * (a - 1.0));
    return PosteriorPrediction{gamma, std::sqrt(var)};
}

SurrogateKind SurrogateModel::kind() const { return impl_->kind; }
std::size_t SurrogateModel::input_dim() const { return impl_->input_dim; }
std::size_t SurrogateModel::train_size() const { return impl_->train_size; }
double SurrogateModel::validation_r2() const { return impl_->validation_r2; }
bool SurrogateModel::degenerate_targets() const { return impl_->degenerate; }
const std::vector<double>& SurrogateModel::training_loss_curve() const {
    return impl_->loss_curve;
}
std::size_t SurrogateModel::ensemble_size() const { return impl_->members.size(); }

PosteriorPrediction SurrogateModel::predict(const EmbeddingVector& z) const {
    return impl_->predict_rows({z})[0];
}

std::vector<PosteriorPrediction>
SurrogateModel::predict_batch(const std::vector<EmbeddingVector>& zs) const {
    if (zs.empty()) return {};
    return impl_->predict_rows(zs);
}

SurrogateModel SurrogateModel::with_permuted_members(const std::vector<std::size_t>& order) const {
    if (order.size() != impl_->members.size())
        throw Error("with_permuted_members: order size mismatch");
    auto copy = std::make_shared<Impl>(*impl_);
    copy->members.clear();
    for (std::size_t idx : order) copy->members.push_back(impl_->members.at(idx));
    return SurrogateModel(std::move(copy));
}

namespace {

// One Adam epoch over shuffled minibatches; returns the epoch's mean loss.
template <typename LossGrad>
double train_epoch(Mlp& net, AdamState& adam, const MatrixXd& x, const VectorXd& y,
                   std::vector<std::size_t>& order, int batch_size, double lr,
                   std::mt19937_64& rng, LossGrad&& loss_grad) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    std::size_t seen = 0;
    std::vector<MatrixXd> gw;
    std::vector<VectorXd> gb;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(batch_size)) {
        const std::size_t count = std::min<std::size_t>(batch_size, order.size() - start);
        MatrixXd xb(static_cast<Eigen::Index>(count), x.cols());
        VectorXd yb(static_cast<Eigen::Index>(count));
        for (std::size_t i = 0; i < count; ++i) {
            xb.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(order[start + i]));
            yb(static_cast<Eigen::Index>(i)) = y(static_cast<Eigen::Index>(order[start + i]));
        }
        auto acts = net.forward(xb);
        MatrixXd dout;
        const double loss = loss_grad(acts.back(), yb, dout);
        backward(net, acts, dout, gw, gb);
        adam.apply(net, gw, gb, lr);
        loss_sum += loss * static_cast<double>(count);
        seen += count;
    }
    return loss_sum / static_cast<double>(seen);
}

double squared_loss_grad(const MatrixXd& out, const VectorXd& y, MatrixXd& dout) {
    const auto n = static_cast<double>(out.rows());
    VectorXd r = out.col(0) - y;
    dout = (2.0 / n) * r;
    return r.squaredNorm() / n;
}

struct EvidentialLoss {
    double lambda;

    double operator()(const MatrixXd& out, const VectorXd& y, MatrixXd& dout) const {
        const Eigen::Index n = out.rows();
        dout = MatrixXd::Zero(n, 4);
        double total = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const NigParams p = nig_transform(out(i, 0), out(i, 1), out(i, 2), out(i, 3));
            const double e = y(i) - p.gamma;
            const double omega = 2.0 * p.beta * (1.0 + p.nu);
            const double s = e * e * p.nu + omega;

            const double nll = 0.5 * std::log(std::numbers::pi / p.nu) -
                               p.alpha * std::log(omega) +
                               (p.alpha + 0.5) * std::log(s) + std::lgamma(p.alpha) -
                               std::lgamma(p.alpha + 0.5);
            const double reg = lambda * std::abs(e) * (2.0 * p.nu + p.alpha);
            total += nll + reg;

            const double sign_e = e >= 0.0 ? 1.0 : -1.0;
            double dgamma = -2.0 * e * p.nu * (p.alpha + 0.5) / s - lambda * sign_e * (2.0 * p.nu + p.alpha);
            double dnu = -0.5 / p.nu - 2.0 * p.alpha * p.beta / omega +
                         (p.alpha + 0.5) * (e * e + 2.0 * p.beta) / s + 2.0 * lambda * std::abs(e);
            double dalpha = -std::log(omega) + std::log(s) + digamma(p.alpha) -
                            digamma(p.alpha + 0.5) + lambda * std::abs(e);
            double dbeta = -p.alpha / p.beta + 2.0 * (p.alpha + 0.5) * (1.0 + p.nu) / s;

            const double inv_n = 1.0 / static_cast<double>(n);
            dout(i, 0) = dgamma * inv_n;
            dout(i, 1) = dnu * sigmoid(out(i, 1)) * inv_n;
            dout(i, 2) = dalpha * sigmoid(out(i, 2)) * inv_n;
            dout(i, 3) = dbeta * sigmoid(out(i, 3)) * inv_n;
        }
        return total / static_cast<double>(n);
    }
};

} // namespace

SurrogateModel fit_surrogate(const std::vector<std::pair<EmbeddingVector, double>>& data,
                             const SurrogateConfig& config, std::mt19937_64& rng) {
    config.validate();
    if (data.size() < 4) throw Error("fit_surrogate: need at least 4 training points");
    const std::size_t dim = data[0].first.size();
    if (dim == 0) throw Error("fit_surrogate: empty embedding vectors");
    for (const auto& [z, y] : data) {
        if (z.size() != dim) throw DimensionMismatchError("fit_surrogate: mixed embedding dimensions");
        if (!std::isfinite(y)) throw Error("fit_surrogate: non-finite target");
    }

    std::mt19937_64 inner(derive_seed(config.seed, rng()));

    // Validation split.
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), inner);
    const std::size_t n_val = std::clamp<std::size_t>(
        static_cast<std::size_t>(
            std::lround(config.validation_fraction * static_cast<double>(data.size()))),
        1, data.size() - 2);
    const std::size_t n_train = data.size() - n_val;

    MatrixXd x_train(static_cast<Eigen::Index>(n_train), static_cast<Eigen::Index>(dim));
    VectorXd y_train(static_cast<Eigen::Index>(n_train));
    for (std::size_t i = 0; i < n_train; ++i) {
        const auto& [z, y] = data[order[i]];
        for (std::size_t j = 0; j < dim; ++j)
            x_train(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = z[j];
        y_train(static_cast<Eigen::Index>(i)) = y;
    }

    auto impl = std::make_shared<SurrogateModel::Impl>();
    impl->kind = config.kind;
    impl->input_dim = dim;
    impl->train_size = data.size();
    impl->input_std = Standardizer::fit(x_train);
    impl->target_mean = y_train.mean();
    const double y_var = (y_train.array() - impl->target_mean).square().mean();
    impl->target_scale = std::sqrt(y_var);

    if (impl->target_scale < 1e-12) {
        // All training scores identical: constant predictor with zero spread.
        impl->degenerate = true;
        impl->target_scale = 1.0;
        return SurrogateModel(std::move(impl));
    }

    const MatrixXd xs = impl->input_std.apply(x_train);
    const VectorXd ys = (y_train.array() - impl->target_mean) / impl->target_scale;

    if (config.kind == SurrogateKind::deep_ensemble) {
        std::vector<std::vector<double>> curves;
        for (int m = 0; m < config.ensemble_size; ++m) {
            std::mt19937_64 member_rng(derive_seed(inner(), static_cast<std::uint64_t>(m)));
            // Bootstrap resample of the training split.
            std::uniform_int_distribution<std::size_t> pick(0, n_train - 1);
            MatrixXd xb(xs.rows(), xs.cols());
            VectorXd yb(ys.size());
            for (Eigen::Index i = 0; i < xb.rows(); ++i) {
                const auto src = static_cast<Eigen::Index>(pick(member_rng));
                xb.row(i) = xs.row(src);
                yb(i) = ys(src);
            }
            Mlp net = Mlp::init(dim, config.hidden_sizes, 1, member_rng);
            AdamState adam(net);
            std::vector<std::size_t> idx(n_train);
            std::iota(idx.begin(), idx.end(), 0);
            std::vector<double> curve;
            curve.reserve(static_cast<std::size_t>(config.epochs));
            for (int epoch = 0; epoch < config.epochs; ++epoch) {
                curve.push_back(train_epoch(net, adam, xb, yb, idx, config.batch_size,
                                            config.learning_rate, member_rng,
                                            squared_loss_grad));
            }
            curves.push_back(std::move(curve));
            impl->members.push_back(std::move(net));
        }
        impl->loss_curve.assign(static_cast<std::size_t>(config.epochs), 0.0);
        for (const auto& c : curves)
            for (std::size_t e = 0; e < c.size(); ++e) impl->loss_curve[e] += c[e] / curves.size();
    } else {
        std::mt19937_64 member_rng(derive_seed(inner(), 0));
        Mlp net = Mlp::init(dim, config.hidden_sizes, 4, member_rng);
        AdamState adam(net);
        std::vector<std::size_t> idx(n_train);
        std::iota(idx.begin(), idx.end(), 0);
        EvidentialLoss loss{config.evidential_lambda};
        impl->loss_curve.reserve(static_cast<std::size_t>(config.epochs));
        for (int epoch = 0; epoch < config.epochs; ++epoch) {
            impl->loss_curve.push_back(train_epoch(net, adam, xs, ys, idx, config.batch_size,
                                                   config.learning_rate, member_rng, loss));
        }
        impl->members.push_back(std::move(net));
    }

    // Holdout R^2.
    std::vector<EmbeddingVector> val_z;
    std::vector<double> val_y;
    for (std::size_t i = n_train; i < data.size(); ++i) {
        val_z.push_back(data[order[i]].first);
        val_y.push_back(data[order[i]].second);
    }
    const double vmean = std::accumulate(val_y.begin(), val_y.end(), 0.0) /
                         static_cast<double>(val_y.size());
    double ss_tot = 0.0;
    for (double y : val_y) ss_tot += (y - vmean) * (y - vmean);
    if (ss_tot > 0.0) {
        const auto preds = impl->predict_rows(val_z);
        double ss_res = 0.0;
        for (std::size_t i = 0; i < val_y.size(); ++i)
            ss_res += (val_y[i] - preds[i].mean) * (val_y[i] - preds[i].mean);
        impl->validation_r2 = 1.0 - ss_res / ss_tot;
    }
    return SurrogateModel(std::move(impl));
}

double validation_r2(const SurrogateModel& model,
                     const std::vector<std::pair<EmbeddingVector, double>>& holdout) {
    if (holdout.size() < 2) throw Error("validation_r2: need at least 2 holdout points");
    std::vector<EmbeddingVector> zs;
    std::vector<double> ys;
    for (const auto& [z, y] : holdout) {
        zs.push_back(z);
        ys.push_back(y);
    }
    const double mean = std::accumulate(ys.begin(), ys.end(), 0.0) / static_cast<double>(ys.size());
    double ss_tot = 0.0;
    for (double y : ys) ss_tot += (y - mean) * (y - mean);
    if (ss_tot == 0.0) throw ConstantTargetsError();
    const auto preds = model.predict_batch(zs);
    double ss_res = 0.0;
    for (std::size_t i = 0; i < ys.size(); ++i)
        ss_res += (ys[i] - preds[i].mean) * (ys[i] - preds[i].mean);
    return 1.0 - ss_res / ss_tot;
}

} // namespace boga
