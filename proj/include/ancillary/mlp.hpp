#pragma once
// Multilayer perceptron with rectifier hidden units and a sigmoid output,
// trained by mini-batch SGD with inverted dropout and a decaying learning
// rate. Also provides the weighted cross-entropy loss, a finite-difference
// gradient checker, and the APP-DNN purchase-probability model.

#include "ancillary/core.hpp"
#include "ancillary/gnb.hpp"
#include "ancillary/rng.hpp"

#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <vector>

namespace ancillary {

struct DenseLayer {
    std::size_t inputs = 0;
    std::size_t outputs = 0;
    std::vector<double> weights;  // outputs x inputs, row-major
    std::vector<double> bias;

    bool operator==(const DenseLayer&) const = default;
};

struct MlpModel {
    std::vector<DenseLayer> layers;  // hidden layers then the single-unit output layer
    std::uint64_t seed = 0;

    std::size_t input_dimension() const { return layers.empty() ? 0 : layers.front().inputs; }

    /// {inputs, hidden..., 1}
    std::vector<std::size_t> architecture() const {
        std::vector<std::size_t> a;
        if (layers.empty()) return a;
        a.push_back(layers.front().inputs);
        for (const auto& l : layers) a.push_back(l.outputs);
        return a;
    }

    std::size_t parameter_count() const {
        std::size_t n = 0;
        for (const auto& l : layers) n += l.weights.size() + l.bias.size();
        return n;
    }

    bool all_finite() const {
        for (const auto& l : layers) {
            for (double w : l.weights) if (!std::isfinite(w)) return false;
            for (double b : l.bias) if (!std::isfinite(b)) return false;
        }
        return true;
    }

    bool operator==(const MlpModel&) const = default;
};

inline const std::vector<std::size_t> kDefaultHiddenLayers{64, 32};

/// Glorot-uniform weights in ±sqrt(6 / (fan_in + fan_out)), zero biases.
inline MlpModel init_mlp(std::size_t inputs, std::span<const std::size_t> hidden,
                         std::uint64_t seed) {
    if (inputs == 0) throw Error(Errc::BadArchitecture, "input dimension must be >= 1");
    if (hidden.empty()) throw Error(Errc::BadArchitecture, "at least one hidden layer required");
    for (auto h : hidden)
        if (h == 0) throw Error(Errc::BadArchitecture, "hidden layer sizes must be >= 1");

    MlpModel m;
    m.seed = seed;
    Rng rng(seed);
    std::size_t fan_in = inputs;
    auto add_layer = [&](std::size_t fan_out) {
        DenseLayer l;
        l.inputs = fan_in;
        l.outputs = fan_out;
        const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        l.weights.resize(fan_in * fan_out);
        for (auto& w : l.weights) w = rng.uniform(-limit, limit);
        l.bias.assign(fan_out, 0.0);
        m.layers.push_back(std::move(l));
        fan_in = fan_out;
    };
    for (auto h : hidden) add_layer(h);
    add_layer(1);
    return m;
}

inline MlpModel init_mlp(std::size_t inputs, std::initializer_list<std::size_t> hidden,
                         std::uint64_t seed) {
    return init_mlp(inputs, std::span<const std::size_t>(hidden.begin(), hidden.size()), seed);
}

enum class Mode { Train, Infer };

/// Intermediate values kept for backpropagation.
struct ForwardTrace {
    std::vector<std::vector<double>> pre;          // pre-activation per layer
    std::vector<std::vector<double>> activations;  // [0] = input, then per layer output
    std::vector<std::vector<double>> masks;        // per hidden layer, 0 or 1/(1-rate)
    double output = 0.5;
};

/// Network output in (0, 1). Train mode applies inverted dropout to hidden
/// units and needs `rng` when `dropout_rate > 0`; infer mode is deterministic.
inline double forward(const MlpModel& m, std::span<const double> input, Mode mode,
                      double dropout_rate = 0.0, Rng* rng = nullptr,
                      ForwardTrace* trace = nullptr) {
    if (input.size() != m.input_dimension())
        throw Error(Errc::DimensionMismatch, "network input has dimension " +
                                                 std::to_string(input.size()) + ", expected " +
                                                 std::to_string(m.input_dimension()));
    const bool drop = mode == Mode::Train && dropout_rate > 0.0;
    if (drop && rng == nullptr) throw Error(Errc::InvalidArgument, "dropout needs an rng");
    const double keep_scale = drop ? 1.0 / (1.0 - dropout_rate) : 1.0;

    if (trace) {
        trace->pre.assign(m.layers.size(), {});
        trace->activations.assign(m.layers.size() + 1, {});
        trace->masks.assign(m.layers.size() - 1, {});
        trace->activations[0].assign(input.begin(), input.end());
    }

    std::vector<double> a(input.begin(), input.end());
    std::vector<double> z;
    for (std::size_t li = 0; li < m.layers.size(); ++li) {
        const auto& l = m.layers[li];
        z.assign(l.outputs, 0.0);
        for (std::size_t o = 0; o < l.outputs; ++o) {
            const double* w = &l.weights[o * l.inputs];
            double s = l.bias[o];
            for (std::size_t i = 0; i < l.inputs; ++i) s += w[i] * a[i];
            z[o] = s;
        }
        if (trace) trace->pre[li] = z;
        const bool hidden = li + 1 < m.layers.size();
        if (hidden) {
            a.resize(l.outputs);
            std::vector<double> mask;
            if (trace) mask.assign(l.outputs, 1.0);
            for (std::size_t o = 0; o < l.outputs; ++o) {
                double v = z[o] > 0.0 ? z[o] : 0.0;
                if (drop) {
                    const double keep = rng->uniform() >= dropout_rate ? keep_scale : 0.0;
                    v *= keep;
                    if (trace) mask[o] = keep;
                }
                a[o] = v;
            }
            if (trace) {
                trace->masks[li] = std::move(mask);
                trace->activations[li + 1] = a;
            }
        } else {
            const double out = logistic(std::clamp(z[0], -kMaxLogOdds, kMaxLogOdds));
            if (trace) {
                trace->activations[li + 1] = {out};
                trace->output = out;
            }
            return out;
        }
    }
    return 0.5;  // unreachable for a valid model
}

/// Gradient buffers shaped like the model's parameters.
struct MlpGradient {
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> bias;

    explicit MlpGradient(const MlpModel& m) {
        for (const auto& l : m.layers) {
            weights.emplace_back(l.weights.size(), 0.0);
            bias.emplace_back(l.bias.size(), 0.0);
        }
    }
    void zero() {
        for (auto& w : weights) std::fill(w.begin(), w.end(), 0.0);
        for (auto& b : bias) std::fill(b.begin(), b.end(), 0.0);
    }
    std::vector<double> flatten() const {
        std::vector<double> out;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            out.insert(out.end(), weights[i].begin(), weights[i].end());
            out.insert(out.end(), bias[i].begin(), bias[i].end());
        }
        return out;
    }
};

/// Accumulate d(loss)/d(params) into `grad`, given d(loss)/d(output).
inline void backward(const MlpModel& m, const ForwardTrace& trace, double dloss_doutput,
                     MlpGradient& grad) {
    const double s = trace.output;
    std::vector<double> delta{dloss_doutput * s * (1.0 - s)};
    for (std::size_t li = m.layers.size(); li-- > 0;) {
        const auto& l = m.layers[li];
        const auto& a_prev = trace.activations[li];
        auto& gw = grad.weights[li];
        auto& gb = grad.bias[li];
        for (std::size_t o = 0; o < l.outputs; ++o) {
            const double d = delta[o];
            if (d == 0.0) continue;
            gb[o] += d;
            double* g = &gw[o * l.inputs];
            for (std::size_t i = 0; i < l.inputs; ++i) g[i] += d * a_prev[i];
        }
        if (li == 0) break;
        std::vector<double> prev(l.inputs, 0.0);
        for (std::size_t o = 0; o < l.outputs; ++o) {
            const double d = delta[o];
            if (d == 0.0) continue;
            const double* w = &l.weights[o * l.inputs];
            for (std::size_t i = 0; i < l.inputs; ++i) prev[i] += w[i] * d;
        }
        const auto& z_prev = trace.pre[li - 1];
        const auto& mask = trace.masks[li - 1];
        for (std::size_t i = 0; i < prev.size(); ++i)
            prev[i] = z_prev[i] > 0.0 ? prev[i] * mask[i] : 0.0;
        delta = std::move(prev);
    }
}

// ---------------------------------------------------------------------------
// Losses

struct LossGrad {
    double loss = 0.0;
    double grad = 0.0;  // derivative with respect to the network output
};

inline constexpr double kProbClamp = 1e-7;

/// -[w_pos * y * ln p + (1 - y) * ln(1 - p)], with p clamped to
/// [1e-7, 1 - 1e-7]; the derivative is evaluated at the clamped p.
inline LossGrad weighted_ce_loss(double p, int y, double w_pos) {
    const double q = std::clamp(p, kProbClamp, 1.0 - kProbClamp);
    if (y == 1) return {-w_pos * std::log(q), -w_pos / q};
    return {-std::log(1.0 - q), 1.0 / (1.0 - q)};
}

// ---------------------------------------------------------------------------
// Training

struct TrainConfig {
    double learning_rate = 0.05;           // η₀
    double decay = 1e-4;                   // λ in η_t = η₀ / (1 + λ t), t = mini-batch step
    std::size_t batch_size = 64;
    std::size_t epochs = 20;
    double dropout_rate = 0.0;
    std::optional<double> positive_weight; // default: #negatives / #positives
    std::uint64_t seed = 0;

    void validate() const {
        if (!(learning_rate > 0.0)) throw Error(Errc::InvalidArgument, "learning rate must be > 0");
        if (!(decay >= 0.0)) throw Error(Errc::InvalidArgument, "decay must be >= 0");
        if (batch_size == 0) throw Error(Errc::InvalidArgument, "batch size must be >= 1");
        if (!(dropout_rate >= 0.0 && dropout_rate < 1.0))
            throw Error(Errc::InvalidArgument, "dropout rate must be in [0, 1)");
        if (positive_weight && !(*positive_weight > 0.0))
            throw Error(Errc::InvalidArgument, "positive-class weight must be > 0");
    }
};

inline double learning_rate_at(const TrainConfig& cfg, std::size_t step) {
    return cfg.learning_rate / (1.0 + cfg.decay * static_cast<double>(step));
}

struct TrainResult {
    MlpModel model;
    std::vector<double> epoch_loss;  // mean per-sample loss of each epoch
    std::size_t steps = 0;
};

/// Mini-batch SGD over `n` samples. `input(i)` yields the network input of
/// sample i; `sample_loss(i, output)` yields the loss and its derivative with
/// respect to the network output. Samples are reshuffled every epoch.
template <class InputFn, class LossFn>
TrainResult sgd_train(MlpModel model, std::size_t n, InputFn&& input, LossFn&& sample_loss,
                      const TrainConfig& cfg) {
    cfg.validate();
    TrainResult result;
    Rng rng(cfg.seed ^ 0x5eedf00dULL);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    MlpGradient grad(model);
    ForwardTrace trace;

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
        double epoch_sum = 0.0;
        for (std::size_t start = 0; start < n; start += cfg.batch_size) {
            const std::size_t end = std::min(n, start + cfg.batch_size);
            grad.zero();
            for (std::size_t b = start; b < end; ++b) {
                const std::size_t idx = order[b];
                forward(model, input(idx), Mode::Train, cfg.dropout_rate, &rng, &trace);
                const LossGrad lg = sample_loss(idx, trace.output);
                if (!std::isfinite(lg.loss) || !std::isfinite(lg.grad)) {
                    std::ostringstream os;
                    os << "loss " << lg.loss << " / gradient " << lg.grad << " at epoch " << epoch
                       << ", step " << result.steps << ", sample " << idx
                       << ", output " << trace.output;
                    throw Error(Errc::NonFiniteLoss, os.str());
                }
                epoch_sum += lg.loss;
                backward(model, trace, lg.grad, grad);
            }
            const double scale = learning_rate_at(cfg, result.steps) / static_cast<double>(end - start);
            for (std::size_t li = 0; li < model.layers.size(); ++li) {
                auto& l = model.layers[li];
                for (std::size_t k = 0; k < l.weights.size(); ++k) l.weights[k] -= scale * grad.weights[li][k];
                for (std::size_t k = 0; k < l.bias.size(); ++k) l.bias[k] -= scale * grad.bias[li][k];
            }
            ++result.steps;
        }
        const double mean = n ? epoch_sum / static_cast<double>(n) : 0.0;
        if (!std::isfinite(mean) || !model.all_finite())
            throw Error(Errc::NonFiniteLoss, "parameters diverged in epoch " + std::to_string(epoch));
        result.epoch_loss.push_back(mean);
    }
    result.model = std::move(model);
    return result;
}

// ---------------------------------------------------------------------------
// Gradient checking

/// |a - n| / max(|a|, |n|), falling back to the absolute error when both
/// magnitudes are below 1e-7.
inline double gradient_error(double analytic, double numeric) {
    const double denom = std::max(std::abs(analytic), std::abs(numeric));
    const double diff = std::abs(analytic - numeric);
    return denom < 1e-7 ? diff : diff / denom;
}

/// Worst error between `analytic` and central differences of `objective`
/// around `params`.
template <class Objective>
double grad_check(std::span<const double> params, std::span<const double> analytic,
                  Objective&& objective, double step) {
    if (params.size() != analytic.size())
        throw Error(Errc::DimensionMismatch, "gradient size differs from parameter count");
    std::vector<double> probe(params.begin(), params.end());
    double worst = 0.0;
    for (std::size_t k = 0; k < probe.size(); ++k) {
        const double orig = probe[k];
        probe[k] = orig + step;
        const double up = objective(std::span<const double>(probe));
        probe[k] = orig - step;
        const double down = objective(std::span<const double>(probe));
        probe[k] = orig;
        worst = std::max(worst, gradient_error(analytic[k], (up - down) / (2.0 * step)));
    }
    return worst;
}

inline std::vector<double> flatten_parameters(const MlpModel& m) {
    std::vector<double> out;
    out.reserve(m.parameter_count());
    for (const auto& l : m.layers) {
        out.insert(out.end(), l.weights.begin(), l.weights.end());
        out.insert(out.end(), l.bias.begin(), l.bias.end());
    }
    return out;
}

inline void assign_parameters(MlpModel& m, std::span<const double> params) {
    if (params.size() != m.parameter_count())
        throw Error(Errc::DimensionMismatch, "parameter vector has wrong length");
    std::size_t k = 0;
    for (auto& l : m.layers) {
        for (auto& w : l.weights) w = params[k++];
        for (auto& b : l.bias) b = params[k++];
    }
}

/// Gradient check of `loss_fn(output) -> LossGrad` through the network at
/// one input, in infer mode (no dropout).
template <class LossFn>
double grad_check(const MlpModel& model, LossFn&& loss_fn, std::span<const double> input,
                  double step) {
    ForwardTrace trace;
    forward(model, input, Mode::Infer, 0.0, nullptr, &trace);
    MlpGradient grad(model);
    backward(model, trace, loss_fn(trace.output).grad, grad);
    const auto analytic = grad.flatten();

    MlpModel probe = model;
    auto objective = [&](std::span<const double> params) {
        assign_parameters(probe, params);
        return loss_fn(forward(probe, input, Mode::Infer)).loss;
    };
    return grad_check(flatten_parameters(model), analytic, objective, step);
}

// ---------------------------------------------------------------------------
// APP-DNN: purchase probability from features and price

struct AppDnnModel {
    MlpModel net;  // input: x ⊕ price/price_scale
    double price_scale = 1.0;
    std::uint64_t schema_hash = 0;
};

struct AppTrainResult {
    AppDnnModel model;
    std::vector<double> epoch_loss;
};

inline AppTrainResult train_app(const EncodedDataset& data, double price_scale,
                                std::span<const std::size_t> hidden, const TrainConfig& cfg) {
    if (data.size() == 0) throw Error(Errc::EmptyDataset, "no training data");
    const std::size_t pos = data.positives();
    if (pos == 0 || pos == data.size())
        throw Error(Errc::SingleClassDataset, "APP training needs both classes present");
    if (!(price_scale > 0.0)) throw Error(Errc::InvalidArgument, "price scale must be > 0");
    const double w_pos = cfg.positive_weight.value_or(
        static_cast<double>(data.size() - pos) / static_cast<double>(pos));

    std::vector<std::vector<double>> inputs;
    inputs.reserve(data.size());
    for (std::size_t i = 0; i < data.size(); ++i)
        inputs.push_back(augment_with_price(data.rows[i].values, data.prices[i], price_scale));

    auto net = init_mlp(inputs.front().size(), hidden, cfg.seed);
    auto trained = sgd_train(
        std::move(net), data.size(),
        [&](std::size_t i) { return std::span<const double>(inputs[i]); },
        [&](std::size_t i, double p) { return weighted_ce_loss(p, data.labels[i], w_pos); }, cfg);

    AppTrainResult r;
    r.model.net = std::move(trained.model);
    r.model.price_scale = price_scale;
    r.model.schema_hash = data.rows.front().schema_hash;
    r.epoch_loss = std::move(trained.epoch_loss);
    return r;
}

inline double predict_proba(const AppDnnModel& m, const FeatureVector& x, double price) {
    check_schema(m.schema_hash, x);
    return forward(m.net, augment_with_price(x.values, price, m.price_scale), Mode::Infer);
}

/// Probabilities for every price in one pass: the first layer's feature
/// contribution is computed once and only the price column varies.
inline std::vector<double> predict_proba_grid(const AppDnnModel& m, const FeatureVector& x,
                                              std::span<const double> prices) {
    check_schema(m.schema_hash, x);
    if (x.size() + 1 != m.net.input_dimension())
        throw Error(Errc::DimensionMismatch, "APP-DNN feature dimension mismatch");
    const auto& first = m.net.layers.front();
    std::vector<double> base(first.outputs);
    for (std::size_t o = 0; o < first.outputs; ++o) {
        const double* w = &first.weights[o * first.inputs];
        double s = first.bias[o];
        for (std::size_t i = 0; i < x.size(); ++i) s += w[i] * x.values[i];
        base[o] = s;
    }

    // Remaining layers as a sub-network fed by the first hidden activations.
    MlpModel tail;
    tail.layers.assign(m.net.layers.begin() + 1, m.net.layers.end());

    std::vector<double> out;
    out.reserve(prices.size());
    std::vector<double> h(first.outputs);
    for (double p : prices) {
        const double u = p / m.price_scale;
        for (std::size_t o = 0; o < first.outputs; ++o) {
            const double z = base[o] + first.weights[o * first.inputs + x.size()] * u;
            h[o] = z > 0.0 ? z : 0.0;
        }
        out.push_back(forward(tail, h, Mode::Infer));
    }
    return out;
}

}  // namespace ancillary
