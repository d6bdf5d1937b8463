// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 twinlink contributors

#include "twinlink/nn.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace twinlink::models {

namespace {

constexpr char kCheckpointMagic[8] = {'T', 'W', 'L', 'K', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kCheckpointVersion = 1;

std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t h = 1469598103934665603ULL) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 1099511628211ULL;
    }
    return h;
}

struct LayerDims {
    enum class Kind { Conv, Dense } kind = Kind::Dense;
    // conv
    int in_ch = 1, in_h = 1, in_w = 1;
    int out_ch = 1, kernel = 1, stride = 1;
    int out_h = 1, out_w = 1;
    // dense
    int in_dim = 1, out_dim = 1;
    bool relu = true;
    // offsets into the flat parameter vector
    std::int64_t w_off = 0, b_off = 0;
    std::int64_t weight_count() const {
        return kind == Kind::Conv
                   ? static_cast<std::int64_t>(out_ch) * in_ch * kernel * kernel
                   : static_cast<std::int64_t>(out_dim) * in_dim;
    }
    std::int64_t bias_count() const { return kind == Kind::Conv ? out_ch : out_dim; }
};

struct Layout {
    std::vector<LayerDims> layers;
    std::int64_t param_count = 0;
};

Layout build_layout(const NeuralConfig& cfg) {
    Layout layout;
    std::int64_t off = 0;
    int ch = 1, h = cfg.input_rows, w = cfg.input_cols;
    for (const auto& spec : cfg.conv_stack) {
        LayerDims l;
        l.kind = LayerDims::Kind::Conv;
        l.in_ch = ch;
        l.in_h = h;
        l.in_w = w;
        l.out_ch = spec.out_channels;
        l.kernel = spec.kernel;
        l.stride = spec.stride;
        l.out_h = (h - spec.kernel) / spec.stride + 1;
        l.out_w = (w - spec.kernel) / spec.stride + 1;
        l.relu = true;
        l.w_off = off;
        off += l.weight_count();
        l.b_off = off;
        off += l.bias_count();
        layout.layers.push_back(l);
        ch = l.out_ch;
        h = l.out_h;
        w = l.out_w;
    }
    int dim = ch * h * w;
    for (std::size_t i = 0; i <= cfg.head.size(); ++i) {
        LayerDims l;
        l.kind = LayerDims::Kind::Dense;
        l.in_dim = dim;
        l.out_dim = i < cfg.head.size() ? cfg.head[i] : 1;
        l.relu = i < cfg.head.size();
        l.w_off = off;
        off += l.weight_count();
        l.b_off = off;
        off += l.bias_count();
        layout.layers.push_back(l);
        dim = l.out_dim;
    }
    layout.param_count = off;
    return layout;
}

template <typename T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;

// Forward/backward engine over a flat parameter vector. Instantiated for
// float (training) and double (gradient checks).
template <typename T>
class Network {
  public:
    explicit Network(const NeuralConfig& cfg) : cfg_(cfg), layout_(build_layout(cfg)) {
        cfg.validate();
        params_.assign(static_cast<std::size_t>(layout_.param_count), T(0));
    }

    std::vector<T>& params() { return params_; }
    const std::vector<T>& params() const { return params_; }
    std::int64_t param_count() const { return layout_.param_count; }

    void init_params(Rng& rng) {
        for (const auto& l : layout_.layers) {
            const std::int64_t fan_in =
                l.kind == LayerDims::Kind::Conv
                    ? static_cast<std::int64_t>(l.in_ch) * l.kernel * l.kernel
                    : l.in_dim;
            const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
            for (std::int64_t i = 0; i < l.weight_count(); ++i)
                params_[static_cast<std::size_t>(l.w_off + i)] =
                    static_cast<T>(rng.uniform(-bound, bound));
            for (std::int64_t i = 0; i < l.bias_count(); ++i)
                params_[static_cast<std::size_t>(l.b_off + i)] = T(0);
        }
    }

    // Logits for a batch, one column per sample.
    Eigen::Matrix<T, 1, Eigen::Dynamic> logits(const Mat<T>& x) const {
        std::vector<Mat<T>> acts, cols;
        return run_forward(x, acts, cols);
    }

    // Loss of the (weighted) clamped BCE over the batch; fills `grad` with
    // d loss / d params when non-null.
    T loss_and_grad(const Mat<T>& x, const std::vector<int>& y, const std::vector<T>& weights,
                    aoi::Reduction reduction, std::vector<T>* grad) const {
        const auto batch = static_cast<std::int64_t>(y.size());
        std::vector<Mat<T>> acts, cols;
        const Eigen::Matrix<T, 1, Eigen::Dynamic> nu = run_forward(x, acts, cols);

        const T eps = static_cast<T>(aoi::kProbClamp);
        T loss_sum = T(0);
        Eigen::Matrix<T, 1, Eigen::Dynamic> dnu(1, batch);
        for (std::int64_t i = 0; i < batch; ++i) {
            const T p = sigmoid(nu(0, i));
            const T pc = std::clamp(p, eps, T(1) - eps);
            const T w = weights[static_cast<std::size_t>(i)];
            loss_sum += w * (y[static_cast<std::size_t>(i)] == 1 ? -std::log(pc)
                                                                 : -std::log(T(1) - pc));
            // Clamped region is flat, so its gradient is exactly zero.
            dnu(0, i) = (p <= eps || p >= T(1) - eps)
                            ? T(0)
                            : w * (p - static_cast<T>(y[static_cast<std::size_t>(i)]));
        }
        T scale = T(1);
        if (reduction == aoi::Reduction::Mean && batch > 0) scale = T(1) / static_cast<T>(batch);
        if (grad) {
            dnu *= scale;
            grad->assign(params_.size(), T(0));
            run_backward(acts, cols, dnu, *grad);
        }
        return loss_sum * scale;
    }

    static T sigmoid(T nu) { return T(1) / (T(1) + std::exp(-nu)); }

  private:
    // Returns logits; caches per-layer inputs and im2col matrices.
    Eigen::Matrix<T, 1, Eigen::Dynamic> run_forward(const Mat<T>& x, std::vector<Mat<T>>& acts,
                                                    std::vector<Mat<T>>& cols) const {
        if (x.rows() != cfg_.input_dim())
            throw std::invalid_argument("network: input dimension mismatch");
        acts.clear();
        cols.clear();
        Mat<T> cur = x;
        for (const auto& l : layout_.layers) {
            acts.push_back(cur);
            if (l.kind == LayerDims::Kind::Conv) {
                Mat<T> col;
                Mat<T> out = conv_forward(l, cur, col);
                cols.push_back(std::move(col));
                cur = std::move(out);
            } else {
                cols.emplace_back();
                const auto w = weight_map(l);
                const auto b = bias_map(l);
                Mat<T> out = (w * cur).colwise() + b;
                cur = std::move(out);
            }
            if (l.relu) cur = cur.cwiseMax(T(0));
            acts.push_back(cur);  // post-activation, reused as ReLU mask
        }
        return cur.row(0).eval();
    }

    void run_backward(const std::vector<Mat<T>>& acts, const std::vector<Mat<T>>& cols,
                      const Eigen::Matrix<T, 1, Eigen::Dynamic>& dnu,
                      std::vector<T>& grad) const {
        const auto n_layers = layout_.layers.size();
        Mat<T> delta = dnu;
        for (std::size_t li = n_layers; li-- > 0;) {
            const auto& l = layout_.layers[li];
            const Mat<T>& input = acts[2 * li];
            const Mat<T>& output = acts[2 * li + 1];
            if (l.relu)
                delta = delta.cwiseProduct(
                    (output.array() > T(0)).template cast<T>().matrix());
            if (l.kind == LayerDims::Kind::Dense) {
                auto dw = weight_grad_map(l, grad);
                auto db = bias_grad_map(l, grad);
                dw.noalias() += delta * input.transpose();
                db.noalias() += delta.rowwise().sum();
                if (li > 0) delta = (weight_map(l).transpose() * delta).eval();
            } else {
                delta = conv_backward(l, cols[li], delta, grad, li > 0);
            }
        }
    }

    Eigen::Map<const Mat<T>> weight_map(const LayerDims& l) const {
        const int rows = l.kind == LayerDims::Kind::Conv ? l.out_ch : l.out_dim;
        const int cs = l.kind == LayerDims::Kind::Conv ? l.in_ch * l.kernel * l.kernel : l.in_dim;
        return {params_.data() + l.w_off, rows, cs};
    }
    Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>> bias_map(const LayerDims& l) const {
        return {params_.data() + l.b_off, l.bias_count()};
    }
    Eigen::Map<Mat<T>> weight_grad_map(const LayerDims& l, std::vector<T>& grad) const {
        const int rows = l.kind == LayerDims::Kind::Conv ? l.out_ch : l.out_dim;
        const int cs = l.kind == LayerDims::Kind::Conv ? l.in_ch * l.kernel * l.kernel : l.in_dim;
        return {grad.data() + l.w_off, rows, cs};
    }
    Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, 1>> bias_grad_map(const LayerDims& l,
                                                                  std::vector<T>& grad) const {
        return {grad.data() + l.b_off, l.bias_count()};
    }

    // Activations are stored channel-major: index = c * (h*w) + y*w + x.
    Mat<T> conv_forward(const LayerDims& l, const Mat<T>& input, Mat<T>& col) const {
        const auto batch = input.cols();
        const int positions = l.out_h * l.out_w;
        const int krows = l.in_ch * l.kernel * l.kernel;
        col.resize(krows, static_cast<Eigen::Index>(positions) * batch);
        for (Eigen::Index s = 0; s < batch; ++s) {
            for (int oh = 0; oh < l.out_h; ++oh) {
                for (int ow = 0; ow < l.out_w; ++ow) {
                    const Eigen::Index c_out =
                        s * positions + static_cast<Eigen::Index>(oh) * l.out_w + ow;
                    int r = 0;
                    for (int c = 0; c < l.in_ch; ++c)
                        for (int ki = 0; ki < l.kernel; ++ki)
                            for (int kj = 0; kj < l.kernel; ++kj, ++r) {
                                const int iy = oh * l.stride + ki;
                                const int ix = ow * l.stride + kj;
                                col(r, c_out) = input(
                                    static_cast<Eigen::Index>(c) * l.in_h * l.in_w +
                                        static_cast<Eigen::Index>(iy) * l.in_w + ix,
                                    s);
                            }
                }
            }
        }
        const auto w = weight_map(l);
        const auto b = bias_map(l);
        Mat<T> y = (w * col).colwise() + b;  // out_ch x positions*batch
        Mat<T> out(static_cast<Eigen::Index>(l.out_ch) * positions, batch);
        for (Eigen::Index s = 0; s < batch; ++s)
            for (int c = 0; c < l.out_ch; ++c)
                for (int pos = 0; pos < positions; ++pos)
                    out(static_cast<Eigen::Index>(c) * positions + pos, s) =
                        y(c, s * positions + pos);
        return out;
    }

    Mat<T> conv_backward(const LayerDims& l, const Mat<T>& col, const Mat<T>& delta,
                         std::vector<T>& grad, bool need_dx) const {
        const auto batch = delta.cols();
        const int positions = l.out_h * l.out_w;
        Mat<T> dy(l.out_ch, static_cast<Eigen::Index>(positions) * batch);
        for (Eigen::Index s = 0; s < batch; ++s)
            for (int c = 0; c < l.out_ch; ++c)
                for (int pos = 0; pos < positions; ++pos)
                    dy(c, s * positions + pos) =
                        delta(static_cast<Eigen::Index>(c) * positions + pos, s);

        auto dw = weight_grad_map(l, grad);
        auto db = bias_grad_map(l, grad);
        dw.noalias() += dy * col.transpose();
        db.noalias() += dy.rowwise().sum();

        if (!need_dx) return {};
        const Mat<T> dcol = weight_map(l).transpose() * dy;
        Mat<T> dx = Mat<T>::Zero(static_cast<Eigen::Index>(l.in_ch) * l.in_h * l.in_w, batch);
        for (Eigen::Index s = 0; s < batch; ++s) {
            for (int oh = 0; oh < l.out_h; ++oh) {
                for (int ow = 0; ow < l.out_w; ++ow) {
                    const Eigen::Index c_out =
                        s * positions + static_cast<Eigen::Index>(oh) * l.out_w + ow;
                    int r = 0;
                    for (int c = 0; c < l.in_ch; ++c)
                        for (int ki = 0; ki < l.kernel; ++ki)
                            for (int kj = 0; kj < l.kernel; ++kj, ++r) {
                                const int iy = oh * l.stride + ki;
                                const int ix = ow * l.stride + kj;
                                dx(static_cast<Eigen::Index>(c) * l.in_h * l.in_w +
                                       static_cast<Eigen::Index>(iy) * l.in_w + ix,
                                   s) += dcol(r, c_out);
                            }
                }
            }
        }
        return dx;
    }

    NeuralConfig cfg_;
    Layout layout_;
    std::vector<T> params_;
};

template class Network<float>;
template class Network<double>;

std::vector<float> make_weights(const TrainDataset& data, const std::vector<std::size_t>& idx,
                                const std::optional<aoi::AoiConfig>& aoi_cfg) {
    std::vector<float> w(idx.size(), 1.0f);
    if (aoi_cfg && !data.ages.empty()) {
        for (std::size_t i = 0; i < idx.size(); ++i)
            w[i] = static_cast<float>(aoi::decay_weight(data.ages[idx[i]], aoi_cfg->gamma));
    }
    return w;
}

void fisher_yates(std::vector<std::size_t>& v, Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i)
        std::swap(v[i - 1], v[rng.below(i)]);
}

}  // namespace

void NeuralConfig::validate() const {
    if (input_rows < 1 || input_cols < 1)
        throw std::invalid_argument("neural: input shape must be positive");
    if (batch_size < 1) throw std::invalid_argument("neural: batch_size must be >= 1");
    if (patience < 1) throw std::invalid_argument("neural: patience must be >= 1");
    if (max_epochs < 0) throw std::invalid_argument("neural: max_epochs must be >= 0");
    if (head.size() != 2) throw std::invalid_argument("neural: head must have two hidden layers");
    for (int hsize : head)
        if (hsize < 1) throw std::invalid_argument("neural: head widths must be >= 1");
    int h = input_rows, w = input_cols;
    for (const auto& spec : conv_stack) {
        if (spec.out_channels < 1 || spec.kernel < 1 || spec.stride < 1)
            throw std::invalid_argument("neural: invalid conv spec");
        if (h < spec.kernel || w < spec.kernel)
            throw std::invalid_argument("neural: conv kernel larger than feature map");
        h = (h - spec.kernel) / spec.stride + 1;
        w = (w - spec.kernel) / spec.stride + 1;
    }
}

std::string NeuralConfig::canonical_string() const {
    std::ostringstream os;
    os.precision(17);
    os << "conv=";
    for (std::size_t i = 0; i < conv_stack.size(); ++i) {
        if (i) os << ';';
        os << conv_stack[i].out_channels << ',' << conv_stack[i].kernel << ','
           << conv_stack[i].stride;
    }
    os << "|head=" << head[0] << ',' << head[1];
    os << "|rows=" << input_rows << "|cols=" << input_cols;
    os << "|lr=" << learning_rate << "|batch=" << batch_size << "|epochs=" << max_epochs
       << "|patience=" << patience;
    os << "|b1=" << adam_beta1 << "|b2=" << adam_beta2 << "|eps=" << adam_eps;
    os << "|red=" << (loss_reduction == aoi::Reduction::Mean ? "mean" : "sum");
    os << "|seed=" << rng_seed;
    return os.str();
}

std::uint64_t NeuralConfig::digest() const {
    const std::string s = canonical_string();
    return fnv1a(s.data(), s.size());
}

NeuralConfig NeuralConfig::from_canonical_string(const std::string& s) {
    NeuralConfig cfg;
    cfg.conv_stack.clear();
    cfg.head.clear();
    std::stringstream ss(s);
    std::string field;
    while (std::getline(ss, field, '|')) {
        const auto eq = field.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("neural config: malformed field '" + field + "'");
        const std::string key = field.substr(0, eq);
        const std::string val = field.substr(eq + 1);
        if (key == "conv") {
            std::stringstream cs(val);
            std::string item;
            while (std::getline(cs, item, ';')) {
                if (item.empty()) continue;
                ConvSpec spec;
                if (std::sscanf(item.c_str(), "%d,%d,%d", &spec.out_channels, &spec.kernel,
                                &spec.stride) != 3)
                    throw std::runtime_error("neural config: bad conv spec '" + item + "'");
                cfg.conv_stack.push_back(spec);
            }
        } else if (key == "head") {
            int a = 0, b = 0;
            if (std::sscanf(val.c_str(), "%d,%d", &a, &b) != 2)
                throw std::runtime_error("neural config: bad head '" + val + "'");
            cfg.head = {a, b};
        } else if (key == "rows") {
            cfg.input_rows = std::stoi(val);
        } else if (key == "cols") {
            cfg.input_cols = std::stoi(val);
        } else if (key == "lr") {
            cfg.learning_rate = std::stod(val);
        } else if (key == "batch") {
            cfg.batch_size = std::stoi(val);
        } else if (key == "epochs") {
            cfg.max_epochs = std::stoi(val);
        } else if (key == "patience") {
            cfg.patience = std::stoi(val);
        } else if (key == "b1") {
            cfg.adam_beta1 = std::stod(val);
        } else if (key == "b2") {
            cfg.adam_beta2 = std::stod(val);
        } else if (key == "eps") {
            cfg.adam_eps = std::stod(val);
        } else if (key == "red") {
            cfg.loss_reduction = val == "mean" ? aoi::Reduction::Mean : aoi::Reduction::Sum;
        } else if (key == "seed") {
            cfg.rng_seed = std::stoull(val);
        } else {
            throw std::runtime_error("neural config: unknown key '" + key + "'");
        }
    }
    return cfg;
}

double sigmoid(double nu) { return 1.0 / (1.0 + std::exp(-nu)); }

std::uint64_t ModelState::parameter_hash() const {
    return fnv1a(params.data(), params.size() * sizeof(float));
}

ModelState make_initial_state(const NeuralConfig& cfg) {
    cfg.validate();
    Network<float> net(cfg);
    Rng rng(mix_seed(cfg.rng_seed, 0x494e4954));  // "INIT"
    net.init_params(rng);
    ModelState s;
    s.config = cfg;
    s.params = net.params();
    s.adam_m.assign(s.params.size(), 0.0f);
    s.adam_v.assign(s.params.size(), 0.0f);
    return s;
}

Prediction forward(const ModelState& state, const Eigen::Ref<const Eigen::VectorXf>& input) {
    Network<float> net(state.config);
    if (state.params.size() != net.params().size())
        throw std::invalid_argument("forward: parameter count does not match config");
    net.params() = state.params;
    Eigen::MatrixXf x = input;
    const auto nu = net.logits(x);
    Prediction p;
    p.logit = static_cast<double>(nu(0, 0));
    p.prob = 1.0 / (1.0 + std::exp(-p.logit));
    return p;
}

struct Predictor::Impl {
    explicit Impl(const NeuralConfig& cfg) : net(cfg) {}
    Network<float> net;
};

Predictor::Predictor(const ModelState& state) : impl_(new Impl(state.config)) {
    if (state.params.size() != impl_->net.params().size()) {
        delete impl_;
        throw std::invalid_argument("predictor: parameter count does not match config");
    }
    impl_->net.params() = state.params;
}

Predictor::~Predictor() { delete impl_; }

std::vector<Prediction> Predictor::predict(
    const Eigen::Ref<const Eigen::MatrixXf>& inputs) const {
    const Eigen::MatrixXf x = inputs;
    const auto nu = impl_->net.logits(x);
    std::vector<Prediction> out(static_cast<std::size_t>(nu.cols()));
    for (Eigen::Index i = 0; i < nu.cols(); ++i) {
        out[static_cast<std::size_t>(i)].logit = static_cast<double>(nu(0, i));
        out[static_cast<std::size_t>(i)].prob =
            1.0 / (1.0 + std::exp(-out[static_cast<std::size_t>(i)].logit));
    }
    return out;
}

std::vector<float> backward(const ModelState& state, const TrainDataset& batch,
                            const std::optional<aoi::AoiConfig>& aoi_cfg) {
    if (batch.size() == 0) throw std::invalid_argument("backward: empty batch");
    Network<float> net(state.config);
    net.params() = state.params;
    std::vector<std::size_t> idx(batch.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    const auto weights = make_weights(batch, idx, aoi_cfg);
    std::vector<float> grad;
    net.loss_and_grad(batch.inputs, batch.labels, weights, state.config.loss_reduction, &grad);
    return grad;
}

ModelState train(const NeuralConfig& cfg, const TrainDataset& train_set,
                 const TrainDataset& val_set, const std::optional<aoi::AoiConfig>& aoi_cfg,
                 const ModelState* state, const std::string& dataset_id) {
    cfg.validate();
    if (train_set.size() == 0) throw std::invalid_argument("train: empty training split");
    if (val_set.size() == 0) throw std::invalid_argument("train: empty validation split");
    if (!train_set.ages.empty() && train_set.ages.size() != train_set.size())
        throw std::invalid_argument("train: ages length does not match dataset");

    ModelState out = state ? *state : make_initial_state(cfg);
    if (state) {
        out.config = cfg;
        Network<float> probe(cfg);
        if (out.params.size() != probe.params().size())
            throw std::invalid_argument("train: warm-start parameter shape mismatch");
    }
    out.adam_m.assign(out.params.size(), 0.0f);
    out.adam_v.assign(out.params.size(), 0.0f);
    out.adam_steps = 0;
    out.val_history.clear();

    Network<float> net(cfg);
    net.params() = out.params;

    const std::size_t n = train_set.size();
    const auto bsz = static_cast<std::size_t>(cfg.batch_size);
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;

    const std::vector<float> val_weights(val_set.size(), 1.0f);
    std::vector<float> grad;
    std::vector<float> best_params = net.params();
    double best_val = std::numeric_limits<double>::infinity();
    int epochs_without_improvement = 0;
    int epochs_run = 0;

    Rng shuffle_rng(mix_seed(cfg.rng_seed, 0x53485546));  // "SHUF"

    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        fisher_yates(order, shuffle_rng);
        for (std::size_t start = 0; start < n; start += bsz) {
            const std::size_t count = std::min(bsz, n - start);
            Eigen::MatrixXf xb(train_set.inputs.rows(), static_cast<Eigen::Index>(count));
            std::vector<int> yb(count);
            std::vector<std::size_t> idx(count);
            for (std::size_t i = 0; i < count; ++i) {
                idx[i] = order[start + i];
                xb.col(static_cast<Eigen::Index>(i)) =
                    train_set.inputs.col(static_cast<Eigen::Index>(idx[i]));
                yb[i] = train_set.labels[idx[i]];
            }
            const auto wb = make_weights(train_set, idx, aoi_cfg);
            const float loss = net.loss_and_grad(xb, yb, wb, cfg.loss_reduction, &grad);
            if (!std::isfinite(loss)) {
                char msg[128];
                std::snprintf(msg, sizeof msg,
                              "train: non-finite loss at epoch %d, batch offset %zu", epoch,
                              start);
                throw std::runtime_error(msg);
            }
            ++out.adam_steps;
            const float b1 = static_cast<float>(cfg.adam_beta1);
            const float b2 = static_cast<float>(cfg.adam_beta2);
            const float corr1 =
                1.0f - std::pow(b1, static_cast<float>(out.adam_steps));
            const float corr2 =
                1.0f - std::pow(b2, static_cast<float>(out.adam_steps));
            const float lr = static_cast<float>(cfg.learning_rate);
            const float eps = static_cast<float>(cfg.adam_eps);
            auto& p = net.params();
            for (std::size_t i = 0; i < p.size(); ++i) {
                const float g = grad[i];
                out.adam_m[i] = b1 * out.adam_m[i] + (1.0f - b1) * g;
                out.adam_v[i] = b2 * out.adam_v[i] + (1.0f - b2) * g * g;
                const float mhat = out.adam_m[i] / corr1;
                const float vhat = out.adam_v[i] / corr2;
                p[i] -= lr * mhat / (std::sqrt(vhat) + eps);
            }
        }
        ++epochs_run;

        const double val_loss = static_cast<double>(net.loss_and_grad(
            val_set.inputs, val_set.labels, val_weights, aoi::Reduction::Mean, nullptr));
        out.val_history.push_back(val_loss);
        if (val_loss < best_val) {
            best_val = val_loss;
            best_params = net.params();
            epochs_without_improvement = 0;
        } else {
            ++epochs_without_improvement;
            if (epochs_without_improvement >= cfg.patience) break;
        }
    }

    out.params = cfg.max_epochs > 0 && best_val < std::numeric_limits<double>::infinity()
                     ? best_params
                     : net.params();
    out.epochs_trained += epochs_run;
    out.lineage.push_back(dataset_id);
    return out;
}

GradCheckResult gradient_check(const NeuralConfig& cfg, std::uint64_t seed, double fd_step,
                               double fault_scale, double input_scale) {
    Network<double> net(cfg);
    Rng init_rng(mix_seed(seed, 0x474e4554));
    net.init_params(init_rng);

    // Random batch of 4 samples with mixed labels.
    Rng data_rng(mix_seed(seed, 0x44415441));
    const int batch = 4;
    Mat<double> x(cfg.input_dim(), batch);
    std::vector<int> y(batch);
    for (int s = 0; s < batch; ++s) {
        for (int i = 0; i < cfg.input_dim(); ++i) x(i, s) = input_scale * data_rng.normal();
        y[static_cast<std::size_t>(s)] = s % 2;
    }
    const std::vector<double> w(batch, 1.0);

    std::vector<double> analytic;
    net.loss_and_grad(x, y, w, aoi::Reduction::Mean, &analytic);

    if (fault_scale != 1.0 && !analytic.empty()) {
        std::size_t arg = 0;
        for (std::size_t i = 1; i < analytic.size(); ++i)
            if (std::abs(analytic[i]) > std::abs(analytic[arg])) arg = i;
        analytic[arg] *= fault_scale;
    }

    GradCheckResult res;
    res.param_count = net.param_count();
    auto& p = net.params();
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double saved = p[i];
        p[i] = saved + fd_step;
        const double lp = net.loss_and_grad(x, y, w, aoi::Reduction::Mean, nullptr);
        p[i] = saved - fd_step;
        const double lm = net.loss_and_grad(x, y, w, aoi::Reduction::Mean, nullptr);
        p[i] = saved;
        const double fd = (lp - lm) / (2.0 * fd_step);
        const double denom = std::max(std::abs(analytic[i]) + std::abs(fd), 1e-8);
        res.max_rel_error = std::max(res.max_rel_error, std::abs(analytic[i] - fd) / denom);
    }
    return res;
}

namespace {

template <typename T>
void write_pod(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
void read_pod(std::istream& is, T& v) {
    is.read(reinterpret_cast<char*>(&v), sizeof v);
}

}  // namespace

void save_checkpoint(const std::string& path, const ModelState& state) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("checkpoint: cannot open '" + path + "' for writing");
    os.write(kCheckpointMagic, sizeof kCheckpointMagic);
    write_pod(os, kCheckpointVersion);
    write_pod(os, state.config.digest());

    const std::string cfg_str = state.config.canonical_string();
    write_pod(os, static_cast<std::uint32_t>(cfg_str.size()));
    os.write(cfg_str.data(), static_cast<std::streamsize>(cfg_str.size()));

    // Shape table: per-layer weight and bias tensor dimensions.
    const Layout layout = build_layout(state.config);
    write_pod(os, static_cast<std::uint32_t>(layout.layers.size()));
    for (const auto& l : layout.layers) {
        const std::uint8_t kind = l.kind == LayerDims::Kind::Conv ? 0 : 1;
        write_pod(os, kind);
        if (l.kind == LayerDims::Kind::Conv) {
            write_pod(os, static_cast<std::uint32_t>(l.out_ch));
            write_pod(os, static_cast<std::uint32_t>(l.in_ch));
            write_pod(os, static_cast<std::uint32_t>(l.kernel));
            write_pod(os, static_cast<std::uint32_t>(l.kernel));
        } else {
            write_pod(os, static_cast<std::uint32_t>(l.out_dim));
            write_pod(os, static_cast<std::uint32_t>(l.in_dim));
            write_pod(os, std::uint32_t{1});
            write_pod(os, std::uint32_t{1});
        }
    }

    write_pod(os, static_cast<std::uint64_t>(state.params.size()));
    os.write(reinterpret_cast<const char*>(state.params.data()),
             static_cast<std::streamsize>(state.params.size() * sizeof(float)));
    os.write(reinterpret_cast<const char*>(state.adam_m.data()),
             static_cast<std::streamsize>(state.adam_m.size() * sizeof(float)));
    os.write(reinterpret_cast<const char*>(state.adam_v.data()),
             static_cast<std::streamsize>(state.adam_v.size() * sizeof(float)));
    write_pod(os, state.adam_steps);
    write_pod(os, static_cast<std::int32_t>(state.epochs_trained));

    write_pod(os, static_cast<std::uint32_t>(state.lineage.size()));
    for (const auto& id : state.lineage) {
        write_pod(os, static_cast<std::uint32_t>(id.size()));
        os.write(id.data(), static_cast<std::streamsize>(id.size()));
    }
    if (!os) throw std::runtime_error("checkpoint: write failed for '" + path + "'");
}

ModelState load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("checkpoint: cannot open '" + path + "'");
    char magic[8];
    is.read(magic, sizeof magic);
    if (!is || std::memcmp(magic, kCheckpointMagic, sizeof magic) != 0)
        throw std::runtime_error("checkpoint: bad magic in '" + path + "'");
    std::uint32_t version = 0;
    read_pod(is, version);
    if (version != kCheckpointVersion)
        throw std::runtime_error("checkpoint: unsupported version");
    std::uint64_t digest = 0;
    read_pod(is, digest);

    std::uint32_t cfg_len = 0;
    read_pod(is, cfg_len);
    std::string cfg_str(cfg_len, '\0');
    is.read(cfg_str.data(), cfg_len);

    ModelState state;
    state.config = NeuralConfig::from_canonical_string(cfg_str);
    if (state.config.digest() != digest)
        throw std::runtime_error("checkpoint: config digest mismatch");

    std::uint32_t n_layers = 0;
    read_pod(is, n_layers);
    for (std::uint32_t i = 0; i < n_layers; ++i) {
        std::uint8_t kind = 0;
        std::uint32_t dims[4];
        read_pod(is, kind);
        for (auto& d : dims) read_pod(is, d);
    }

    std::uint64_t n_params = 0;
    read_pod(is, n_params);
    const Layout layout = build_layout(state.config);
    if (n_params != static_cast<std::uint64_t>(layout.param_count))
        throw std::runtime_error("checkpoint: parameter count does not match config");
    state.params.resize(n_params);
    state.adam_m.resize(n_params);
    state.adam_v.resize(n_params);
    is.read(reinterpret_cast<char*>(state.params.data()),
            static_cast<std::streamsize>(n_params * sizeof(float)));
    is.read(reinterpret_cast<char*>(state.adam_m.data()),
            static_cast<std::streamsize>(n_params * sizeof(float)));
    is.read(reinterpret_cast<char*>(state.adam_v.data()),
            static_cast<std::streamsize>(n_params * sizeof(float)));
    read_pod(is, state.adam_steps);
    std::int32_t epochs = 0;
    read_pod(is, epochs);
    state.epochs_trained = epochs;

    std::uint32_t n_lineage = 0;
    read_pod(is, n_lineage);
    for (std::uint32_t i = 0; i < n_lineage; ++i) {
        std::uint32_t len = 0;
        read_pod(is, len);
        std::string id(len, '\0');
        is.read(id.data(), len);
        state.lineage.push_back(std::move(id));
    }
    if (!is) throw std::runtime_error("checkpoint: truncated file '" + path + "'");
    return state;
}

}  // namespace twinlink::models
