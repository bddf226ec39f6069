#include "mivs/nn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mivs/binio.hpp"
#include "mivs/errors.hpp"
#include "mivs/rng.hpp"

namespace mivs {

namespace {

constexpr char kModelMagic[9] = "MIVSNN1\n";
constexpr double kProbClamp = 1e-12;

// Flat-parameter offsets in declaration order: per recurrent layer W_xh,
// W_hh, b; then dense1 W,b; dense2 W,b; head W,b.
struct Offsets {
    struct Layer {
        std::size_t w_xh, w_hh, b;
        int in, h;
    };
    std::array<Layer, 3> layer;
    std::size_t d1_w, d1_b, d2_w, d2_b, head_w, head_b;
    std::size_t total;
    int flat, d1, d2, classes;
};

Offsets offsets_of(const RnnDims& dims) {
    Offsets o{};
    std::size_t at = 0;
    int in = dims.d;
    for (int l = 0; l < 3; ++l) {
        int h = dims.hidden[static_cast<std::size_t>(l)];
        auto& L = o.layer[static_cast<std::size_t>(l)];
        L.in = in;
        L.h = h;
        L.w_xh = at;
        at += static_cast<std::size_t>(h) * static_cast<std::size_t>(in);
        L.w_hh = at;
        at += static_cast<std::size_t>(h) * static_cast<std::size_t>(h);
        L.b = at;
        at += static_cast<std::size_t>(h);
        in = h;
    }
    o.flat = dims.flatten_size();
    o.d1 = dims.dense1;
    o.d2 = dims.dense2;
    o.classes = dims.classes;
    o.d1_w = at;
    at += static_cast<std::size_t>(o.d1) * static_cast<std::size_t>(o.flat);
    o.d1_b = at;
    at += static_cast<std::size_t>(o.d1);
    o.d2_w = at;
    at += static_cast<std::size_t>(o.d2) * static_cast<std::size_t>(o.d1);
    o.d2_b = at;
    at += static_cast<std::size_t>(o.d2);
    o.head_w = at;
    at += static_cast<std::size_t>(o.classes) * static_cast<std::size_t>(o.d2);
    o.head_b = at;
    at += static_cast<std::size_t>(o.classes);
    o.total = at;
    return o;
}

// y = W x + b, W is rows x cols row-major.
void affine(const double* w, const double* b, const double* x, double* y, int rows, int cols) {
    for (int i = 0; i < rows; ++i) {
        double acc = b ? b[i] : 0.0;
        const double* wr = w + static_cast<std::size_t>(i) * static_cast<std::size_t>(cols);
        for (int j = 0; j < cols; ++j) acc += wr[j] * x[j];
        y[i] = acc;
    }
}

// x_grad += W^T dy
void add_wt_vec(const double* w, const double* dy, double* x_grad, int rows, int cols) {
    for (int i = 0; i < rows; ++i) {
        const double* wr = w + static_cast<std::size_t>(i) * static_cast<std::size_t>(cols);
        double g = dy[i];
        for (int j = 0; j < cols; ++j) x_grad[j] += wr[j] * g;
    }
}

// gW += dy x^T
void add_outer(double* gw, const double* dy, const double* x, int rows, int cols) {
    for (int i = 0; i < rows; ++i) {
        double* gr = gw + static_cast<std::size_t>(i) * static_cast<std::size_t>(cols);
        double g = dy[i];
        for (int j = 0; j < cols; ++j) gr[j] += g * x[j];
    }
}

std::array<double, 2> softmax2(const std::array<double, 2>& logits) {
    double m = std::max(logits[0], logits[1]);
    double e0 = std::exp(logits[0] - m);
    double e1 = std::exp(logits[1] - m);
    double s = e0 + e1;
    return {e0 / s, e1 / s};
}

} // namespace

void RnnDims::resolve() {
    if (T < 2) throw std::invalid_argument("window length T must be >= 2");
    if (d < 1) throw std::invalid_argument("channel count d must be positive");
    if (dense1 == 0) {
        std::size_t fixed = 0;
        int in = d;
        for (int h : hidden) {
            fixed += static_cast<std::size_t>(h) * static_cast<std::size_t>(in + h + 1);
            in = h;
        }
        fixed += static_cast<std::size_t>(dense2);
        fixed += static_cast<std::size_t>(classes) * static_cast<std::size_t>(dense2 + 1);
        double budget = static_cast<double>(kParamBudget) - static_cast<double>(fixed);
        double per_unit = static_cast<double>(flatten_size() + 1 + dense2);
        dense1 = std::max(4, static_cast<int>(std::llround(budget / per_unit)));
    }
    validate();
}

void RnnDims::validate() const {
    if (T < 2 || d < 1) throw std::invalid_argument("bad input dimensions");
    for (int h : hidden)
        if (h < 1) throw std::invalid_argument("hidden sizes must be positive");
    if (dense1 < 1 || dense2 < 1) throw std::invalid_argument("dense sizes must be positive");
    if (classes != 2) throw std::invalid_argument("classifier head is binary");
}

std::size_t RnnDims::param_count() const { return offsets_of(*this).total; }

RnnModel RnnModel::init(LineKind kind, RnnDims dims, std::uint64_t seed) {
    dims.resolve();
    RnnModel m;
    m.kind = kind;
    m.dims = dims;
    m.seed = seed;
    Offsets o = offsets_of(dims);
    m.params.assign(o.total, 0.0);

    Rng rng(seed);
    auto init_tensor = [&](std::size_t at, std::size_t count, int fan_in) {
        double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        for (std::size_t i = 0; i < count; ++i) m.params[at + i] = rng.uniform(-bound, bound);
    };
    for (int l = 0; l < 3; ++l) {
        const auto& L = o.layer[static_cast<std::size_t>(l)];
        init_tensor(L.w_xh, static_cast<std::size_t>(L.h) * static_cast<std::size_t>(L.in), L.in);
        init_tensor(L.w_hh, static_cast<std::size_t>(L.h) * static_cast<std::size_t>(L.h), L.h);
        // biases stay zero
    }
    init_tensor(o.d1_w, static_cast<std::size_t>(o.d1) * static_cast<std::size_t>(o.flat), o.flat);
    init_tensor(o.d2_w, static_cast<std::size_t>(o.d2) * static_cast<std::size_t>(o.d1), o.d1);
    init_tensor(o.head_w, static_cast<std::size_t>(o.classes) * static_cast<std::size_t>(o.d2), o.d2);
    return m;
}

std::array<double, 2> forward(const RnnModel& model, std::span<const double> window,
                              ForwardCache* cache) {
    const RnnDims& dims = model.dims;
    auto expected = static_cast<std::size_t>(dims.T) * static_cast<std::size_t>(dims.d);
    if (window.size() != expected)
        throw std::invalid_argument("window shape does not match model input (" +
                                    std::to_string(window.size()) + " vs " +
                                    std::to_string(expected) + ")");
    for (double v : window)
        if (!std::isfinite(v)) throw std::invalid_argument("window contains non-finite values");

    Offsets o = offsets_of(dims);
    const double* P = model.params.data();

    ForwardCache local;
    ForwardCache& c = cache ? *cache : local;

    const double* input = window.data();
    int in_dim = dims.d;
    for (int l = 0; l < 3; ++l) {
        const auto& L = o.layer[static_cast<std::size_t>(l)];
        auto& hseq = c.h[static_cast<std::size_t>(l)];
        hseq.assign(static_cast<std::size_t>(dims.T) * static_cast<std::size_t>(L.h), 0.0);
        std::vector<double> pre(static_cast<std::size_t>(L.h));
        const double* h_prev = nullptr;
        for (int t = 0; t < dims.T; ++t) {
            const double* x_t = input + static_cast<std::size_t>(t) * static_cast<std::size_t>(in_dim);
            affine(P + L.w_xh, P + L.b, x_t, pre.data(), L.h, L.in);
            if (h_prev) {
                for (int i = 0; i < L.h; ++i) {
                    const double* wr =
                        P + L.w_hh + static_cast<std::size_t>(i) * static_cast<std::size_t>(L.h);
                    double acc = pre[static_cast<std::size_t>(i)];
                    for (int j = 0; j < L.h; ++j) acc += wr[j] * h_prev[j];
                    pre[static_cast<std::size_t>(i)] = acc;
                }
            }
            double* h_t = hseq.data() + static_cast<std::size_t>(t) * static_cast<std::size_t>(L.h);
            for (int i = 0; i < L.h; ++i) h_t[i] = std::tanh(pre[static_cast<std::size_t>(i)]);
            h_prev = h_t;
        }
        input = hseq.data();
        in_dim = L.h;
    }

    const auto& h3 = c.h[2];
    if (dims.flatten_head) {
        c.flat.assign(h3.begin(), h3.end());
    } else {
        int h = dims.hidden[2];
        c.flat.assign(h3.end() - h, h3.end());
    }

    c.a1.assign(static_cast<std::size_t>(o.d1), 0.0);
    affine(P + o.d1_w, P + o.d1_b, c.flat.data(), c.a1.data(), o.d1, o.flat);
    for (double& v : c.a1) v = std::tanh(v);

    c.a2.assign(static_cast<std::size_t>(o.d2), 0.0);
    affine(P + o.d2_w, P + o.d2_b, c.a1.data(), c.a2.data(), o.d2, o.d1);
    for (double& v : c.a2) v = std::tanh(v);

    affine(P + o.head_w, P + o.head_b, c.a2.data(), c.logits.data(), o.classes, o.d2);
    c.probs = softmax2(c.logits);
    return c.probs;
}

double predict_proba(const RnnModel& model, std::span<const double> window) {
    return forward(model, window)[1];
}

double bce_loss(std::span<const double> prob_fdia, std::span<const std::uint8_t> labels) {
    if (prob_fdia.empty() || prob_fdia.size() != labels.size())
        throw std::invalid_argument("bce_loss needs a non-empty batch with matching labels");
    double acc = 0.0;
    for (std::size_t i = 0; i < prob_fdia.size(); ++i) {
        double p = std::clamp(prob_fdia[i], kProbClamp, 1.0 - kProbClamp);
        acc += labels[i] ? std::log(p) : std::log(1.0 - p);
    }
    return -acc / static_cast<double>(prob_fdia.size());
}

std::vector<double> backward_bptt(const RnnModel& model,
                                  const std::vector<std::vector<double>>& windows,
                                  const std::vector<std::uint8_t>& labels) {
    if (windows.empty() || windows.size() != labels.size())
        throw std::invalid_argument("backward_bptt needs a non-empty batch with matching labels");
    const RnnDims& dims = model.dims;
    Offsets o = offsets_of(dims);
    const double* P = model.params.data();
    std::vector<double> grads(o.total, 0.0);
    double inv_n = 1.0 / static_cast<double>(windows.size());

    ForwardCache c;
    std::vector<double> da2(static_cast<std::size_t>(o.d2));
    std::vector<double> da1(static_cast<std::size_t>(o.d1));
    std::vector<double> dflat(static_cast<std::size_t>(o.flat));

    for (std::size_t n = 0; n < windows.size(); ++n) {
        forward(model, windows[n], &c);
        if (labels[n] > 1) throw std::invalid_argument("labels must be 0 or 1");

        // Softmax + cross-entropy: dL/dlogit = p - onehot, scaled by 1/N.
        std::array<double, 2> dlogits = c.probs;
        dlogits[labels[n]] -= 1.0;
        dlogits[0] *= inv_n;
        dlogits[1] *= inv_n;

        add_outer(grads.data() + o.head_w, dlogits.data(), c.a2.data(), o.classes, o.d2);
        for (int i = 0; i < o.classes; ++i) grads[o.head_b + static_cast<std::size_t>(i)] += dlogits[static_cast<std::size_t>(i)];
        std::fill(da2.begin(), da2.end(), 0.0);
        add_wt_vec(P + o.head_w, dlogits.data(), da2.data(), o.classes, o.d2);

        for (int i = 0; i < o.d2; ++i)
            da2[static_cast<std::size_t>(i)] *= 1.0 - c.a2[static_cast<std::size_t>(i)] * c.a2[static_cast<std::size_t>(i)];
        add_outer(grads.data() + o.d2_w, da2.data(), c.a1.data(), o.d2, o.d1);
        for (int i = 0; i < o.d2; ++i) grads[o.d2_b + static_cast<std::size_t>(i)] += da2[static_cast<std::size_t>(i)];
        std::fill(da1.begin(), da1.end(), 0.0);
        add_wt_vec(P + o.d2_w, da2.data(), da1.data(), o.d2, o.d1);

        for (int i = 0; i < o.d1; ++i)
            da1[static_cast<std::size_t>(i)] *= 1.0 - c.a1[static_cast<std::size_t>(i)] * c.a1[static_cast<std::size_t>(i)];
        add_outer(grads.data() + o.d1_w, da1.data(), c.flat.data(), o.d1, o.flat);
        for (int i = 0; i < o.d1; ++i) grads[o.d1_b + static_cast<std::size_t>(i)] += da1[static_cast<std::size_t>(i)];
        std::fill(dflat.begin(), dflat.end(), 0.0);
        add_wt_vec(P + o.d1_w, da1.data(), dflat.data(), o.d1, o.flat);

        // Through the recurrent stack, top layer first.
        std::vector<double> dh_above; // T x h(l): gradient w.r.t. layer l's outputs
        {
            int h = dims.hidden[2];
            dh_above.assign(static_cast<std::size_t>(dims.T) * static_cast<std::size_t>(h), 0.0);
            if (dims.flatten_head) {
                std::copy(dflat.begin(), dflat.end(), dh_above.begin());
            } else {
                std::copy(dflat.begin(), dflat.end(),
                          dh_above.end() - static_cast<std::ptrdiff_t>(h));
            }
        }

        for (int l = 2; l >= 0; --l) {
            const auto& L = o.layer[static_cast<std::size_t>(l)];
            const auto& hseq = c.h[static_cast<std::size_t>(l)];
            const double* x_seq = l == 0 ? windows[n].data() : c.h[static_cast<std::size_t>(l - 1)].data();

            std::vector<double> dx_seq(static_cast<std::size_t>(dims.T) * static_cast<std::size_t>(L.in), 0.0);
            std::vector<double> dh_next(static_cast<std::size_t>(L.h), 0.0);
            std::vector<double> dpre(static_cast<std::size_t>(L.h));

            for (int t = dims.T - 1; t >= 0; --t) {
                const double* h_t = hseq.data() + static_cast<std::size_t>(t) * static_cast<std::size_t>(L.h);
                const double* dh_t = dh_above.data() + static_cast<std::size_t>(t) * static_cast<std::size_t>(L.h);
                for (int i = 0; i < L.h; ++i) {
                    double dh = dh_t[i] + dh_next[static_cast<std::size_t>(i)];
                    dpre[static_cast<std::size_t>(i)] = dh * (1.0 - h_t[i] * h_t[i]);
                }
                const double* x_t = x_seq + static_cast<std::size_t>(t) * static_cast<std::size_t>(L.in);
                add_outer(grads.data() + L.w_xh, dpre.data(), x_t, L.h, L.in);
                for (int i = 0; i < L.h; ++i) grads[L.b + static_cast<std::size_t>(i)] += dpre[static_cast<std::size_t>(i)];
                if (t > 0) {
                    const double* h_prev = hseq.data() + static_cast<std::size_t>(t - 1) * static_cast<std::size_t>(L.h);
                    add_outer(grads.data() + L.w_hh, dpre.data(), h_prev, L.h, L.h);
                }
                std::fill(dh_next.begin(), dh_next.end(), 0.0);
                add_wt_vec(P + L.w_hh, dpre.data(), dh_next.data(), L.h, L.h);
                add_wt_vec(P + L.w_xh, dpre.data(),
                           dx_seq.data() + static_cast<std::size_t>(t) * static_cast<std::size_t>(L.in), L.h, L.in);
            }
            dh_above = std::move(dx_seq);
        }
    }
    return grads;
}

void TrainConfig::validate() const {
    if (lr <= 0.0 || beta1 <= 0.0 || beta1 >= 1.0 || beta2 <= 0.0 || beta2 >= 1.0 || eps <= 0.0)
        throw std::invalid_argument("bad optimizer hyperparameters");
    if (batch < 1 || epochs < 0 || patience < 1) throw std::invalid_argument("bad training schedule");
    if (val_fraction < 0.0 || val_fraction >= 1.0)
        throw std::invalid_argument("val_fraction must be in [0, 1)");
    if (clip_norm <= 0.0) throw std::invalid_argument("clip_norm must be positive");
}

AdamState AdamState::for_model(const RnnModel& model) {
    AdamState s;
    s.m.assign(model.params.size(), 0.0);
    s.v.assign(model.params.size(), 0.0);
    return s;
}

void adam_step(RnnModel& model, const std::vector<double>& grads, AdamState& state,
               const TrainConfig& config) {
    if (grads.size() != model.params.size() || state.m.size() != model.params.size())
        throw std::invalid_argument("gradient/state shape does not match model");
    state.step += 1;
    double t = static_cast<double>(state.step);
    double bc1 = 1.0 - std::pow(config.beta1, t);
    double bc2 = 1.0 - std::pow(config.beta2, t);
    for (std::size_t i = 0; i < model.params.size(); ++i) {
        state.m[i] = config.beta1 * state.m[i] + (1.0 - config.beta1) * grads[i];
        state.v[i] = config.beta2 * state.v[i] + (1.0 - config.beta2) * grads[i] * grads[i];
        double m_hat = state.m[i] / bc1;
        double v_hat = state.v[i] / bc2;
        model.params[i] -= config.lr * m_hat / (std::sqrt(v_hat) + config.eps);
    }
}

std::pair<double, double> evaluate_loss_acc(const RnnModel& model,
                                            const std::vector<std::vector<double>>& xs,
                                            const std::vector<std::uint8_t>& ys) {
    if (xs.empty() || xs.size() != ys.size())
        throw std::invalid_argument("evaluation set is empty or mismatched");
    std::vector<double> probs(xs.size());
    std::size_t correct = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        probs[i] = predict_proba(model, xs[i]);
        int predicted = probs[i] >= 0.5 ? 1 : 0;
        if (predicted == ys[i]) ++correct;
    }
    return {bce_loss(probs, ys), static_cast<double>(correct) / static_cast<double>(xs.size())};
}

FitResult fit(const RnnModel& model, const std::vector<std::vector<double>>& train_x,
              const std::vector<std::uint8_t>& train_y,
              const std::vector<std::vector<double>>& val_x,
              const std::vector<std::uint8_t>& val_y, const TrainConfig& config) {
    config.validate();
    if (train_x.empty() || train_x.size() != train_y.size())
        throw std::invalid_argument("training set is empty or mismatched");
    if (val_x.size() != val_y.size()) throw std::invalid_argument("validation set mismatched");

    FitResult result;
    result.model = model;
    if (config.epochs == 0) return result;

    RnnModel current = model;
    AdamState adam = AdamState::for_model(current);
    bool have_val = !val_x.empty();
    double best_val = 0.0;
    int since_best = 0;

    std::vector<std::size_t> order(train_x.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        Rng rng(derive_seed(config.seed, 0x65, static_cast<std::uint64_t>(epoch)));
        rng.shuffle(order);

        double loss_sum = 0.0;
        std::size_t correct = 0;
        std::vector<std::vector<double>> bx;
        std::vector<std::uint8_t> by;
        for (std::size_t at = 0; at < order.size(); at += static_cast<std::size_t>(config.batch)) {
            std::size_t hi = std::min(order.size(), at + static_cast<std::size_t>(config.batch));
            bx.clear();
            by.clear();
            for (std::size_t i = at; i < hi; ++i) {
                bx.push_back(train_x[order[i]]);
                by.push_back(train_y[order[i]]);
            }

            // Batch loss/accuracy from the pre-update forward pass.
            std::vector<double> probs(bx.size());
            for (std::size_t i = 0; i < bx.size(); ++i) {
                probs[i] = predict_proba(current, bx[i]);
                if ((probs[i] >= 0.5 ? 1 : 0) == by[i]) ++correct;
            }
            double batch_loss = bce_loss(probs, by);
            if (!std::isfinite(batch_loss))
                throw TrainingDiverged("non-finite training loss at epoch " + std::to_string(epoch));
            loss_sum += batch_loss * static_cast<double>(bx.size());

            std::vector<double> grads = backward_bptt(current, bx, by);
            double norm_sq = 0.0;
            for (double g : grads) norm_sq += g * g;
            double norm = std::sqrt(norm_sq);
            if (norm > config.clip_norm) {
                double scale = config.clip_norm / norm;
                for (double& g : grads) g *= scale;
            }
            adam_step(current, grads, adam, config);
        }

        EpochRecord rec;
        rec.epoch = epoch;
        rec.train_loss = loss_sum / static_cast<double>(train_x.size());
        rec.train_acc = static_cast<double>(correct) / static_cast<double>(train_x.size());
        if (have_val) {
            auto [vl, va] = evaluate_loss_acc(current, val_x, val_y);
            if (!std::isfinite(vl))
                throw TrainingDiverged("non-finite validation loss at epoch " + std::to_string(epoch));
            rec.val_loss = vl;
            rec.val_acc = va;
        }
        result.curve.push_back(rec);

        if (have_val) {
            if (result.best_epoch < 0 || rec.val_loss < best_val) {
                best_val = rec.val_loss;
                result.best_epoch = epoch;
                result.model = current;
                since_best = 0;
            } else if (++since_best >= config.patience) {
                break;
            }
        } else {
            result.best_epoch = epoch;
            result.model = current;
        }
    }
    return result;
}

void save_model(const RnnModel& model, const std::string& path) {
    Offsets o = offsets_of(model.dims);
    if (model.params.size() != o.total)
        throw std::invalid_argument("model parameter vector does not match its dimensions");
    binio::Writer w(path);
    w.magic(kModelMagic);
    w.header_line("kind", line_kind_name(model.kind));
    w.header_line("T", std::to_string(model.dims.T));
    w.header_line("d", std::to_string(model.dims.d));
    w.header_line("h1", std::to_string(model.dims.hidden[0]));
    w.header_line("h2", std::to_string(model.dims.hidden[1]));
    w.header_line("h3", std::to_string(model.dims.hidden[2]));
    w.header_line("dense1", std::to_string(model.dims.dense1));
    w.header_line("dense2", std::to_string(model.dims.dense2));
    w.header_line("C", std::to_string(model.dims.classes));
    w.header_line("param_count", std::to_string(model.params.size()));
    w.header_line("seed", std::to_string(model.seed));
    for (double p : model.params) w.f32(static_cast<float>(p));
    if (!w.good()) throw std::runtime_error("failed writing model: " + path);
}

RnnModel load_model(const std::string& path) {
    binio::Reader r(path);
    r.expect_magic(kModelMagic);
    RnnModel m;
    std::size_t param_count = 0;
    const char* expected[] = {"kind", "T",      "d",      "h1", "h2",          "h3",
                              "dense1", "dense2", "C",      "param_count", "seed"};
    for (const char* key : expected) {
        auto [k, v] = r.header_line();
        if (k != key)
            throw FormatError("expected header key '" + std::string(key) + "', got '" + k + "'",
                              r.offset());
        auto as_int = [&]() {
            try {
                return std::stoi(v);
            } catch (...) {
                throw FormatError("bad integer header value '" + v + "'", r.offset());
            }
        };
        if (k == "kind") {
            if (v == "ac") m.kind = LineKind::AC;
            else if (v == "dc") m.kind = LineKind::DC;
            else throw FormatError("unknown kind '" + v + "'", r.offset());
        } else if (k == "T") m.dims.T = as_int();
        else if (k == "d") m.dims.d = as_int();
        else if (k == "h1") m.dims.hidden[0] = as_int();
        else if (k == "h2") m.dims.hidden[1] = as_int();
        else if (k == "h3") m.dims.hidden[2] = as_int();
        else if (k == "dense1") m.dims.dense1 = as_int();
        else if (k == "dense2") m.dims.dense2 = as_int();
        else if (k == "C") m.dims.classes = as_int();
        else if (k == "param_count") param_count = static_cast<std::size_t>(std::stoll(v));
        else if (k == "seed") m.seed = static_cast<std::uint64_t>(std::stoull(v));
    }

    // The head mode is implied by the parameter count: a flattened sequence
    // head has T times more dense1 inputs than a final-state head.
    m.dims.flatten_head = true;
    if (m.dims.param_count() != param_count) {
        m.dims.flatten_head = false;
        if (m.dims.param_count() != param_count)
            throw FormatError("param_count does not match architecture dimensions", r.offset());
    }
    m.dims.validate();

    m.params.resize(param_count);
    for (std::size_t i = 0; i < param_count; ++i) m.params[i] = static_cast<double>(r.f32());
    if (!r.at_eof()) throw FormatError("trailing data after parameters", r.offset());
    return m;
}

} // namespace mivs
