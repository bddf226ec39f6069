#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mivs/stream.hpp"

namespace mivs {

/**
 * Architecture: three stacked recurrent layers (tanh), a flatten stage over
 * the last layer's full hidden sequence, two tanh dense layers, and a 2-class
 * softmax head. dense1 = 0 auto-sizes toward the default parameter budget so
 * the model stays at its intended scale for any window length.
 */
struct RnnDims {
    int T = 0;
    int d = 0;
    std::array<int, 3> hidden{16, 16, 16};
    int dense1 = 0;
    int dense2 = 32;
    int classes = 2;
    bool flatten_head = true; ///< false: classify from the final hidden state only

    static constexpr int kParamBudget = 14817; ///< default sizing target

    int flatten_size() const { return flatten_head ? T * hidden[2] : hidden[2]; }

    /// Auto-sizes dense1 when it is 0. Must be called before building a model.
    void resolve();

    std::size_t param_count() const;
    void validate() const;
};

struct RnnModel {
    LineKind kind = LineKind::AC;
    RnnDims dims;
    std::uint64_t seed = 0;
    std::vector<double> params;

    /// Seeded uniform init in [-1/sqrt(fan_in), +1/sqrt(fan_in)], zero biases.
    static RnnModel init(LineKind kind, RnnDims dims, std::uint64_t seed);

    std::size_t param_count() const { return params.size(); }
};

/// Cached activations from a forward pass, consumed by the backward pass.
struct ForwardCache {
    std::array<std::vector<double>, 3> h; // hidden sequences, each T x h
    std::vector<double> flat;
    std::vector<double> a1, a2;
    std::array<double, 2> logits{};
    std::array<double, 2> probs{};
};

/// Softmax class probabilities for one normalized T x d window.
std::array<double, 2> forward(const RnnModel& model, std::span<const double> window,
                              ForwardCache* cache = nullptr);

/// Probability that the window is an FDIA (class 1).
double predict_proba(const RnnModel& model, std::span<const double> window);

/// Mean binary cross-entropy: -(1/N) sum[y ln p + (1-y) ln(1-p)], with p
/// clamped away from 0 and 1 by 1e-12.
double bce_loss(std::span<const double> prob_fdia, std::span<const std::uint8_t> labels);

/// Exact gradient of the mean BCE over the batch w.r.t. every parameter,
/// backpropagated through the dense stack and through time in each layer.
std::vector<double> backward_bptt(const RnnModel& model,
                                  const std::vector<std::vector<double>>& windows,
                                  const std::vector<std::uint8_t>& labels);

struct TrainConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    int batch = 32;
    int epochs = 100;
    int patience = 10;          ///< early-stop patience on validation loss
    double val_fraction = 0.1;  ///< carved from the train set by callers
    std::uint64_t seed = 42;
    double clip_norm = 5.0;     ///< global gradient-norm cap

    void validate() const;
};

struct AdamState {
    std::vector<double> m, v;
    std::uint64_t step = 0;

    static AdamState for_model(const RnnModel& model);
};

/// Standard bias-corrected Adam update; increments the step counter.
void adam_step(RnnModel& model, const std::vector<double>& grads, AdamState& state,
               const TrainConfig& config);

struct EpochRecord {
    int epoch = 0;
    double train_loss = 0.0;
    double train_acc = 0.0;
    double val_loss = 0.0;
    double val_acc = 0.0;
};

struct FitResult {
    RnnModel model; ///< best-validation-loss checkpoint
    std::vector<EpochRecord> curve;
    int best_epoch = -1;
};

/// Mini-batch training with a seeded shuffling schedule. Throws
/// TrainingDiverged on non-finite loss.
FitResult fit(const RnnModel& model, const std::vector<std::vector<double>>& train_x,
              const std::vector<std::uint8_t>& train_y,
              const std::vector<std::vector<double>>& val_x,
              const std::vector<std::uint8_t>& val_y, const TrainConfig& config);

/// Mean loss and accuracy of the model over a labeled set.
std::pair<double, double> evaluate_loss_acc(const RnnModel& model,
                                            const std::vector<std::vector<double>>& xs,
                                            const std::vector<std::uint8_t>& ys);

void save_model(const RnnModel& model, const std::string& path);
RnnModel load_model(const std::string& path);

} // namespace mivs
