#pragma once

#include <map>
#include <optional>
#include <string>

#include "mivs/dataset.hpp"
#include "mivs/nn.hpp"
#include "mivs/relay.hpp"
#include "mivs/signal.hpp"

namespace mivs {

/**
 * Supervisory verdict for one relay trigger. The trip is blocked exactly when
 * the predicted FDIA probability reaches the fixed 0.5 threshold.
 */
struct ValidationDecision {
    enum class Verdict { PermitTrip, BlockTrip };
    Verdict verdict = Verdict::PermitTrip;
    double probability_fdia = 0.0;
    double elapsed_s = 0.0; ///< window extraction + inference wall time
    TripEvent trigger;
};

constexpr double kDecisionThreshold = 0.5;

/**
 * Runs the relay on the stream, extracts the centered window at the trigger,
 * normalizes by i_nom and classifies it. Window samples are quantized to
 * float32 first so online decisions match stored training windows exactly.
 * Throws NotTriggeredError when the relay never picks up; the validation
 * layer is defined only post-trigger.
 */
ValidationDecision validate(const RnnModel& model, const SampleStream& stream,
                            const RelaySettings& settings, const WindowSpec& window);

/// Confusion counts and derived metrics. FDIA is the positive class:
/// TP/FN count detected/missed attacks, TN/FP correctly kept/blocked faults.
struct MetricsReport {
    std::size_t tp = 0, fn = 0, tn = 0, fp = 0;

    std::size_t total() const { return tp + fn + tn + fp; }
    double accuracy() const;
    double precision() const;
    double recall() const;
    double f1() const;

    /// Row-normalized confusion percentages {fault->fault, fault->fdia,
    /// fdia->fault, fdia->fdia}.
    std::array<double, 4> confusion_percent() const;

    std::map<std::string, MetricsReport> per_line; ///< keyed by scenario-id prefix

    std::string to_csv() const;
    std::string to_text() const;
};

/// Classifies every example (windows normalized by i_nom) and tallies the
/// confusion counts; per-line breakdown is grouped by the scenario-id prefix
/// before the first ':' when ids are present.
MetricsReport evaluate(const RnnModel& model, const Dataset& test, double i_nom_ka,
                       bool per_line = false);

/// Evaluation-time measurement noise: each window is treated as a short
/// stream and perturbed at the given SNR with a per-example seed.
Dataset with_noise(const Dataset& dataset, double snr_db, std::uint64_t seed);

struct LatencyStats {
    double median_s = 0.0;
    double p99_s = 0.0;
    double mean_s = 0.0;
    int iterations = 0;
};

/// Single-thread wall-clock statistics over randomized windows; 100 warm-up
/// inferences are excluded. Requires iterations >= 100.
LatencyStats bench_latency(const RnnModel& model, int iterations, std::uint64_t seed = 1);

} // namespace mivs
