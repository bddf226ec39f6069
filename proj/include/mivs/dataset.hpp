#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "mivs/attack.hpp"
#include "mivs/relay.hpp"
#include "mivs/signal.hpp"
#include "mivs/stream.hpp"

namespace mivs {

/**
 * Classifier input window: T samples centered on the relay trigger, spanning
 * [k* - ceil(T/2) + 1, k* + floor(T/2)]. Windows must lie fully inside the
 * stream; there is no padding.
 */
struct WindowSpec {
    double duration_ms = 10.0;
    double fs_hz = 4000.0;

    static WindowSpec defaults(LineKind kind, double fs_hz) {
        return {kind == LineKind::AC ? 10.0 : 4.0, fs_hz};
    }

    int T() const {
        return static_cast<int>(std::max<long long>(0, std::llround(duration_ms * fs_hz / 1000.0)));
    }
    int before_trigger() const { return (T() + 1) / 2 - 1; }
    int after_trigger() const { return T() / 2; }

    void validate() const {
        if (fs_hz <= 0.0) throw std::invalid_argument("window fs_hz must be positive");
        if (T() < 2) throw std::invalid_argument("window must span at least 2 samples");
    }
};

/// One training/testing record: raw instantaneous samples (kA) plus label.
/// Label 0 = genuine fault, 1 = FDIA.
struct LabeledExample {
    std::vector<float> window; // T x d, time-major
    std::uint8_t label = 0;
    std::string scenario_id;
};

struct Dataset {
    LineKind kind = LineKind::AC;
    double fs_hz = 4000.0;
    double window_ms = 10.0;
    int T = 0;
    int d = 0;
    std::uint64_t seed = 0;
    std::vector<LabeledExample> examples;

    std::size_t count() const { return examples.size(); }
    std::size_t count_label(int label) const;
};

/// One protected line: plant surrogate, relay settings, and event placement.
struct LineProfile {
    std::string name = "line";
    LineKind kind = LineKind::AC;
    WaveformConfig waveform;
    RelaySettings relay;
    double duration_s = 0.2;
    double t_event_s = 0.1; ///< fault inception / attack onset
};

/**
 * Deterministic scenario enumeration: faults cover a Cartesian grid over
 * fault type x location x fault impedance x inception angle (topped up with
 * seeded draws when the requested count is not a multiple of the grid);
 * attack scenarios cycle strategy families and channel subsets with seeded
 * perturbation magnitudes. Everything derives from the master seed.
 */
struct ScenarioGrid {
    LineProfile profile;
    int n_faults = 1000;
    int n_attacks = 1000;
    std::uint64_t master_seed = 42;
    WindowSpec window{10.0, 4000.0};

    std::vector<FaultType> fault_types;  ///< empty = all for the line kind
    std::vector<double> locations;       ///< empty = {0.1 .. 0.9}
    double zf_max_ohm = 200.0;
    double theta_max_deg = 180.0;

    std::vector<AttackStrategy> families; ///< empty = all appliable for the kind
    CraftOptions craft;
    double load_jitter = 0.3; ///< per-scenario load scaling, uniform in [1-j, 1+j]

    static ScenarioGrid defaults(LineKind kind, int n_faults, int n_attacks,
                                 std::uint64_t seed);
};

struct ScenarioDescriptor {
    std::string id;
    int label = 0; ///< 0 fault, 1 FDIA
    std::uint64_t sub_seed = 0;
    double load_scale = 1.0;

    FaultScenario fault; // label 0

    AttackStrategy family = AttackStrategy::Scale; // label 1
    double sample_u = 0.0; ///< position between minimal and bound perturbation
    double side = 1.0;     ///< perturbation direction
    std::vector<int> channels;
};

std::vector<ScenarioDescriptor> enumerate_scenarios(const ScenarioGrid& grid);

/// Human-readable parameter string for the sidecar CSV.
std::string describe_scenario(const ScenarioDescriptor& desc, const AttackSpec* applied);

/**
 * Runs synthesis + relay (+ attack crafting for FDIAs) for one descriptor and
 * extracts the centered window. Throws RejectedScenario when the relay never
 * triggers; the caller logs those rather than dropping them silently.
 * `applied_out`, when non-null, receives the concrete attack spec.
 */
LabeledExample build_example(const ScenarioGrid& grid, const ScenarioDescriptor& desc,
                             AttackSpec* applied_out = nullptr);

struct SplitSpec {
    double train_fraction = 0.8;
    double val_fraction = 0.0; ///< carved out of the train share
    std::uint64_t seed = 0;
};

struct SplitResult {
    Dataset train;
    Dataset test;
    Dataset val; ///< empty unless val_fraction > 0
};

/// Stratified, seeded, disjoint and exhaustive split. Requires >= 5 examples
/// per class.
SplitResult split_dataset(const Dataset& dataset, const SplitSpec& split);

void save_dataset(const Dataset& dataset, const std::string& path);
Dataset load_dataset(const std::string& path);

/// Concatenates datasets with identical kind/fs/window shape, preserving
/// scenario ids so pooled models can still be evaluated per line.
Dataset pool_datasets(const std::vector<Dataset>& datasets);

/// Replays a stored window through the relay (with the magnitude window
/// shortened to fit inside it) and reports whether a trigger occurs.
bool window_retriggers(const Dataset& dataset, std::size_t index, const RelaySettings& settings);

struct GenerationLog {
    std::size_t built = 0;
    std::size_t rejected = 0;
    std::vector<std::string> reject_reasons;
};

struct GenerationResult {
    Dataset train;
    Dataset test;
    std::vector<std::string> train_sidecar; ///< CSV rows aligned with train.examples
    std::vector<std::string> test_sidecar;
    GenerationLog log;
};

/// Full pipeline: enumerate, build (optionally in parallel, output order fixed
/// by enumeration order), self-check a sample of windows, split, and emit
/// sidecar rows.
GenerationResult generate_dataset(const ScenarioGrid& grid, const SplitSpec& split,
                                  int threads = 1);

/// Sidecar CSV header: scenario_id,label,kind,params
std::string sidecar_header();

} // namespace mivs
