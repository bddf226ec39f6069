#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mivs/stream.hpp"

namespace mivs {

/**
 * Parametric surrogate plant for a two-terminal protected line.
 *
 * Source strengths z1/z2, line impedance z_line and the impedance base turn a
 * fault scenario into terminal fault-current amplitudes; the inverter cap
 * limits both to i_lim_pu * i_nom_ka. Amplitudes in kA, impedances per-unit
 * except z_base_ohm and the scenario's fault impedance.
 */
struct WaveformConfig {
    double fs_hz = 4000.0;      ///< sampling rate
    double f0_hz = 60.0;        ///< fundamental (AC only)
    double i_load_ka = 0.3;     ///< pre-fault load current (peak for AC, constant for DC)
    double i_nom_ka = 0.5;      ///< nominal line current
    double i_lim_pu = 1.5;      ///< inverter current cap, per-unit of i_nom_ka
    double z1 = 0.1;            ///< source strength behind terminal 1 (p.u.)
    double z2 = 0.1;            ///< source strength behind terminal 2 (p.u.)
    double z_line = 0.05;       ///< line impedance (p.u.)
    double z_base_ohm = 100.0;  ///< impedance base for fault-impedance conversion
    double psi_deg = -80.0;     ///< fault-current phase lag (AC)
    double tau_ac_s = 0.02;     ///< AC decaying-offset time constant
    double tau_dc_s = 0.001;    ///< DC fault rise time constant
    double ripple_pu = 0.0;     ///< DC ripple amplitude, per-unit of i_nom_ka

    double i_lim_ka() const { return i_lim_pu * i_nom_ka; }
};

enum class FaultType {
    // AC
    AG, BG, CG, AB, BC, CA, ABG, BCG, CAG, ABC, ABCG,
    // DC
    PP_NP, PP_G, NP_G,
};

std::string fault_type_name(FaultType t);
FaultType parse_fault_type(const std::string& name);
bool fault_type_is_ac(FaultType t);

/// Channel pairs (phase/pole indices) carrying fault components for a fault type.
std::vector<int> faulted_pairs(FaultType t);

/// All fault types valid for a layout, in a fixed enumeration order.
std::vector<FaultType> fault_types_for(LineKind kind);

struct FaultScenario {
    FaultType fault_type = FaultType::AG;
    double zf_ohm = 0.0;             ///< fault impedance, in [0, 200]
    double location_frac = 0.5;      ///< fraction of line length from the relay, in (0, 1)
    double inception_angle_deg = 0;  ///< point-on-wave at inception (AC), in [0, 180]
    double t_fault_s = 0.1;          ///< fault inception time (before angle offset)
    bool internal = true;            ///< internal vs external fault

    /// Effective inception instant; the inception angle shifts it within a cycle.
    double inception_time_s(double f0_hz) const;
};

struct NoiseSpec {
    std::optional<double> snr_db;
    std::uint64_t seed = 0;
};

/// Terminal fault-current amplitudes produced by the surrogate plant (capped).
struct FaultAmplitudes {
    double i_f1_ka = 0.0;
    double i_f2_ka = 0.0;
};
FaultAmplitudes fault_amplitudes(const WaveformConfig& config, const FaultScenario& scenario);

/**
 * Healthy-state stream: remote channels are the exact negation of local ones,
 * so every per-channel differential is identically zero.
 */
SampleStream synth_prefault(const WaveformConfig& config, const ChannelLayout& layout,
                            double duration_s);

/**
 * Fault stream. Pre-inception samples equal synth_prefault output. Internal
 * faults add capped fault components at both terminals (remote component
 * reverses sign relative to the pre-fault mirror, so the differential rises);
 * external faults raise the through current while remote stays the exact
 * negation of local. Waveforms are continuous at the inception instant.
 */
SampleStream synth_fault(const WaveformConfig& config, const ChannelLayout& layout,
                         const FaultScenario& scenario, double duration_s);

/// Clamps every sample to [-i_lim_ka, +i_lim_ka]. Idempotent.
SampleStream apply_limiter(const SampleStream& stream, double i_lim_ka);

/**
 * Additive white Gaussian noise at the requested SNR, scaled per channel to
 * that channel's signal power. No spec value returns the input unchanged.
 * Deterministic under the spec's seed.
 */
SampleStream add_noise(const SampleStream& stream, const NoiseSpec& spec);

} // namespace mivs
