#pragma once

#include <cstddef>
#include <optional>

#include "mivs/stream.hpp"

namespace mivs {

/**
 * Line current differential relay settings.
 *
 * AC relays trip when the differential current reaches the dual-slope
 * operating current i_op(i_r); DC relays trip when it reaches eta * i_nom.
 * Magnitudes come from a trailing window: RMS scaled to peak-equivalent for
 * AC (one fundamental cycle by default), absolute moving average for DC
 * (2 ms by default).
 */
struct RelaySettings {
    LineKind kind = LineKind::AC;
    double i_d_ka = 0.05;   ///< minimum pickup
    double i_b_ka = 0.585;  ///< dual-slope breakpoint
    double m1 = 0.2;        ///< first slope
    double m2 = 0.4;        ///< second slope
    double eta = 0.2;       ///< DC reliability threshold, in [0.1, 0.25]
    double i_nom_ka = 0.5;  ///< nominal line current
    double mag_window_s = 1.0 / 60.0;

    static RelaySettings ac(double i_nom_ka = 0.5, double f0_hz = 60.0) {
        RelaySettings s;
        s.kind = LineKind::AC;
        s.i_nom_ka = i_nom_ka;
        s.mag_window_s = 1.0 / f0_hz;
        return s;
    }

    static RelaySettings dc(double i_nom_ka = 0.5) {
        RelaySettings s;
        s.kind = LineKind::DC;
        s.i_nom_ka = i_nom_ka;
        s.mag_window_s = 0.002;
        return s;
    }

    void validate() const;

    /// Trailing-window length in samples at a given rate (>= 1).
    std::size_t window_samples(double fs_hz) const;
};

struct TripEvent {
    std::size_t trigger_index = 0; ///< first sample index satisfying the trip condition
    double trigger_time_s = 0.0;
    int pair = 0;                  ///< phase (AC) or pole (DC) pair that tripped first
    double i_d_ka = 0.0;           ///< differential current at the trigger
    double i_r_ka = 0.0;           ///< restraining current at the trigger
};

/**
 * Magnitude of one channel over the trailing window ending at sample k.
 * AC: RMS * sqrt(2) (peak-equivalent). DC: |moving average|.
 * Throws InsufficientHistory when k precedes a full window.
 */
double estimate_magnitude(const SampleStream& stream, int channel, std::size_t k,
                          const RelaySettings& settings);

/// ||I1 + I2|| over the trailing window for one channel pair.
double differential_current(const SampleStream& stream, int pair, std::size_t k,
                            const RelaySettings& settings);

/// ||I1|| + ||I2|| over the trailing window for one channel pair.
double restraining_current(const SampleStream& stream, int pair, std::size_t k,
                           const RelaySettings& settings);

/// Dual-slope operating current i_op(i_r): i_d + m1*i_r up to the breakpoint,
/// then i_d + m1*i_b + m2*(i_r - i_b). AC only.
double operating_current(double i_r_ka, const RelaySettings& settings);

/**
 * Earliest sample and channel pair satisfying the trip criterion, or nullopt.
 * AC: i_d >= i_op(i_r); DC: i_d >= eta * i_nom. Both comparisons inclusive.
 * Ties at equal sample index resolve to the lowest pair index.
 */
std::optional<TripEvent> scan_for_trip(const SampleStream& stream, const RelaySettings& settings);

} // namespace mivs
