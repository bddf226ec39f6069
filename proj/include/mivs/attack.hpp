#pragma once

#include <vector>

#include "mivs/relay.hpp"
#include "mivs/stream.hpp"

namespace mivs {

/// How the remote measurement stream is manipulated. Local channels are
/// trusted and never touched.
enum class AttackStrategy { Scale, Additive, TimeShift };

std::string attack_strategy_name(AttackStrategy s);
AttackStrategy parse_attack_strategy(const std::string& name);

struct AttackSpec {
    AttackStrategy strategy = AttackStrategy::Scale;
    double alpha = 1.0;      ///< Scale factor (1 = identity)
    double delta_ka = 0.0;   ///< Additive offset (0 = identity)
    double shift_s = 0.0;    ///< Time shift (0 = identity)
    double t_attack_s = 0.0; ///< onset time
    std::vector<int> channels; ///< targeted remote channels; empty = all remote

    bool is_identity() const;

    /// |alpha - 1|, |delta| or |shift| depending on the strategy.
    double perturbation() const;

    /// Returns a copy with the perturbation scaled by the given factor.
    AttackSpec scaled(double factor) const;
};

/**
 * Replaces the targeted remote channels from the onset onward:
 * Scale: alpha * I2; Additive: I2 + delta; TimeShift: I2(t - shift), read from
 * the original stream with linear interpolation between samples.
 * Local channels are bit-identical to the input.
 */
SampleStream apply_attack(const SampleStream& stream, const AttackSpec& spec);

struct CraftOptions {
    double t_attack_s = 0.1;
    std::vector<int> channels;    ///< empty = all remote channels
    double rel_tol = 1e-3;        ///< bisection relative tolerance
    int grid_points = 64;         ///< coarse bracket scan resolution
    double alpha_bound = 10.0;    ///< alpha searched in [-alpha_bound, alpha_bound]
    double delta_bound_pu = 10.0; ///< delta searched in [-bound, bound] * i_nom
    double period_s = 1.0 / 60.0; ///< time shifts searched in [0, period_s]
};

/**
 * Minimal-perturbation attack in the given family: the smallest |alpha - 1|,
 * |delta| or |shift| that makes the relay trip, found by a coarse bracket scan
 * followed by bisection, then verified against the relay. Both perturbation
 * signs are searched where applicable and the smaller winner is returned.
 * Throws NoSolutionError when nothing inside the bounds trips, and
 * invalid_argument when the input stream already trips.
 */
AttackSpec craft_tripping_attack(const SampleStream& prefault_stream, const RelaySettings& settings,
                                 AttackStrategy family, const CraftOptions& opts = {});

/// Applies the spec and scans the relay; throws AttackIneffectiveError when it
/// does not trip. Used as the dataset-generation gate.
TripEvent verify_attack(const SampleStream& stream, const AttackSpec& spec,
                        const RelaySettings& settings);

} // namespace mivs
