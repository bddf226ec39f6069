#include "mivs/attack.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mivs/errors.hpp"

namespace mivs {

std::string attack_strategy_name(AttackStrategy s) {
    switch (s) {
        case AttackStrategy::Scale: return "scale";
        case AttackStrategy::Additive: return "add";
        case AttackStrategy::TimeShift: return "tsa";
    }
    throw std::invalid_argument("unknown attack strategy");
}

AttackStrategy parse_attack_strategy(const std::string& name) {
    if (name == "scale") return AttackStrategy::Scale;
    if (name == "add" || name == "additive") return AttackStrategy::Additive;
    if (name == "tsa" || name == "timeshift") return AttackStrategy::TimeShift;
    throw std::invalid_argument("unknown attack strategy: " + name);
}

bool AttackSpec::is_identity() const {
    switch (strategy) {
        case AttackStrategy::Scale: return alpha == 1.0;
        case AttackStrategy::Additive: return delta_ka == 0.0;
        case AttackStrategy::TimeShift: return shift_s == 0.0;
    }
    return true;
}

double AttackSpec::perturbation() const {
    switch (strategy) {
        case AttackStrategy::Scale: return std::fabs(alpha - 1.0);
        case AttackStrategy::Additive: return std::fabs(delta_ka);
        case AttackStrategy::TimeShift: return std::fabs(shift_s);
    }
    return 0.0;
}

AttackSpec AttackSpec::scaled(double factor) const {
    AttackSpec s = *this;
    switch (strategy) {
        case AttackStrategy::Scale: s.alpha = 1.0 + (alpha - 1.0) * factor; break;
        case AttackStrategy::Additive: s.delta_ka = delta_ka * factor; break;
        case AttackStrategy::TimeShift: s.shift_s = shift_s * factor; break;
    }
    return s;
}

namespace {

std::vector<int> resolve_channels(const SampleStream& stream, const std::vector<int>& requested) {
    std::vector<int> out;
    if (requested.empty()) {
        for (int p = 0; p < stream.layout.pairs(); ++p)
            out.push_back(stream.layout.remote_channel(p));
        return out;
    }
    for (int ch : requested) {
        if (ch < 0 || ch >= stream.d()) throw std::invalid_argument("attack channel out of range");
        if (!stream.layout.is_remote(ch))
            throw std::invalid_argument("attacks may target only remote channels");
        out.push_back(ch);
    }
    return out;
}

} // namespace

SampleStream apply_attack(const SampleStream& stream, const AttackSpec& spec) {
    std::vector<int> channels = resolve_channels(stream, spec.channels);
    if (stream.empty()) throw std::invalid_argument("cannot attack an empty stream");
    double t_end = stream.time_at(stream.size() - 1);
    if (spec.t_attack_s < stream.t0_s || spec.t_attack_s > t_end)
        throw std::invalid_argument("attack onset outside the stream");
    if (spec.strategy == AttackStrategy::TimeShift) {
        if (spec.shift_s < 0.0) throw std::invalid_argument("time shift must be non-negative");
        if (spec.t_attack_s - spec.shift_s < stream.t0_s)
            throw std::invalid_argument("time shift exceeds available history");
    }

    SampleStream out = stream;
    double shift_samples = spec.shift_s * stream.fs_hz;
    for (std::size_t k = 0; k < stream.size(); ++k) {
        if (stream.time_at(k) < spec.t_attack_s) continue;
        for (int ch : channels) {
            switch (spec.strategy) {
                case AttackStrategy::Scale:
                    out.at(k, ch) = spec.alpha * stream.at(k, ch);
                    break;
                case AttackStrategy::Additive:
                    out.at(k, ch) = stream.at(k, ch) + spec.delta_ka;
                    break;
                case AttackStrategy::TimeShift: {
                    // Fractional shifts interpolate linearly between the
                    // original (unattacked) samples.
                    double q = static_cast<double>(k) - shift_samples;
                    if (q < 0.0) q = 0.0;
                    auto j0 = static_cast<std::size_t>(q);
                    std::size_t j1 = std::min(j0 + 1, stream.size() - 1);
                    double frac = q - static_cast<double>(j0);
                    out.at(k, ch) = (1.0 - frac) * stream.at(j0, ch) + frac * stream.at(j1, ch);
                    break;
                }
            }
        }
    }
    return out;
}

namespace {

struct SearchSide {
    double sign;  // perturbation direction
    double bound; // maximum perturbation magnitude
};

AttackSpec spec_from(AttackStrategy family, double sign, double p, const CraftOptions& opts) {
    AttackSpec s;
    s.strategy = family;
    s.t_attack_s = opts.t_attack_s;
    s.channels = opts.channels;
    switch (family) {
        case AttackStrategy::Scale: s.alpha = 1.0 + sign * p; break;
        case AttackStrategy::Additive: s.delta_ka = sign * p; break;
        case AttackStrategy::TimeShift: s.shift_s = p; break;
    }
    return s;
}

} // namespace

AttackSpec craft_tripping_attack(const SampleStream& prefault_stream, const RelaySettings& settings,
                                 AttackStrategy family, const CraftOptions& opts) {
    if (scan_for_trip(prefault_stream, settings))
        throw std::invalid_argument("input stream already trips the relay");
    if (opts.grid_points < 2) throw std::invalid_argument("grid_points must be >= 2");

    std::vector<SearchSide> sides;
    switch (family) {
        case AttackStrategy::Scale:
            sides = {{+1.0, opts.alpha_bound - 1.0}, {-1.0, opts.alpha_bound + 1.0}};
            break;
        case AttackStrategy::Additive: {
            double bound = opts.delta_bound_pu * settings.i_nom_ka;
            sides = {{+1.0, bound}, {-1.0, bound}};
            break;
        }
        case AttackStrategy::TimeShift: {
            // One fundamental period; shifts cannot reach before stream start.
            double bound = std::min(opts.period_s, opts.t_attack_s - prefault_stream.t0_s);
            sides = {{+1.0, bound}};
            break;
        }
    }

    auto trips = [&](double sign, double p) {
        AttackSpec s = spec_from(family, sign, p, opts);
        return scan_for_trip(apply_attack(prefault_stream, s), settings).has_value();
    };

    bool found_any = false;
    double best_p = 0.0, best_sign = 1.0;
    for (const SearchSide& side : sides) {
        // Coarse scan for the first tripping bracket, then bisect inside it.
        double lo = 0.0, hi = -1.0;
        for (int i = 1; i <= opts.grid_points; ++i) {
            double p = side.bound * static_cast<double>(i) / opts.grid_points;
            if (trips(side.sign, p)) {
                hi = p;
                break;
            }
            lo = p;
        }
        if (hi < 0.0) continue;
        while (hi - lo > opts.rel_tol * hi) {
            double mid = 0.5 * (lo + hi);
            if (trips(side.sign, mid)) hi = mid;
            else lo = mid;
        }
        if (!found_any || hi < best_p) {
            found_any = true;
            best_p = hi;
            best_sign = side.sign;
        }
    }
    if (!found_any)
        throw NoSolutionError("no " + attack_strategy_name(family) +
                              " perturbation within bounds trips the relay");

    AttackSpec result = spec_from(family, best_sign, best_p, opts);
    verify_attack(prefault_stream, result, settings); // must trip by construction
    return result;
}

TripEvent verify_attack(const SampleStream& stream, const AttackSpec& spec,
                        const RelaySettings& settings) {
    SampleStream attacked = apply_attack(stream, spec);
    auto trip = scan_for_trip(attacked, settings);
    if (!trip) throw AttackIneffectiveError("attack does not trip the relay");
    return *trip;
}

} // namespace mivs
