#include "mivs/signal.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mivs/rng.hpp"

namespace mivs {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kDcRippleHz = 360.0; // converter-side ripple surrogate

// Phase offsets for A, B, C in radians.
constexpr double kPhaseOffset[3] = {0.0, -2.0 * kPi / 3.0, 2.0 * kPi / 3.0};

void check_config(const WaveformConfig& c, const ChannelLayout& layout) {
    if (c.fs_hz <= 0.0) throw std::invalid_argument("fs_hz must be positive");
    if (c.i_nom_ka <= 0.0) throw std::invalid_argument("i_nom_ka must be positive");
    if (c.i_lim_pu < 1.0) throw std::invalid_argument("i_lim_pu must be >= 1");
    if (layout.kind == LineKind::AC) {
        if (c.f0_hz <= 0.0) throw std::invalid_argument("f0_hz must be positive for AC");
        if (c.fs_hz < 10.0 * c.f0_hz)
            throw std::invalid_argument("fs_hz below Nyquist floor (need >= 10 * f0_hz)");
    }
}

// Local-side healthy current for one pair at time t. Remote is its negation.
double prefault_local(const WaveformConfig& c, LineKind kind, int pair, double t) {
    if (kind == LineKind::AC) {
        return c.i_load_ka * std::sin(2.0 * kPi * c.f0_hz * t + kPhaseOffset[pair]);
    }
    double ripple = c.ripple_pu * c.i_nom_ka * std::sin(2.0 * kPi * kDcRippleHz * t);
    double level = c.i_load_ka + ripple;
    return pair == 0 ? level : -level; // PP carries +, NP carries -
}

// DC pole polarity: fault current pushes PP up and NP down.
double pole_sign(int pair) { return pair == 0 ? 1.0 : -1.0; }

} // namespace

double FaultScenario::inception_time_s(double f0_hz) const {
    if (!fault_type_is_ac(fault_type) || f0_hz <= 0.0) return t_fault_s;
    return t_fault_s + inception_angle_deg / (360.0 * f0_hz);
}

std::string fault_type_name(FaultType t) {
    switch (t) {
        case FaultType::AG: return "A-G";
        case FaultType::BG: return "B-G";
        case FaultType::CG: return "C-G";
        case FaultType::AB: return "A-B";
        case FaultType::BC: return "B-C";
        case FaultType::CA: return "C-A";
        case FaultType::ABG: return "A-B-G";
        case FaultType::BCG: return "B-C-G";
        case FaultType::CAG: return "C-A-G";
        case FaultType::ABC: return "A-B-C";
        case FaultType::ABCG: return "A-B-C-G";
        case FaultType::PP_NP: return "PP-NP";
        case FaultType::PP_G: return "PP-G";
        case FaultType::NP_G: return "NP-G";
    }
    throw std::invalid_argument("unknown fault type");
}

FaultType parse_fault_type(const std::string& name) {
    for (LineKind kind : {LineKind::AC, LineKind::DC}) {
        for (FaultType t : fault_types_for(kind)) {
            if (fault_type_name(t) == name) return t;
        }
    }
    throw std::invalid_argument("unknown fault type: " + name);
}

bool fault_type_is_ac(FaultType t) {
    return t != FaultType::PP_NP && t != FaultType::PP_G && t != FaultType::NP_G;
}

std::vector<int> faulted_pairs(FaultType t) {
    switch (t) {
        case FaultType::AG: return {0};
        case FaultType::BG: return {1};
        case FaultType::CG: return {2};
        case FaultType::AB: case FaultType::ABG: return {0, 1};
        case FaultType::BC: case FaultType::BCG: return {1, 2};
        case FaultType::CA: case FaultType::CAG: return {0, 2};
        case FaultType::ABC: case FaultType::ABCG: return {0, 1, 2};
        case FaultType::PP_NP: return {0, 1};
        case FaultType::PP_G: return {0};
        case FaultType::NP_G: return {1};
    }
    throw std::invalid_argument("unknown fault type");
}

std::vector<FaultType> fault_types_for(LineKind kind) {
    if (kind == LineKind::AC) {
        return {FaultType::AG, FaultType::BG, FaultType::CG, FaultType::AB,
                FaultType::BC, FaultType::CA, FaultType::ABG, FaultType::BCG,
                FaultType::CAG, FaultType::ABC, FaultType::ABCG};
    }
    return {FaultType::PP_NP, FaultType::PP_G, FaultType::NP_G};
}

FaultAmplitudes fault_amplitudes(const WaveformConfig& config, const FaultScenario& scenario) {
    double zf_pu = scenario.zf_ohm / config.z_base_ohm;
    double lambda = scenario.location_frac;
    double i_lim = config.i_lim_ka();
    FaultAmplitudes a;
    a.i_f1_ka = std::min(i_lim, config.i_nom_ka / (config.z1 + lambda * config.z_line + zf_pu));
    a.i_f2_ka = std::min(i_lim, config.i_nom_ka / (config.z2 + (1.0 - lambda) * config.z_line + zf_pu));
    return a;
}

SampleStream synth_prefault(const WaveformConfig& config, const ChannelLayout& layout,
                            double duration_s) {
    check_config(config, layout);
    if (duration_s <= 0.0) throw std::invalid_argument("duration_s must be positive");

    SampleStream s;
    s.layout = layout;
    s.fs_hz = config.fs_hz;
    s.t0_s = 0.0;
    auto n = static_cast<std::size_t>(std::llround(duration_s * config.fs_hz));
    if (n < 1) n = 1;
    int d = layout.channels();
    int pairs = layout.pairs();
    s.samples.resize(n * static_cast<std::size_t>(d));
    for (std::size_t k = 0; k < n; ++k) {
        double t = s.time_at(k);
        for (int p = 0; p < pairs; ++p) {
            double local = prefault_local(config, layout.kind, p, t);
            s.at(k, layout.local_channel(p)) = local;
            s.at(k, layout.remote_channel(p)) = -local;
        }
    }
    return s;
}

SampleStream synth_fault(const WaveformConfig& config, const ChannelLayout& layout,
                         const FaultScenario& scenario, double duration_s) {
    if (fault_type_is_ac(scenario.fault_type) != (layout.kind == LineKind::AC))
        throw std::invalid_argument("fault type incompatible with channel layout");
    if (scenario.zf_ohm < 0.0 || scenario.zf_ohm > 200.0)
        throw std::invalid_argument("zf_ohm must be in [0, 200]");
    if (scenario.location_frac <= 0.0 || scenario.location_frac >= 1.0)
        throw std::invalid_argument("location_frac must be in (0, 1)");
    if (scenario.inception_angle_deg < 0.0 || scenario.inception_angle_deg > 180.0)
        throw std::invalid_argument("inception_angle_deg must be in [0, 180]");

    SampleStream s = synth_prefault(config, layout, duration_s);

    double t_f = scenario.inception_time_s(config.f0_hz);
    if (scenario.t_fault_s <= 0.0 || t_f >= duration_s)
        throw std::invalid_argument("fault inception leaves no pre-fault margin inside the stream");

    FaultAmplitudes amp = fault_amplitudes(config, scenario);

    // External faults: through current rises on the faulted pairs, but both
    // terminals see the same current, so remote stays the exact negation.
    double zf_pu = scenario.zf_ohm / config.z_base_ohm;
    double i_through =
        std::min(config.i_lim_ka(), config.i_nom_ka / (config.z1 + config.z_line + zf_pu));

    std::vector<int> pairs = faulted_pairs(scenario.fault_type);
    double omega = 2.0 * kPi * config.f0_hz;
    double psi = config.psi_deg * kPi / 180.0;

    for (std::size_t k = 0; k < s.size(); ++k) {
        double t = s.time_at(k);
        if (t < t_f) continue;
        double dt = t - t_f;
        for (int p : pairs) {
            int lc = s.layout.local_channel(p);
            int rc = s.layout.remote_channel(p);
            if (layout.kind == LineKind::AC) {
                // Sinusoid at lag psi plus a decaying offset anchored so the
                // component starts from zero at t_f.
                double steady = std::sin(omega * t + kPhaseOffset[p] + psi);
                double offset = std::sin(omega * t_f + kPhaseOffset[p] + psi) *
                                std::exp(-dt / config.tau_ac_s);
                double shape = steady - offset;
                if (scenario.internal) {
                    s.at(k, lc) += amp.i_f1_ka * shape;
                    s.at(k, rc) += amp.i_f2_ka * shape;
                } else {
                    s.at(k, lc) += i_through * shape;
                    s.at(k, rc) = -s.at(k, lc);
                }
            } else {
                double rise = 1.0 - std::exp(-dt / config.tau_dc_s);
                double sign = pole_sign(p);
                if (scenario.internal) {
                    s.at(k, lc) += sign * amp.i_f1_ka * rise;
                    s.at(k, rc) += sign * amp.i_f2_ka * rise;
                } else {
                    s.at(k, lc) += sign * i_through * rise;
                    s.at(k, rc) = -s.at(k, lc);
                }
            }
        }
    }
    return s;
}

SampleStream apply_limiter(const SampleStream& stream, double i_lim_ka) {
    if (i_lim_ka <= 0.0) throw std::invalid_argument("i_lim_ka must be positive");
    SampleStream out = stream;
    for (double& v : out.samples) v = std::clamp(v, -i_lim_ka, i_lim_ka);
    return out;
}

SampleStream add_noise(const SampleStream& stream, const NoiseSpec& spec) {
    if (stream.empty()) throw std::invalid_argument("cannot add noise to an empty stream");
    if (!spec.snr_db) return stream;
    if (!std::isfinite(*spec.snr_db)) throw std::invalid_argument("snr_db must be finite");

    int d = stream.d();
    std::size_t n = stream.size();

    // Per-channel signal power over the whole stream.
    std::vector<double> sigma(static_cast<std::size_t>(d), 0.0);
    for (int c = 0; c < d; ++c) {
        double acc = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            double v = stream.at(k, c);
            acc += v * v;
        }
        double power = acc / static_cast<double>(n);
        sigma[static_cast<std::size_t>(c)] = std::sqrt(power / std::pow(10.0, *spec.snr_db / 10.0));
    }

    SampleStream out = stream;
    Rng rng(spec.seed);
    for (std::size_t k = 0; k < n; ++k) {
        for (int c = 0; c < d; ++c) {
            out.at(k, c) += sigma[static_cast<std::size_t>(c)] * rng.normal();
        }
    }
    return out;
}

} // namespace mivs
