#include "mivs/relay.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "mivs/errors.hpp"

namespace mivs {

void RelaySettings::validate() const {
    if (i_d_ka <= 0.0) throw std::invalid_argument("i_d_ka must be positive");
    if (i_b_ka <= 0.0) throw std::invalid_argument("i_b_ka must be positive");
    if (!(0.0 < m1 && m1 < m2)) throw std::invalid_argument("slopes must satisfy 0 < m1 < m2");
    if (eta < 0.1 || eta > 0.25) throw std::invalid_argument("eta must be in [0.1, 0.25]");
    if (i_nom_ka <= 0.0) throw std::invalid_argument("i_nom_ka must be positive");
    if (mag_window_s <= 0.0) throw std::invalid_argument("mag_window_s must be positive");
}

std::size_t RelaySettings::window_samples(double fs_hz) const {
    auto w = static_cast<std::size_t>(std::llround(mag_window_s * fs_hz));
    return w < 1 ? 1 : w;
}

namespace {

// Magnitude of a window given its running sum and sum of squares.
double window_magnitude(LineKind kind, double sum, double sum_sq, std::size_t w) {
    double n = static_cast<double>(w);
    if (kind == LineKind::AC) return std::sqrt(sum_sq / n) * std::sqrt(2.0);
    return std::fabs(sum / n);
}

void check_history(const SampleStream& stream, std::size_t k, std::size_t w) {
    if (k >= stream.size()) throw std::invalid_argument("sample index out of range");
    if (k + 1 < w)
        throw InsufficientHistory("magnitude estimation needs " + std::to_string(w) +
                                  " samples of history");
}

} // namespace

double estimate_magnitude(const SampleStream& stream, int channel, std::size_t k,
                          const RelaySettings& settings) {
    if (channel < 0 || channel >= stream.d()) throw std::invalid_argument("channel out of range");
    std::size_t w = settings.window_samples(stream.fs_hz);
    check_history(stream, k, w);
    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t j = k + 1 - w; j <= k; ++j) {
        double v = stream.at(j, channel);
        sum += v;
        sum_sq += v * v;
    }
    return window_magnitude(settings.kind, sum, sum_sq, w);
}

double differential_current(const SampleStream& stream, int pair, std::size_t k,
                            const RelaySettings& settings) {
    if (pair < 0 || pair >= stream.layout.pairs()) throw std::invalid_argument("pair out of range");
    std::size_t w = settings.window_samples(stream.fs_hz);
    check_history(stream, k, w);
    int lc = stream.layout.local_channel(pair);
    int rc = stream.layout.remote_channel(pair);
    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t j = k + 1 - w; j <= k; ++j) {
        double v = stream.at(j, lc) + stream.at(j, rc);
        sum += v;
        sum_sq += v * v;
    }
    return window_magnitude(settings.kind, sum, sum_sq, w);
}

double restraining_current(const SampleStream& stream, int pair, std::size_t k,
                           const RelaySettings& settings) {
    if (pair < 0 || pair >= stream.layout.pairs()) throw std::invalid_argument("pair out of range");
    return estimate_magnitude(stream, stream.layout.local_channel(pair), k, settings) +
           estimate_magnitude(stream, stream.layout.remote_channel(pair), k, settings);
}

double operating_current(double i_r_ka, const RelaySettings& settings) {
    if (i_r_ka < 0.0) throw std::invalid_argument("restraining current must be non-negative");
    if (i_r_ka <= settings.i_b_ka) return settings.i_d_ka + settings.m1 * i_r_ka;
    return settings.i_d_ka + settings.m1 * settings.i_b_ka + settings.m2 * (i_r_ka - settings.i_b_ka);
}

std::optional<TripEvent> scan_for_trip(const SampleStream& stream, const RelaySettings& settings) {
    settings.validate();
    std::size_t n = stream.size();
    std::size_t w = settings.window_samples(stream.fs_hz);
    if (n < w) throw std::invalid_argument("stream shorter than the magnitude window");

    int pairs = stream.layout.pairs();
    bool ac = settings.kind == LineKind::AC;
    double dc_threshold = settings.eta * settings.i_nom_ka;

    // Prefix sums per pair: the differential needs the pair-sum series, the
    // restraint the per-terminal series. AC magnitudes use squares (RMS), DC
    // magnitudes raw sums (mean).
    std::size_t np = static_cast<std::size_t>(pairs);
    std::vector<std::vector<double>> diff(np, std::vector<double>(n + 1, 0.0));
    std::vector<std::vector<double>> local(np, std::vector<double>(n + 1, 0.0));
    std::vector<std::vector<double>> remote(np, std::vector<double>(n + 1, 0.0));
    for (int p = 0; p < pairs; ++p) {
        int lc = stream.layout.local_channel(p);
        int rc = stream.layout.remote_channel(p);
        auto& a = diff[static_cast<std::size_t>(p)];
        auto& dl = local[static_cast<std::size_t>(p)];
        auto& dr = remote[static_cast<std::size_t>(p)];
        for (std::size_t k = 0; k < n; ++k) {
            double vl = stream.at(k, lc);
            double vr = stream.at(k, rc);
            double vs = vl + vr;
            if (ac) {
                a[k + 1] = a[k] + vs * vs;
                dl[k + 1] = dl[k] + vl * vl;
                dr[k + 1] = dr[k] + vr * vr;
            } else {
                a[k + 1] = a[k] + vs;
                dl[k + 1] = dl[k] + vl;
                dr[k + 1] = dr[k] + vr;
            }
        }
    }

    for (std::size_t k = w - 1; k < n; ++k) {
        for (int p = 0; p < pairs; ++p) {
            std::size_t ip = static_cast<std::size_t>(p);
            std::size_t lo = k + 1 - w;
            double dw = diff[ip][k + 1] - diff[ip][lo];
            double lw = local[ip][k + 1] - local[ip][lo];
            double rw = remote[ip][k + 1] - remote[ip][lo];
            double i_d, i_r;
            if (ac) {
                i_d = window_magnitude(LineKind::AC, 0.0, dw, w);
                i_r = window_magnitude(LineKind::AC, 0.0, lw, w) +
                      window_magnitude(LineKind::AC, 0.0, rw, w);
            } else {
                i_d = window_magnitude(LineKind::DC, dw, 0.0, w);
                i_r = window_magnitude(LineKind::DC, lw, 0.0, w) +
                      window_magnitude(LineKind::DC, rw, 0.0, w);
            }
            bool trips = ac ? (i_d >= operating_current(i_r, settings)) : (i_d >= dc_threshold);
            if (trips) {
                TripEvent e;
                e.trigger_index = k;
                e.trigger_time_s = stream.time_at(k);
                e.pair = p;
                e.i_d_ka = i_d;
                e.i_r_ka = i_r;
                return e;
            }
        }
    }
    return std::nullopt;
}

} // namespace mivs
