#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace mivs {

enum class LineKind { AC, DC };

inline std::string line_kind_name(LineKind k) { return k == LineKind::AC ? "ac" : "dc"; }

/**
 * Fixed channel layout of a protected line's synchronized measurements.
 *
 * AC: 6 channels, local A,B,C then remote A,B,C.
 * DC: 4 channels, local PP,NP then remote PP,NP.
 * The order is identical across synthesis, datasets, and inference.
 */
struct ChannelLayout {
    LineKind kind = LineKind::AC;

    static ChannelLayout ac() { return {LineKind::AC}; }
    static ChannelLayout dc() { return {LineKind::DC}; }

    int channels() const { return kind == LineKind::AC ? 6 : 4; }
    int pairs() const { return kind == LineKind::AC ? 3 : 2; }

    int local_channel(int pair) const { return pair; }
    int remote_channel(int pair) const { return pairs() + pair; }
    bool is_remote(int ch) const { return ch >= pairs() && ch < channels(); }

    std::string channel_name(int ch) const {
        static const char* ac_names[6] = {"local_A", "local_B", "local_C",
                                          "remote_A", "remote_B", "remote_C"};
        static const char* dc_names[4] = {"local_PP", "local_NP", "remote_PP", "remote_NP"};
        if (ch < 0 || ch >= channels()) throw std::invalid_argument("channel index out of range");
        return kind == LineKind::AC ? ac_names[ch] : dc_names[ch];
    }

    bool operator==(const ChannelLayout& o) const { return kind == o.kind; }
    bool operator!=(const ChannelLayout& o) const { return !(*this == o); }
};

/// Time-major matrix of synchronized local+remote instantaneous current samples (kA).
struct SampleStream {
    ChannelLayout layout;
    double fs_hz = 0.0;
    double t0_s = 0.0;
    std::vector<double> samples; // N x d, time-major

    int d() const { return layout.channels(); }
    std::size_t size() const { return d() ? samples.size() / static_cast<std::size_t>(d()) : 0; }
    bool empty() const { return samples.empty(); }

    double at(std::size_t k, int ch) const { return samples[k * static_cast<std::size_t>(d()) + ch]; }
    double& at(std::size_t k, int ch) { return samples[k * static_cast<std::size_t>(d()) + ch]; }

    double time_at(std::size_t k) const { return t0_s + static_cast<double>(k) / fs_hz; }
};

} // namespace mivs
