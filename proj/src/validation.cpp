#include "mivs/validation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>

#include "mivs/errors.hpp"
#include "mivs/rng.hpp"

namespace mivs {

namespace {

std::string pct(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v * 100.0);
    return buf;
}

std::vector<double> normalized_window(const LabeledExample& ex, double i_nom_ka) {
    std::vector<double> w(ex.window.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = static_cast<double>(ex.window[i]) / i_nom_ka;
    return w;
}

std::string line_of(const std::string& scenario_id) {
    auto pos = scenario_id.find(':');
    return pos == std::string::npos ? scenario_id : scenario_id.substr(0, pos);
}

} // namespace

ValidationDecision validate(const RnnModel& model, const SampleStream& stream,
                            const RelaySettings& settings, const WindowSpec& window) {
    window.validate();
    auto trip = scan_for_trip(stream, settings);
    if (!trip) throw NotTriggeredError("relay did not trigger; nothing to validate");

    auto t_start = std::chrono::steady_clock::now();

    int t_len = window.T();
    long long start = static_cast<long long>(trip->trigger_index) - window.before_trigger();
    long long end = static_cast<long long>(trip->trigger_index) + window.after_trigger();
    if (start < 0 || end >= static_cast<long long>(stream.size()))
        throw std::runtime_error("window around trigger falls outside the stream");

    // Quantize to float32 first so online decisions match stored windows bit
    // for bit.
    std::vector<double> w;
    w.reserve(static_cast<std::size_t>(t_len) * static_cast<std::size_t>(stream.d()));
    for (long long k = start; k <= end; ++k)
        for (int c = 0; c < stream.d(); ++c)
            w.push_back(static_cast<double>(
                            static_cast<float>(stream.at(static_cast<std::size_t>(k), c))) /
                        settings.i_nom_ka);

    double p = predict_proba(model, w);
    auto t_end = std::chrono::steady_clock::now();

    ValidationDecision d;
    d.trigger = *trip;
    d.probability_fdia = p;
    d.verdict = p >= kDecisionThreshold ? ValidationDecision::Verdict::BlockTrip
                                        : ValidationDecision::Verdict::PermitTrip;
    d.elapsed_s = std::chrono::duration<double>(t_end - t_start).count();
    return d;
}

double MetricsReport::accuracy() const {
    return total() ? static_cast<double>(tp + tn) / static_cast<double>(total()) : 0.0;
}

double MetricsReport::precision() const {
    return (tp + fp) ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
}

double MetricsReport::recall() const {
    return (tp + fn) ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
}

double MetricsReport::f1() const {
    double p = precision(), r = recall();
    return (p + r) > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
}

std::array<double, 4> MetricsReport::confusion_percent() const {
    double faults = static_cast<double>(tn + fp);
    double fdias = static_cast<double>(tp + fn);
    return {faults ? 100.0 * static_cast<double>(tn) / faults : 0.0,
            faults ? 100.0 * static_cast<double>(fp) / faults : 0.0,
            fdias ? 100.0 * static_cast<double>(fn) / fdias : 0.0,
            fdias ? 100.0 * static_cast<double>(tp) / fdias : 0.0};
}

std::string MetricsReport::to_csv() const {
    auto c = confusion_percent();
    std::string s = "metric,value\n";
    s += "accuracy," + pct(accuracy()) + "\n";
    s += "precision," + pct(precision()) + "\n";
    s += "recall," + pct(recall()) + "\n";
    s += "f1," + pct(f1()) + "\n";
    s += "tp," + std::to_string(tp) + "\n";
    s += "fn," + std::to_string(fn) + "\n";
    s += "tn," + std::to_string(tn) + "\n";
    s += "fp," + std::to_string(fp) + "\n";
    s += "confusion,true_case,pred_fault_pct,pred_fdia_pct\n";
    char buf[96];
    std::snprintf(buf, sizeof buf, "confusion,fault,%.2f,%.2f\n", c[0], c[1]);
    s += buf;
    std::snprintf(buf, sizeof buf, "confusion,fdia,%.2f,%.2f\n", c[2], c[3]);
    s += buf;
    for (const auto& [line, rep] : per_line) {
        std::snprintf(buf, sizeof buf, "line,%s,accuracy,%.2f,recall,%.2f,precision,%.2f,f1,%.2f\n",
                      line.c_str(), rep.accuracy() * 100.0, rep.recall() * 100.0,
                      rep.precision() * 100.0, rep.f1() * 100.0);
        s += buf;
    }
    return s;
}

std::string MetricsReport::to_text() const {
    char buf[512];
    auto c = confusion_percent();
    std::snprintf(buf, sizeof buf,
                  "  accuracy %6.1f%%   precision %6.1f%%   recall %6.1f%%   f1 %6.1f%%\n"
                  "  confusion (row-normalized %%):\n"
                  "                 pred fault   pred fdia\n"
                  "    true fault     %7.2f     %7.2f\n"
                  "    true fdia      %7.2f     %7.2f\n"
                  "  counts: tp=%zu fn=%zu tn=%zu fp=%zu\n",
                  accuracy() * 100.0, precision() * 100.0, recall() * 100.0, f1() * 100.0, c[0],
                  c[1], c[2], c[3], tp, fn, tn, fp);
    std::string s = buf;
    for (const auto& [line, rep] : per_line) {
        std::snprintf(buf, sizeof buf, "  [%s] accuracy %6.2f%%  recall %6.2f%%  (n=%zu)\n",
                      line.c_str(), rep.accuracy() * 100.0, rep.recall() * 100.0, rep.total());
        s += buf;
    }
    return s;
}

MetricsReport evaluate(const RnnModel& model, const Dataset& test, double i_nom_ka,
                       bool per_line) {
    if (test.examples.empty()) throw std::invalid_argument("evaluation set is empty");
    if (i_nom_ka <= 0.0) throw std::invalid_argument("i_nom_ka must be positive");
    MetricsReport rep;
    for (const auto& ex : test.examples) {
        double p = predict_proba(model, normalized_window(ex, i_nom_ka));
        bool predicted_fdia = p >= kDecisionThreshold;
        MetricsReport* buckets[2] = {&rep, nullptr};
        if (per_line) buckets[1] = &rep.per_line[line_of(ex.scenario_id)];
        for (MetricsReport* b : buckets) {
            if (!b) continue;
            if (ex.label == 1) {
                predicted_fdia ? ++b->tp : ++b->fn;
            } else {
                predicted_fdia ? ++b->fp : ++b->tn;
            }
        }
    }
    return rep;
}

Dataset with_noise(const Dataset& dataset, double snr_db, std::uint64_t seed) {
    Dataset out = dataset;
    ChannelLayout layout = dataset.kind == LineKind::AC ? ChannelLayout::ac() : ChannelLayout::dc();
    for (std::size_t i = 0; i < out.examples.size(); ++i) {
        SampleStream s;
        s.layout = layout;
        s.fs_hz = dataset.fs_hz;
        s.samples.assign(out.examples[i].window.begin(), out.examples[i].window.end());
        NoiseSpec spec;
        spec.snr_db = snr_db;
        spec.seed = derive_seed(seed, 0x6e, i);
        SampleStream noisy = add_noise(s, spec);
        for (std::size_t j = 0; j < noisy.samples.size(); ++j)
            out.examples[i].window[j] = static_cast<float>(noisy.samples[j]);
    }
    return out;
}

LatencyStats bench_latency(const RnnModel& model, int iterations, std::uint64_t seed) {
    if (iterations < 100) throw std::invalid_argument("latency benchmark needs >= 100 iterations");
    auto n = static_cast<std::size_t>(model.dims.T) * static_cast<std::size_t>(model.dims.d);
    Rng rng(seed);

    constexpr int kWarmup = 100;
    std::vector<double> window(n);
    std::vector<double> times;
    times.reserve(static_cast<std::size_t>(iterations));
    volatile double sink = 0.0;
    for (int i = 0; i < kWarmup + iterations; ++i) {
        for (auto& v : window) v = rng.uniform(-1.5, 1.5);
        auto t0 = std::chrono::steady_clock::now();
        sink = predict_proba(model, window);
        auto t1 = std::chrono::steady_clock::now();
        if (i >= kWarmup) times.push_back(std::chrono::duration<double>(t1 - t0).count());
    }
    (void)sink;

    std::sort(times.begin(), times.end());
    LatencyStats s;
    s.iterations = iterations;
    s.median_s = times[times.size() / 2];
    s.p99_s = times[std::min(times.size() - 1, static_cast<std::size_t>(
                                                   static_cast<double>(times.size()) * 0.99))];
    double acc = 0.0;
    for (double t : times) acc += t;
    s.mean_s = acc / static_cast<double>(times.size());
    return s;
}

} // namespace mivs
