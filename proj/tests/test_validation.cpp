#include <doctest.h>

#include <cmath>

#include "mivs/attack.hpp"
#include "mivs/errors.hpp"
#include "mivs/rng.hpp"
#include "mivs/validation.hpp"

using namespace mivs;

TEST_SUITE_BEGIN("validation");

namespace {

RnnModel zero_model(LineKind kind, int T, int d) {
    RnnDims dims;
    dims.T = T;
    dims.d = d;
    dims.hidden = {4, 4, 4};
    dims.dense1 = 4;
    dims.dense2 = 4;
    RnnModel m = RnnModel::init(kind, dims, 1);
    std::fill(m.params.begin(), m.params.end(), 0.0);
    return m;
}

Dataset labeled_set(LineKind kind, int n_fault, int n_fdia, std::uint64_t seed) {
    Dataset ds;
    ds.kind = kind;
    ds.fs_hz = 4000;
    ds.window_ms = kind == LineKind::AC ? 10 : 4;
    ds.T = kind == LineKind::AC ? 40 : 16;
    ds.d = kind == LineKind::AC ? 6 : 4;
    ds.seed = seed;
    Rng rng(seed);
    for (int i = 0; i < n_fault + n_fdia; ++i) {
        LabeledExample ex;
        ex.label = i < n_fault ? 0 : 1;
        ex.scenario_id = (i % 2 ? "lineA:" : "lineB:") + std::to_string(i);
        ex.window.resize(static_cast<std::size_t>(ds.T) * static_cast<std::size_t>(ds.d));
        for (auto& v : ex.window) v = static_cast<float>(rng.uniform(-0.5, 0.5));
        ds.examples.push_back(std::move(ex));
    }
    return ds;
}

} // namespace

TEST_CASE("metric arithmetic recomputes exactly from the confusion counts") {
    MetricsReport r;
    r.tp = 983;
    r.fn = 17;
    r.tn = 995;
    r.fp = 5;
    CHECK(r.total() == 2000);
    CHECK(r.accuracy() == doctest::Approx(0.989).epsilon(1e-12));
    CHECK(r.recall() == doctest::Approx(0.983).epsilon(1e-12));
    CHECK(r.precision() == doctest::Approx(983.0 / 988.0).epsilon(1e-12));
    double p = 983.0 / 988.0, rec = 0.983;
    CHECK(r.f1() == doctest::Approx(2.0 * p * rec / (p + rec)).epsilon(1e-12));
    auto c = r.confusion_percent();
    CHECK(c[0] == doctest::Approx(99.5));
    CHECK(c[3] == doctest::Approx(98.3));
}

TEST_CASE("all-correct and degenerate all-positive classifiers") {
    MetricsReport perfect;
    perfect.tp = 10;
    perfect.tn = 10;
    CHECK(perfect.accuracy() == 1.0);
    CHECK(perfect.precision() == 1.0);
    CHECK(perfect.recall() == 1.0);
    CHECK(perfect.f1() == 1.0);

    MetricsReport allpos;
    allpos.tp = 5;
    allpos.fp = 5;
    CHECK(allpos.accuracy() == 0.5);
    CHECK(allpos.recall() == 1.0);
    CHECK(allpos.precision() == 0.5);
}

TEST_CASE("evaluate tallies the zero model as always-positive at the 0.5 threshold") {
    // p = 0.5 exactly, and BlockTrip is inclusive at the threshold.
    Dataset ds = labeled_set(LineKind::DC, 12, 8, 3);
    RnnModel m = zero_model(LineKind::DC, ds.T, ds.d);
    MetricsReport r = evaluate(m, ds, 0.5);
    CHECK(r.tp == 8);
    CHECK(r.fp == 12);
    CHECK(r.fn == 0);
    CHECK(r.tn == 0);
    CHECK(r.recall() == 1.0);

    CHECK_THROWS_AS(evaluate(m, Dataset{}, 0.5), std::invalid_argument);
}

TEST_CASE("per-line breakdown groups by scenario-id prefix and sums to the total") {
    Dataset ds = labeled_set(LineKind::DC, 10, 10, 4);
    RnnModel m = zero_model(LineKind::DC, ds.T, ds.d);
    MetricsReport r = evaluate(m, ds, 0.5, true);
    REQUIRE(r.per_line.size() == 2);
    std::size_t sum = 0;
    for (const auto& [line, rep] : r.per_line) sum += rep.total();
    CHECK(sum == r.total());
    CHECK(r.per_line.count("lineA") == 1);
    CHECK(r.per_line.count("lineB") == 1);
}

TEST_CASE("csv and text reports carry the metrics") {
    MetricsReport r;
    r.tp = 983;
    r.fn = 17;
    r.tn = 995;
    r.fp = 5;
    std::string csv = r.to_csv();
    CHECK(csv.find("accuracy,98.90") != std::string::npos);
    CHECK(csv.find("recall,98.30") != std::string::npos);
    CHECK(csv.find("confusion,fault,99.50,0.50") != std::string::npos);
    std::string text = r.to_text();
    CHECK(text.find("98.9%") != std::string::npos);
}

TEST_CASE("validate requires a relay trigger") {
    WaveformConfig c;
    SampleStream healthy = synth_prefault(c, ChannelLayout::dc(), 0.2);
    RnnModel m = zero_model(LineKind::DC, 16, 4);
    WindowSpec w = WindowSpec::defaults(LineKind::DC, 4000);
    CHECK_THROWS_AS(validate(m, healthy, RelaySettings::dc(), w), NotTriggeredError);
}

TEST_CASE("validate blocks when the FDIA probability reaches the threshold") {
    WaveformConfig c;
    SampleStream healthy = synth_prefault(c, ChannelLayout::dc(), 0.2);
    AttackSpec spec;
    spec.strategy = AttackStrategy::Additive;
    spec.delta_ka = 0.3;
    spec.t_attack_s = 0.1;
    SampleStream attacked = apply_attack(healthy, spec);

    RnnModel m = zero_model(LineKind::DC, 16, 4); // p = 0.5 exactly
    WindowSpec w = WindowSpec::defaults(LineKind::DC, 4000);
    ValidationDecision d = validate(m, attacked, RelaySettings::dc(), w);
    CHECK(d.probability_fdia == 0.5);
    CHECK(d.verdict == ValidationDecision::Verdict::BlockTrip);
    CHECK(d.elapsed_s >= 0.0);
    CHECK(d.trigger.i_d_ka >= 0.1);
}

TEST_CASE("decisions depend only on the extracted window bytes") {
    WaveformConfig c;
    SampleStream healthy = synth_prefault(c, ChannelLayout::dc(), 0.2);
    AttackSpec spec;
    spec.strategy = AttackStrategy::Additive;
    spec.delta_ka = 0.22;
    spec.t_attack_s = 0.1;
    SampleStream attacked = apply_attack(healthy, spec);

    RnnDims dims;
    dims.T = 16;
    dims.d = 4;
    dims.hidden = {4, 4, 4};
    dims.dense1 = 4;
    dims.dense2 = 4;
    RnnModel m = RnnModel::init(LineKind::DC, dims, 77);
    WindowSpec w = WindowSpec::defaults(LineKind::DC, 4000);
    ValidationDecision d1 = validate(m, attacked, RelaySettings::dc(), w);

    // Appending extra post-window samples must not change the verdict.
    SampleStream longer = attacked;
    for (int i = 0; i < 40; ++i)
        for (int ch = 0; ch < 4; ++ch) longer.samples.push_back(attacked.at(attacked.size() - 1, ch));
    ValidationDecision d2 = validate(m, longer, RelaySettings::dc(), w);
    CHECK(d1.probability_fdia == d2.probability_fdia);
    CHECK((d1.verdict == d2.verdict));
}

TEST_CASE("noise injection is deterministic and leaves shape intact") {
    Dataset ds = labeled_set(LineKind::AC, 5, 5, 9);
    Dataset n1 = with_noise(ds, 40.0, 123);
    Dataset n2 = with_noise(ds, 40.0, 123);
    REQUIRE(n1.count() == ds.count());
    for (std::size_t i = 0; i < ds.count(); ++i) CHECK(n1.examples[i].window == n2.examples[i].window);
    bool changed = false;
    for (std::size_t i = 0; i < ds.examples[0].window.size(); ++i)
        if (n1.examples[0].window[i] != ds.examples[0].window[i]) changed = true;
    CHECK(changed);
}

TEST_CASE("validate and evaluate agree on the same trigger windows") {
    // The online path (stream -> trigger -> window -> verdict) must match the
    // offline path (stored window -> prediction) example for example.
    ScenarioGrid grid = ScenarioGrid::defaults(LineKind::DC, 0, 6, 17);
    RnnDims dims;
    dims.T = grid.window.T();
    dims.d = 4;
    dims.hidden = {8, 8, 8};
    dims.dense1 = 8;
    dims.dense2 = 8;
    RnnModel model = RnnModel::init(LineKind::DC, dims, 5);

    Dataset ds;
    ds.kind = LineKind::DC;
    ds.fs_hz = grid.window.fs_hz;
    ds.window_ms = grid.window.duration_ms;
    ds.T = dims.T;
    ds.d = 4;

    std::vector<ValidationDecision> live;
    for (const auto& desc : enumerate_scenarios(grid)) {
        AttackSpec applied;
        ds.examples.push_back(build_example(grid, desc, &applied));

        WaveformConfig config = grid.profile.waveform;
        config.i_load_ka *= desc.load_scale;
        SampleStream prefault =
            synth_prefault(config, ChannelLayout::dc(), grid.profile.duration_s);
        SampleStream attacked = apply_attack(prefault, applied);
        live.push_back(validate(model, attacked, grid.profile.relay, grid.window));
    }

    MetricsReport rep = evaluate(model, ds, grid.profile.relay.i_nom_ka);
    std::size_t blocked = 0;
    for (std::size_t i = 0; i < live.size(); ++i) {
        if (live[i].verdict == ValidationDecision::Verdict::BlockTrip) ++blocked;
        // Same window bytes, bit-identical probability.
        std::vector<double> w(ds.examples[i].window.size());
        for (std::size_t j = 0; j < w.size(); ++j)
            w[j] = static_cast<double>(ds.examples[i].window[j]) / grid.profile.relay.i_nom_ka;
        CHECK(predict_proba(model, w) == live[i].probability_fdia);
    }
    CHECK(blocked == rep.tp); // blocked fraction equals recall on these examples
}

TEST_CASE("latency benchmark enforces its iteration floor and reports sane stats") {
    RnnModel m = zero_model(LineKind::DC, 16, 4);
    CHECK_THROWS_AS(bench_latency(m, 0), std::invalid_argument);
    CHECK_THROWS_AS(bench_latency(m, 50), std::invalid_argument);
    LatencyStats s = bench_latency(m, 100);
    CHECK(s.iterations == 100);
    CHECK(s.median_s > 0.0);
    CHECK(s.p99_s >= s.median_s);
}

TEST_SUITE_END();
