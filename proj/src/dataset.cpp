#include "mivs/dataset.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "mivs/binio.hpp"
#include "mivs/errors.hpp"
#include "mivs/rng.hpp"

namespace mivs {

namespace {

constexpr char kDatasetMagic[9] = "MIVSDS1\n";
constexpr std::uint64_t kFaultTag = 0x66;
constexpr std::uint64_t kAttackTag = 0x61;
constexpr std::uint64_t kSplitTag = 0x73;

std::string fmt_double(double v) {
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

double parse_double(const std::string& s, std::size_t offset) {
    double v;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw FormatError("bad numeric header value '" + s + "'", offset);
    return v;
}

std::uint64_t parse_u64(const std::string& s, std::size_t offset) {
    std::uint64_t v;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw FormatError("bad integer header value '" + s + "'", offset);
    return v;
}

// Largest divisor of q not exceeding sqrt(q); factors the per-combination
// budget into impedance x angle grid points.
std::pair<int, int> factor_budget(int q) {
    if (q <= 1) return {std::max(q, 0), q > 0 ? 1 : 0};
    int best = 1;
    for (int k = 1; k * k <= q; ++k) {
        if (q % k == 0) best = k;
    }
    return {q / best, best}; // {n_zf, n_theta}
}

std::vector<double> spaced_points(double max, int n) {
    std::vector<double> out;
    if (n <= 0) return out;
    if (n == 1) return {0.0};
    for (int i = 0; i < n; ++i) out.push_back(max * static_cast<double>(i) / (n - 1));
    return out;
}

std::string scenario_id(const std::string& line, const char* kind, int index) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%05d", index);
    return line + ":" + kind + ":" + buf;
}

} // namespace

std::size_t Dataset::count_label(int label) const {
    std::size_t n = 0;
    for (const auto& e : examples)
        if (e.label == label) ++n;
    return n;
}

ScenarioGrid ScenarioGrid::defaults(LineKind kind, int n_faults, int n_attacks,
                                    std::uint64_t seed) {
    ScenarioGrid g;
    g.profile.kind = kind;
    g.profile.name = kind == LineKind::AC ? "ac1" : "dc1";
    g.profile.relay = kind == LineKind::AC ? RelaySettings::ac() : RelaySettings::dc();
    g.n_faults = n_faults;
    g.n_attacks = n_attacks;
    g.master_seed = seed;
    g.window = WindowSpec::defaults(kind, g.profile.waveform.fs_hz);
    return g;
}

std::vector<ScenarioDescriptor> enumerate_scenarios(const ScenarioGrid& grid) {
    if (grid.n_faults < 0 || grid.n_attacks < 0)
        throw std::invalid_argument("scenario counts must be non-negative");
    LineKind kind = grid.profile.kind;

    std::vector<FaultType> types =
        grid.fault_types.empty() ? fault_types_for(kind) : grid.fault_types;
    std::vector<double> locations = grid.locations;
    if (locations.empty())
        for (int i = 1; i <= 9; ++i) locations.push_back(0.1 * i);
    std::vector<AttackStrategy> families = grid.families;
    if (families.empty()) {
        families = {AttackStrategy::Scale, AttackStrategy::Additive};
        if (kind == LineKind::AC) families.push_back(AttackStrategy::TimeShift);
    }
    if (types.empty() || locations.empty() || families.empty())
        throw std::invalid_argument("scenario grid has an empty dimension");
    for (FaultType t : types)
        if (fault_type_is_ac(t) != (kind == LineKind::AC))
            throw std::invalid_argument("fault type incompatible with grid kind");

    std::vector<ScenarioDescriptor> out;
    out.reserve(static_cast<std::size_t>(grid.n_faults + grid.n_attacks));

    // Fault scenarios: Cartesian core plus seeded top-up to the exact count.
    int n_combo = static_cast<int>(types.size() * locations.size());
    int q = grid.n_faults / n_combo;
    auto [n_zf, n_theta] = factor_budget(q);
    if (kind == LineKind::DC && q > 0) {
        n_zf = q;
        n_theta = 1;
    }
    std::vector<double> zf_points = spaced_points(grid.zf_max_ohm, n_zf);
    std::vector<double> theta_points =
        kind == LineKind::AC ? spaced_points(grid.theta_max_deg, n_theta)
                             : std::vector<double>{0.0};
    if (kind == LineKind::DC && q > 0) theta_points = {0.0};

    int index = 0;
    auto push_fault = [&](FaultType type, double loc, double zf, double theta) {
        ScenarioDescriptor d;
        d.id = scenario_id(grid.profile.name, "fault", index);
        d.label = 0;
        d.sub_seed = derive_seed(grid.master_seed, kFaultTag, static_cast<std::uint64_t>(index));
        Rng rng(d.sub_seed);
        d.load_scale = 1.0 + grid.load_jitter * (2.0 * rng.uniform() - 1.0);
        d.fault.fault_type = type;
        d.fault.zf_ohm = zf;
        d.fault.location_frac = loc;
        d.fault.inception_angle_deg = kind == LineKind::AC ? theta : 0.0;
        d.fault.t_fault_s = grid.profile.t_event_s;
        d.fault.internal = true;
        out.push_back(std::move(d));
        ++index;
    };

    for (FaultType type : types)
        for (double loc : locations)
            for (double zf : zf_points)
                for (double theta : theta_points) push_fault(type, loc, zf, theta);

    int remaining = grid.n_faults - index;
    for (int i = 0; i < remaining; ++i) {
        FaultType type = types[static_cast<std::size_t>(i) % types.size()];
        double loc = locations[(static_cast<std::size_t>(i) / types.size()) % locations.size()];
        Rng rng(derive_seed(grid.master_seed, kFaultTag + 1, static_cast<std::uint64_t>(i)));
        push_fault(type, loc, rng.uniform(0.0, grid.zf_max_ohm),
                   rng.uniform(0.0, grid.theta_max_deg));
    }

    // Attack scenarios: cycle families and channel subsets, seeded magnitudes.
    ChannelLayout layout = kind == LineKind::AC ? ChannelLayout::ac() : ChannelLayout::dc();
    int pairs = layout.pairs();
    for (int i = 0; i < grid.n_attacks; ++i) {
        ScenarioDescriptor d;
        d.id = scenario_id(grid.profile.name, "fdia", i);
        d.label = 1;
        d.sub_seed = derive_seed(grid.master_seed, kAttackTag, static_cast<std::uint64_t>(i));
        Rng rng(d.sub_seed);
        d.load_scale = 1.0 + grid.load_jitter * (2.0 * rng.uniform() - 1.0);
        d.family = families[static_cast<std::size_t>(i) % families.size()];
        int scheme = (i / static_cast<int>(families.size())) % (pairs + 1);
        if (scheme < pairs) {
            d.channels = {layout.remote_channel(scheme)};
        } else {
            for (int p = 0; p < pairs; ++p) d.channels.push_back(layout.remote_channel(p));
        }
        d.side = (d.family == AttackStrategy::TimeShift || rng.uniform() < 0.5) ? 1.0 : -1.0;
        d.sample_u = rng.uniform();
        out.push_back(std::move(d));
    }
    return out;
}

std::string describe_scenario(const ScenarioDescriptor& desc, const AttackSpec* applied) {
    std::string s;
    if (desc.label == 0) {
        s = "category=fault;type=" + fault_type_name(desc.fault.fault_type) +
            ";zf_ohm=" + fmt_double(desc.fault.zf_ohm) +
            ";loc=" + fmt_double(desc.fault.location_frac) +
            ";theta_deg=" + fmt_double(desc.fault.inception_angle_deg) +
            ";t_fault_s=" + fmt_double(desc.fault.t_fault_s);
    } else {
        s = "category=fdia;family=" + attack_strategy_name(desc.family);
        if (applied) {
            switch (applied->strategy) {
                case AttackStrategy::Scale: s += ";alpha=" + fmt_double(applied->alpha); break;
                case AttackStrategy::Additive:
                    s += ";delta_ka=" + fmt_double(applied->delta_ka);
                    break;
                case AttackStrategy::TimeShift:
                    s += ";shift_ms=" + fmt_double(applied->shift_s * 1000.0);
                    break;
            }
            s += ";t_attack_s=" + fmt_double(applied->t_attack_s);
        }
        s += ";channels=";
        for (std::size_t i = 0; i < desc.channels.size(); ++i) {
            if (i) s += '|';
            s += std::to_string(desc.channels[i]);
        }
    }
    s += ";load_scale=" + fmt_double(desc.load_scale);
    return s;
}

namespace {

LabeledExample extract_window(const SampleStream& stream, const TripEvent& trip,
                              const WindowSpec& window, const std::string& id, int label) {
    int t = window.T();
    long long start = static_cast<long long>(trip.trigger_index) - window.before_trigger();
    long long end = static_cast<long long>(trip.trigger_index) + window.after_trigger();
    if (start < 0 || end >= static_cast<long long>(stream.size()))
        throw std::runtime_error("window around trigger falls outside the stream: " + id);

    LabeledExample ex;
    ex.scenario_id = id;
    ex.label = static_cast<std::uint8_t>(label);
    ex.window.reserve(static_cast<std::size_t>(t) * static_cast<std::size_t>(stream.d()));
    for (long long k = start; k <= end; ++k)
        for (int c = 0; c < stream.d(); ++c)
            ex.window.push_back(static_cast<float>(stream.at(static_cast<std::size_t>(k), c)));
    return ex;
}

double sample_bound(const ScenarioGrid& grid, const ScenarioDescriptor& desc) {
    switch (desc.family) {
        case AttackStrategy::Scale:
            return desc.side > 0 ? grid.craft.alpha_bound - 1.0 : grid.craft.alpha_bound + 1.0;
        case AttackStrategy::Additive:
            return grid.craft.delta_bound_pu * grid.profile.relay.i_nom_ka;
        case AttackStrategy::TimeShift:
            // Stay in the monotone half-period so every sampled shift trips.
            return std::min(grid.craft.period_s * 0.5, grid.profile.t_event_s);
    }
    return 0.0;
}

} // namespace

LabeledExample build_example(const ScenarioGrid& grid, const ScenarioDescriptor& desc,
                             AttackSpec* applied_out) {
    grid.window.validate();
    LineKind kind = grid.profile.kind;
    ChannelLayout layout = kind == LineKind::AC ? ChannelLayout::ac() : ChannelLayout::dc();
    WaveformConfig config = grid.profile.waveform;
    config.i_load_ka *= desc.load_scale;
    const RelaySettings& relay = grid.profile.relay;

    // The trigger must leave at least half a window of history before it.
    double min_margin = (grid.window.before_trigger() + 1) / config.fs_hz;
    if (grid.profile.t_event_s < min_margin)
        throw std::invalid_argument("event time leaves less than half a window of pre-event samples");

    if (desc.label == 0) {
        SampleStream stream = synth_fault(config, layout, desc.fault, grid.profile.duration_s);
        stream = apply_limiter(stream, config.i_lim_ka()); // physical currents honor the cap
        auto trip = scan_for_trip(stream, relay);
        if (!trip)
            throw RejectedScenario(desc.id + ": relay did not pick up (" +
                                   describe_scenario(desc, nullptr) + ")");
        return extract_window(stream, *trip, grid.window, desc.id, 0);
    }

    SampleStream prefault = synth_prefault(config, layout, grid.profile.duration_s);
    CraftOptions opts = grid.craft;
    opts.t_attack_s = grid.profile.t_event_s;
    opts.channels = desc.channels;
    if (kind == LineKind::AC) opts.period_s = 1.0 / config.f0_hz;

    AttackSpec minimal;
    try {
        minimal = craft_tripping_attack(prefault, relay, desc.family, opts);
    } catch (const NoSolutionError& e) {
        throw RejectedScenario(desc.id + ": " + e.what());
    }

    // Keep the crafted direction when it matches the descriptor's side;
    // otherwise re-solve restricted to the requested side by reflecting the
    // perturbation and checking it still trips.
    double p_min = minimal.perturbation();
    double bound = sample_bound(grid, desc);
    double p = p_min + desc.sample_u * std::max(0.0, bound - p_min);
    AttackSpec spec;
    spec.strategy = desc.family;
    spec.t_attack_s = opts.t_attack_s;
    spec.channels = desc.channels;
    double side = desc.side;
    if (desc.family == AttackStrategy::Scale) {
        // The minimal solution's side is the cheaper one; sampling keeps the
        // descriptor's side for diversity and verifies the result trips.
        spec.alpha = 1.0 + side * p;
    } else if (desc.family == AttackStrategy::Additive) {
        spec.delta_ka = side * p;
    } else {
        spec.shift_s = p;
    }

    TripEvent trip;
    try {
        trip = verify_attack(prefault, spec, relay);
    } catch (const AttackIneffectiveError&) {
        // Requested side may need a larger perturbation than the minimal one
        // found on the other side; fall back to the verified minimal spec.
        spec = minimal;
        trip = verify_attack(prefault, spec, relay);
    }
    if (applied_out) *applied_out = spec;
    SampleStream attacked = apply_attack(prefault, spec);
    return extract_window(attacked, trip, grid.window, desc.id, 1);
}

namespace {

// Stratified index split shared by split_dataset and generate_dataset.
struct IndexSplit {
    std::vector<std::size_t> train, test, val;
};

IndexSplit split_indices(const std::vector<std::uint8_t>& labels, const SplitSpec& split) {
    if (split.train_fraction <= 0.0 || split.train_fraction >= 1.0)
        throw std::invalid_argument("train_fraction must be in (0, 1)");
    if (split.val_fraction < 0.0 || split.val_fraction >= 1.0)
        throw std::invalid_argument("val_fraction must be in [0, 1)");

    std::vector<std::size_t> by_label[2];
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] > 1) throw std::invalid_argument("labels must be 0 or 1");
        by_label[labels[i]].push_back(i);
    }
    for (int c = 0; c < 2; ++c)
        if (by_label[c].size() < 5)
            throw std::invalid_argument("need at least 5 examples per class to split");

    IndexSplit out;
    for (int c = 0; c < 2; ++c) {
        auto idx = by_label[c];
        Rng rng(derive_seed(split.seed, kSplitTag, static_cast<std::uint64_t>(c)));
        rng.shuffle(idx);
        auto n_train = static_cast<std::size_t>(
            std::llround(split.train_fraction * static_cast<double>(idx.size())));
        n_train = std::min(n_train, idx.size() - 1);
        if (n_train == 0) n_train = 1;
        auto n_val = static_cast<std::size_t>(
            std::llround(split.val_fraction * static_cast<double>(n_train)));
        for (std::size_t i = 0; i < n_train - n_val; ++i) out.train.push_back(idx[i]);
        for (std::size_t i = n_train - n_val; i < n_train; ++i) out.val.push_back(idx[i]);
        for (std::size_t i = n_train; i < idx.size(); ++i) out.test.push_back(idx[i]);
    }
    Rng rng(derive_seed(split.seed, kSplitTag, 2));
    rng.shuffle(out.train);
    rng.shuffle(out.test);
    rng.shuffle(out.val);
    return out;
}

Dataset subset(const Dataset& src, const std::vector<std::size_t>& indices) {
    Dataset out = src;
    out.examples.clear();
    out.examples.reserve(indices.size());
    for (std::size_t i : indices) out.examples.push_back(src.examples[i]);
    return out;
}

} // namespace

SplitResult split_dataset(const Dataset& dataset, const SplitSpec& split) {
    std::vector<std::uint8_t> labels;
    labels.reserve(dataset.count());
    for (const auto& e : dataset.examples) labels.push_back(e.label);
    IndexSplit idx = split_indices(labels, split);
    SplitResult r;
    r.train = subset(dataset, idx.train);
    r.test = subset(dataset, idx.test);
    r.val = subset(dataset, idx.val);
    return r;
}

void save_dataset(const Dataset& dataset, const std::string& path) {
    auto elems = static_cast<std::size_t>(dataset.T) * static_cast<std::size_t>(dataset.d);
    for (const auto& e : dataset.examples) {
        if (e.window.size() != elems)
            throw std::invalid_argument("example window shape differs from dataset T x d");
        if (e.label > 1) throw std::invalid_argument("labels must be 0 or 1");
    }
    binio::Writer w(path);
    w.magic(kDatasetMagic);
    w.header_line("kind", line_kind_name(dataset.kind));
    w.header_line("fs_hz", fmt_double(dataset.fs_hz));
    w.header_line("window_ms", fmt_double(dataset.window_ms));
    w.header_line("T", std::to_string(dataset.T));
    w.header_line("d", std::to_string(dataset.d));
    w.header_line("count", std::to_string(dataset.examples.size()));
    w.header_line("seed", std::to_string(dataset.seed));
    for (const auto& e : dataset.examples) {
        w.byte(e.label);
        w.f32_array(e.window.data(), e.window.size());
    }
    if (!w.good()) throw std::runtime_error("failed writing dataset: " + path);
}

Dataset load_dataset(const std::string& path) {
    binio::Reader r(path);
    r.expect_magic(kDatasetMagic);
    Dataset ds;
    std::size_t count = 0;
    const char* expected[] = {"kind", "fs_hz", "window_ms", "T", "d", "count", "seed"};
    for (const char* key : expected) {
        auto [k, v] = r.header_line();
        if (k != key) throw FormatError("expected header key '" + std::string(key) + "', got '" + k + "'",
                                        r.offset());
        if (k == "kind") {
            if (v == "ac") ds.kind = LineKind::AC;
            else if (v == "dc") ds.kind = LineKind::DC;
            else throw FormatError("unknown kind '" + v + "'", r.offset());
        } else if (k == "fs_hz") ds.fs_hz = parse_double(v, r.offset());
        else if (k == "window_ms") ds.window_ms = parse_double(v, r.offset());
        else if (k == "T") ds.T = static_cast<int>(parse_u64(v, r.offset()));
        else if (k == "d") ds.d = static_cast<int>(parse_u64(v, r.offset()));
        else if (k == "count") count = parse_u64(v, r.offset());
        else if (k == "seed") ds.seed = parse_u64(v, r.offset());
    }
    int expect_d = ds.kind == LineKind::AC ? 6 : 4;
    if (ds.d != expect_d) throw FormatError("channel count does not match kind", r.offset());
    if (ds.T < 2) throw FormatError("window length must be >= 2", r.offset());

    auto elems = static_cast<std::size_t>(ds.T) * static_cast<std::size_t>(ds.d);
    ds.examples.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        ds.examples[i].label = r.byte();
        if (ds.examples[i].label > 1) throw FormatError("label byte must be 0 or 1", r.offset());
        ds.examples[i].window.resize(elems);
        r.f32_array(ds.examples[i].window.data(), elems);
    }
    if (!r.at_eof()) throw FormatError("trailing data after final record", r.offset());
    return ds;
}

Dataset pool_datasets(const std::vector<Dataset>& datasets) {
    if (datasets.empty()) throw std::invalid_argument("nothing to pool");
    Dataset out = datasets.front();
    for (std::size_t i = 1; i < datasets.size(); ++i) {
        const Dataset& d = datasets[i];
        if (d.kind != out.kind || d.T != out.T || d.d != out.d || d.fs_hz != out.fs_hz ||
            d.window_ms != out.window_ms)
            throw std::invalid_argument("datasets have mismatched shape and cannot be pooled");
        out.examples.insert(out.examples.end(), d.examples.begin(), d.examples.end());
    }
    return out;
}

bool window_retriggers(const Dataset& dataset, std::size_t index, const RelaySettings& settings) {
    const LabeledExample& ex = dataset.examples.at(index);
    SampleStream s;
    s.layout = dataset.kind == LineKind::AC ? ChannelLayout::ac() : ChannelLayout::dc();
    s.fs_hz = dataset.fs_hz;
    s.samples.assign(ex.window.begin(), ex.window.end());

    // The stored window can be shorter than the relay's magnitude window;
    // shrink the estimation window so the replay fits.
    RelaySettings replay = settings;
    double max_window_s = static_cast<double>(dataset.T / 2) / dataset.fs_hz;
    replay.mag_window_s = std::min(replay.mag_window_s, max_window_s);
    return scan_for_trip(s, replay).has_value();
}

std::string sidecar_header() { return "scenario_id,label,kind,params"; }

GenerationResult generate_dataset(const ScenarioGrid& grid, const SplitSpec& split, int threads) {
    if (threads < 1) throw std::invalid_argument("threads must be >= 1");
    std::vector<ScenarioDescriptor> descriptors = enumerate_scenarios(grid);
    std::size_t n = descriptors.size();

    struct Slot {
        bool ok = false;
        LabeledExample example;
        std::string params;
        std::string reject_reason;
    };
    std::vector<Slot> slots(n);

    auto work = [&](std::size_t begin, std::size_t step) {
        for (std::size_t i = begin; i < n; i += step) {
            try {
                AttackSpec applied;
                slots[i].example = build_example(grid, descriptors[i],
                                                 descriptors[i].label ? &applied : nullptr);
                slots[i].params = describe_scenario(descriptors[i],
                                                    descriptors[i].label ? &applied : nullptr);
                slots[i].ok = true;
            } catch (const RejectedScenario& e) {
                slots[i].reject_reason = e.what();
            }
        }
    };
    if (threads == 1) {
        work(0, 1);
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t)
            pool.emplace_back(work, static_cast<std::size_t>(t), static_cast<std::size_t>(threads));
        for (auto& th : pool) th.join();
    }

    Dataset all;
    all.kind = grid.profile.kind;
    all.fs_hz = grid.window.fs_hz;
    all.window_ms = grid.window.duration_ms;
    all.T = grid.window.T();
    all.d = grid.profile.kind == LineKind::AC ? 6 : 4;
    all.seed = grid.master_seed;

    GenerationResult result;
    std::vector<std::string> params;
    for (std::size_t i = 0; i < n; ++i) {
        if (slots[i].ok) {
            all.examples.push_back(std::move(slots[i].example));
            params.push_back(std::move(slots[i].params));
            ++result.log.built;
        } else {
            ++result.log.rejected;
            result.log.reject_reasons.push_back(slots[i].reject_reason);
        }
    }

    // Self-consistency: a sample of stored windows must still trigger the
    // relay when replayed.
    for (std::size_t i = 0; i < all.count(); i += 32) {
        if (!window_retriggers(all, i, grid.profile.relay))
            throw std::runtime_error("stored window failed relay replay self-check: " +
                                     all.examples[i].scenario_id);
    }

    std::vector<std::uint8_t> labels;
    labels.reserve(all.count());
    for (const auto& e : all.examples) labels.push_back(e.label);
    SplitSpec s = split;
    s.val_fraction = 0.0; // validation is carved at training time
    if (s.seed == 0) s.seed = grid.master_seed;
    IndexSplit idx = split_indices(labels, s);

    result.train = subset(all, idx.train);
    result.test = subset(all, idx.test);
    for (std::size_t i : idx.train) {
        result.train_sidecar.push_back(all.examples[i].scenario_id + "," +
                                       std::to_string(all.examples[i].label) + "," +
                                       line_kind_name(all.kind) + "," + params[i]);
    }
    for (std::size_t i : idx.test) {
        result.test_sidecar.push_back(all.examples[i].scenario_id + "," +
                                      std::to_string(all.examples[i].label) + "," +
                                      line_kind_name(all.kind) + "," + params[i]);
    }
    return result;
}

} // namespace mivs
