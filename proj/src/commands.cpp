#include "mivs/commands.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "mivs/errors.hpp"
#include "mivs/rng.hpp"

namespace mivs::cmd {

namespace {

namespace fs = std::filesystem;

std::string fmt(double v) {
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

void ensure_parent_dir(const std::string& path) {
    fs::path p(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

void write_text(const std::string& path, const std::string& text) {
    ensure_parent_dir(path);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write: " + path);
    out << text;
}

LineKind kind_from(const RunConfig& config) {
    const std::string& k = config.get("dataset.kind");
    if (k == "ac") return LineKind::AC;
    if (k == "dc") return LineKind::DC;
    throw std::invalid_argument("dataset.kind must be 'ac' or 'dc', got '" + k + "'");
}

std::vector<std::string> split_list(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep))
        if (!item.empty()) out.push_back(item);
    return out;
}

double resolve_i_nom(const RunConfig& config) {
    double v = config.get_double("train.i_nom_ka");
    return v > 0.0 ? v : config.get_double("signal.i_nom_ka");
}

std::string curve_csv(const std::vector<EpochRecord>& curve) {
    std::string s = "epoch,train_loss,train_acc,val_loss,val_acc\n";
    for (const auto& r : curve) {
        s += std::to_string(r.epoch) + "," + fmt(r.train_loss) + "," + fmt(r.train_acc) + "," +
             fmt(r.val_loss) + "," + fmt(r.val_acc) + "\n";
    }
    return s;
}

std::string model_summary(const RnnModel& m) {
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "model: kind=%s T=%d d=%d hidden=%d/%d/%d dense=%d/%d head=%s params=%zu",
                  line_kind_name(m.kind).c_str(), m.dims.T, m.dims.d, m.dims.hidden[0],
                  m.dims.hidden[1], m.dims.hidden[2], m.dims.dense1, m.dims.dense2,
                  m.dims.flatten_head ? "flatten" : "last", m.param_count());
    return buf;
}

void attach_sidecar_ids(Dataset& ds, const std::string& sidecar_path) {
    std::ifstream in(sidecar_path);
    if (!in) return; // sidecar is optional
    std::string line;
    std::getline(in, line); // header
    std::size_t i = 0;
    while (std::getline(in, line) && i < ds.examples.size()) {
        auto comma = line.find(',');
        if (comma != std::string::npos) ds.examples[i].scenario_id = line.substr(0, comma);
        ++i;
    }
}

std::string default_sidecar_path(const std::string& data_path) {
    if (data_path.size() > 3 && data_path.ends_with(".ds"))
        return data_path.substr(0, data_path.size() - 3) + ".csv";
    return data_path + ".csv";
}

} // namespace

RunConfig CommonArgs::resolve() const {
    RunConfig config = RunConfig::defaults();
    if (!config_path.empty()) config.merge_file(config_path);
    for (const auto& o : overrides) config.set(o);
    return config;
}

LineProfile profile_from_config(const RunConfig& config) {
    LineProfile p;
    p.kind = kind_from(config);
    p.name = config.get("dataset.line_name");
    if (p.name.empty()) p.name = line_kind_name(p.kind) + "1";

    p.waveform.fs_hz = config.get_double("signal.fs_hz");
    p.waveform.f0_hz = config.get_double("signal.f0_hz");
    p.waveform.i_load_ka = config.get_double("signal.i_load_ka");
    p.waveform.i_nom_ka = config.get_double("signal.i_nom_ka");
    p.waveform.i_lim_pu = config.get_double("signal.i_lim_pu");
    p.waveform.z1 = config.get_double("signal.z1");
    p.waveform.z2 = config.get_double("signal.z2");
    p.waveform.z_line = config.get_double("signal.z_line");
    p.waveform.z_base_ohm = config.get_double("signal.z_base_ohm");
    p.waveform.psi_deg = config.get_double("signal.psi_deg");
    p.waveform.tau_ac_s = config.get_double("signal.tau_ac_s");
    p.waveform.tau_dc_s = config.get_double("signal.tau_dc_s");
    p.waveform.ripple_pu = config.get_double("signal.ripple_pu");

    p.relay = p.kind == LineKind::AC ? RelaySettings::ac(p.waveform.i_nom_ka, p.waveform.f0_hz)
                                     : RelaySettings::dc(p.waveform.i_nom_ka);
    p.relay.i_d_ka = config.get_double("relay.i_d_ka");
    p.relay.i_b_ka = config.get_double("relay.i_b_ka");
    p.relay.m1 = config.get_double("relay.m1");
    p.relay.m2 = config.get_double("relay.m2");
    p.relay.eta = config.get_double("relay.eta");
    double w = config.get_double("relay.mag_window_s");
    if (w > 0.0) p.relay.mag_window_s = w;

    p.duration_s = config.get_double("dataset.duration_s");
    p.t_event_s = config.get_double("dataset.t_event_s");
    return p;
}

ScenarioGrid grid_from_config(const RunConfig& config) {
    ScenarioGrid g;
    g.profile = profile_from_config(config);
    g.n_faults = config.get_int("dataset.faults");
    g.n_attacks = config.get_int("dataset.attacks");
    g.master_seed = config.get_u64("dataset.seed");
    g.load_jitter = config.get_double("dataset.load_jitter");

    double window_ms = config.get_double("dataset.window_ms");
    g.window = WindowSpec::defaults(g.profile.kind, g.profile.waveform.fs_hz);
    if (window_ms > 0.0) g.window.duration_ms = window_ms;

    g.craft.alpha_bound = config.get_double("attack.alpha_bound");
    g.craft.delta_bound_pu = config.get_double("attack.delta_bound_pu");
    g.craft.rel_tol = config.get_double("attack.rel_tol");
    g.craft.grid_points = config.get_int("attack.grid_points");
    return g;
}

void dataset_to_arrays(const Dataset& ds, double i_nom_ka, std::vector<std::vector<double>>& xs,
                       std::vector<std::uint8_t>& ys) {
    if (i_nom_ka <= 0.0) throw std::invalid_argument("normalization i_nom_ka must be positive");
    for (const auto& ex : ds.examples) {
        std::vector<double> w(ex.window.size());
        for (std::size_t i = 0; i < w.size(); ++i)
            w[i] = static_cast<double>(ex.window[i]) / i_nom_ka;
        xs.push_back(std::move(w));
        ys.push_back(ex.label);
    }
}

void carve_validation(std::vector<std::vector<double>>& xs, std::vector<std::uint8_t>& ys,
                      double val_fraction, std::uint64_t seed,
                      std::vector<std::vector<double>>& val_x, std::vector<std::uint8_t>& val_y) {
    val_x.clear();
    val_y.clear();
    if (val_fraction <= 0.0) return;
    std::vector<std::size_t> by_label[2];
    for (std::size_t i = 0; i < ys.size(); ++i) by_label[ys[i] ? 1 : 0].push_back(i);

    std::vector<bool> to_val(ys.size(), false);
    for (int c = 0; c < 2; ++c) {
        Rng rng(derive_seed(seed, 0x76, static_cast<std::uint64_t>(c)));
        rng.shuffle(by_label[c]);
        auto n_val = static_cast<std::size_t>(
            std::llround(val_fraction * static_cast<double>(by_label[c].size())));
        n_val = std::min(n_val, by_label[c].empty() ? 0 : by_label[c].size() - 1);
        for (std::size_t i = 0; i < n_val; ++i) to_val[by_label[c][i]] = true;
    }

    std::vector<std::vector<double>> keep_x;
    std::vector<std::uint8_t> keep_y;
    for (std::size_t i = 0; i < ys.size(); ++i) {
        if (to_val[i]) {
            val_x.push_back(std::move(xs[i]));
            val_y.push_back(ys[i]);
        } else {
            keep_x.push_back(std::move(xs[i]));
            keep_y.push_back(ys[i]);
        }
    }
    xs = std::move(keep_x);
    ys = std::move(keep_y);
}

int cmd_gen(const GenArgs& args) {
    if (args.out.empty()) throw std::invalid_argument("gen needs an output path prefix (--out)");
    RunConfig config = args.resolve();
    ScenarioGrid grid = grid_from_config(config);

    SplitSpec split;
    split.train_fraction = config.get_double("dataset.train_fraction");
    split.seed = grid.master_seed;

    int threads = config.get_int("dataset.threads");
    GenerationResult result = generate_dataset(grid, split, threads);

    ensure_parent_dir(args.out);
    save_dataset(result.train, args.out + ".train.ds");
    save_dataset(result.test, args.out + ".test.ds");

    std::string train_csv = sidecar_header() + "\n";
    for (const auto& row : result.train_sidecar) train_csv += row + "\n";
    write_text(args.out + ".train.csv", train_csv);
    std::string test_csv = sidecar_header() + "\n";
    for (const auto& row : result.test_sidecar) test_csv += row + "\n";
    write_text(args.out + ".test.csv", test_csv);

    std::string log = "built=" + std::to_string(result.log.built) +
                      "\nrejected=" + std::to_string(result.log.rejected) + "\n";
    for (const auto& r : result.log.reject_reasons) log += "reject: " + r + "\n";
    write_text(args.out + ".log", log);
    config.echo_to(args.out + ".config");

    // Verify the files round-trip before declaring success.
    Dataset check = load_dataset(args.out + ".train.ds");
    if (check.count() != result.train.count())
        throw std::runtime_error("dataset round-trip verification failed");

    std::cout << "gen: " << result.train.count() << " train / " << result.test.count()
              << " test examples (" << result.log.rejected << " rejected scenarios) -> "
              << args.out << ".{train,test}.ds\n";
    return 0;
}

namespace {

struct PreparedTraining {
    std::vector<std::vector<double>> train_x, val_x;
    std::vector<std::uint8_t> train_y, val_y;
    LineKind kind;
    int T = 0, d = 0;
};

PreparedTraining prepare_training(const TrainArgs& args, const RunConfig& config) {
    if (args.data.empty()) throw std::invalid_argument("train needs at least one --data file");
    PreparedTraining p;
    Dataset first;
    for (std::size_t i = 0; i < args.data.size(); ++i) {
        Dataset ds = load_dataset(args.data[i]);
        if (i == 0) {
            first = ds;
            p.kind = ds.kind;
            p.T = ds.T;
            p.d = ds.d;
        } else if (ds.kind != p.kind || ds.T != p.T || ds.d != p.d) {
            throw std::invalid_argument("dataset " + args.data[i] +
                                        " has a different shape; cannot pool");
        }
        double i_nom = i < args.i_nom_ka.size() ? args.i_nom_ka[i] : resolve_i_nom(config);
        dataset_to_arrays(ds, i_nom, p.train_x, p.train_y);
    }
    carve_validation(p.train_x, p.train_y, config.get_double("train.val_fraction"),
                     config.get_u64("train.seed"), p.val_x, p.val_y);
    return p;
}

RnnDims dims_from_config(const RunConfig& config, int T, int d) {
    RnnDims dims;
    dims.T = T;
    dims.d = d;
    dims.hidden = {config.get_int("train.hidden1"), config.get_int("train.hidden2"),
                   config.get_int("train.hidden3")};
    dims.dense1 = config.get_int("train.dense1");
    dims.dense2 = config.get_int("train.dense2");
    const std::string& head = config.get("train.head");
    if (head == "flatten") dims.flatten_head = true;
    else if (head == "last") dims.flatten_head = false;
    else throw std::invalid_argument("train.head must be 'flatten' or 'last'");
    return dims;
}

TrainConfig train_config_from(const RunConfig& config) {
    TrainConfig tc;
    tc.lr = config.get_double("train.lr");
    tc.batch = config.get_int("train.batch");
    tc.epochs = config.get_int("train.epochs");
    tc.patience = config.get_int("train.patience");
    tc.val_fraction = config.get_double("train.val_fraction");
    tc.seed = config.get_u64("train.seed");
    tc.clip_norm = config.get_double("train.clip_norm");
    return tc;
}

} // namespace

int cmd_train(const TrainArgs& args) {
    if (args.out.empty()) throw std::invalid_argument("train needs an output path (--out)");
    RunConfig config = args.resolve();
    PreparedTraining prep = prepare_training(args, config);
    TrainConfig tc = train_config_from(config);

    FitResult best;
    std::string table;
    if (args.grid_search) {
        // Sweep hidden size x dense1 x learning rate; keep the best val accuracy.
        table = "hidden,dense1,lr,val_loss,val_acc,epochs\n";
        double best_acc = -1.0;
        for (const std::string& hs : split_list(args.gs_hidden, ',')) {
            for (const std::string& ds1 : split_list(args.gs_dense1, ',')) {
                for (const std::string& lrs : split_list(args.gs_lr, ',')) {
                    RnnDims dims = dims_from_config(config, prep.T, prep.d);
                    int h = std::stoi(hs);
                    dims.hidden = {h, h, h};
                    dims.dense1 = std::stoi(ds1);
                    TrainConfig tc_i = tc;
                    tc_i.lr = std::stod(lrs);
                    RnnModel init = RnnModel::init(prep.kind, dims, tc.seed);
                    FitResult r =
                        fit(init, prep.train_x, prep.train_y, prep.val_x, prep.val_y, tc_i);
                    double va = r.curve.empty() ? 0.0 : r.curve[static_cast<std::size_t>(
                                                            r.best_epoch)].val_acc;
                    table += hs + "," + std::to_string(init.dims.dense1) + "," + lrs + "," +
                             (r.curve.empty() ? "nan"
                                              : fmt(r.curve[static_cast<std::size_t>(r.best_epoch)]
                                                        .val_loss)) +
                             "," + fmt(va) + "," + std::to_string(r.curve.size()) + "\n";
                    if (va > best_acc) {
                        best_acc = va;
                        best = std::move(r);
                    }
                }
            }
        }
        std::cout << table;
    } else {
        RnnDims dims = dims_from_config(config, prep.T, prep.d);
        RnnModel init = RnnModel::init(prep.kind, dims, tc.seed);
        best = fit(init, prep.train_x, prep.train_y, prep.val_x, prep.val_y, tc);
    }

    ensure_parent_dir(args.out);
    save_model(best.model, args.out);
    write_text(args.out + ".curve.csv", curve_csv(best.curve));
    if (!table.empty()) write_text(args.out + ".grid.csv", table);
    config.echo_to(args.out + ".config");

    std::cout << model_summary(best.model) << "\n";
    if (!best.curve.empty()) {
        const auto& last = best.curve.back();
        std::cout << "train: " << best.curve.size() << " epochs, best epoch " << best.best_epoch
                  << ", final val_acc " << fmt(last.val_acc) << " -> " << args.out << "\n";
    } else {
        std::cout << "train: epochs=0, saved initialized checkpoint -> " << args.out << "\n";
    }
    return 0;
}

int cmd_eval(const EvalArgs& args) {
    RunConfig config = args.resolve();
    RnnModel model = load_model(args.model);
    Dataset ds = load_dataset(args.data);
    auto expected = static_cast<std::size_t>(model.dims.T) * static_cast<std::size_t>(model.dims.d);
    auto actual = static_cast<std::size_t>(ds.T) * static_cast<std::size_t>(ds.d);
    if (expected != actual)
        throw std::invalid_argument("model expects T=" + std::to_string(model.dims.T) +
                                    " d=" + std::to_string(model.dims.d) + " but dataset has T=" +
                                    std::to_string(ds.T) + " d=" + std::to_string(ds.d));

    bool per_line = config.get_bool("eval.per_line");
    if (per_line || !args.sidecar.empty()) {
        std::string sc = args.sidecar.empty() ? default_sidecar_path(args.data) : args.sidecar;
        attach_sidecar_ids(ds, sc);
    }

    double i_nom = resolve_i_nom(config);
    MetricsReport clean = evaluate(model, ds, i_nom, per_line);
    char acc_buf[64];
    std::snprintf(acc_buf, sizeof acc_buf, "accuracy %.1f%%", clean.accuracy() * 100.0);
    std::cout << "eval: " << ds.count() << " examples, " << acc_buf << "\n" << clean.to_text();

    std::string prefix = args.out_prefix.empty() ? args.data : args.out_prefix;
    write_text(prefix + ".metrics.csv", clean.to_csv());

    double snr = config.get_double("eval.noise_snr_db");
    if (snr > 0.0) {
        Dataset noisy = with_noise(ds, snr, config.get_u64("eval.noise_seed"));
        MetricsReport noisy_rep = evaluate(model, noisy, i_nom, per_line);
        double degradation = (clean.accuracy() - noisy_rep.accuracy()) * 100.0;
        char buf[128];
        std::snprintf(buf, sizeof buf,
                      "eval (noise %.1f dB SNR): accuracy %.1f%% (degradation %.2f points)\n", snr,
                      noisy_rep.accuracy() * 100.0, degradation);
        std::cout << buf << noisy_rep.to_text();
        write_text(prefix + ".noisy.metrics.csv", noisy_rep.to_csv());
    }

    if (config.get_bool("eval.roc")) {
        std::string roc = "threshold,accuracy,precision,recall,f1\n";
        std::vector<double> probs;
        for (const auto& ex : ds.examples) {
            std::vector<double> w(ex.window.size());
            for (std::size_t i = 0; i < w.size(); ++i)
                w[i] = static_cast<double>(ex.window[i]) / i_nom;
            probs.push_back(predict_proba(model, w));
        }
        for (int i = 1; i < 20; ++i) {
            double thr = 0.05 * i;
            MetricsReport r;
            for (std::size_t j = 0; j < probs.size(); ++j) {
                bool pred = probs[j] >= thr;
                if (ds.examples[j].label == 1) pred ? ++r.tp : ++r.fn;
                else pred ? ++r.fp : ++r.tn;
            }
            roc += fmt(thr) + "," + fmt(r.accuracy()) + "," + fmt(r.precision()) + "," +
                   fmt(r.recall()) + "," + fmt(r.f1()) + "\n";
        }
        write_text(prefix + ".roc.csv", roc);
    }

    config.echo_to(prefix + ".eval.config");
    return 0;
}

int cmd_attack(const AttackArgs& args) {
    RunConfig config = args.resolve();
    LineProfile profile = profile_from_config(config);
    ChannelLayout layout =
        profile.kind == LineKind::AC ? ChannelLayout::ac() : ChannelLayout::dc();

    SampleStream prefault = synth_prefault(profile.waveform, layout, profile.duration_s);

    AttackStrategy strategy = parse_attack_strategy(config.get("attack.strategy"));
    std::vector<int> channels;
    for (const std::string& c : split_list(config.get("attack.channels"), ','))
        channels.push_back(std::stoi(c));

    double alpha = config.get_double("attack.alpha");
    double delta = config.get_double("attack.delta_ka");
    double shift_ms = config.get_double("attack.shift_ms");
    bool explicit_magnitude = config.get_bool("attack.explicit") ||
                              (strategy == AttackStrategy::Scale && alpha != 1.0) ||
                              (strategy == AttackStrategy::Additive && delta != 0.0) ||
                              (strategy == AttackStrategy::TimeShift && shift_ms != 0.0);

    AttackSpec spec;
    if (explicit_magnitude) {
        spec.strategy = strategy;
        spec.alpha = alpha;
        spec.delta_ka = delta;
        spec.shift_s = shift_ms / 1000.0;
        spec.t_attack_s = profile.t_event_s;
        spec.channels = channels;
    } else {
        CraftOptions opts;
        opts.t_attack_s = profile.t_event_s;
        opts.channels = channels;
        opts.alpha_bound = config.get_double("attack.alpha_bound");
        opts.delta_bound_pu = config.get_double("attack.delta_bound_pu");
        opts.rel_tol = config.get_double("attack.rel_tol");
        opts.grid_points = config.get_int("attack.grid_points");
        if (profile.kind == LineKind::AC) opts.period_s = 1.0 / profile.waveform.f0_hz;
        spec = craft_tripping_attack(prefault, profile.relay, strategy, opts);
        std::cout << "crafted minimal " << attack_strategy_name(strategy) << " attack\n";
    }

    std::cout << "spec: strategy=" << attack_strategy_name(spec.strategy)
              << " alpha=" << fmt(spec.alpha) << " delta_ka=" << fmt(spec.delta_ka)
              << " shift_ms=" << fmt(spec.shift_s * 1000.0)
              << " t_attack_s=" << fmt(spec.t_attack_s) << "\n";

    SampleStream attacked = apply_attack(prefault, spec);
    auto trip = scan_for_trip(attacked, profile.relay);
    if (trip) {
        std::cout << "relay: TRIP at sample " << trip->trigger_index << " (t="
                  << fmt(trip->trigger_time_s) << " s) pair " << trip->pair
                  << " I_d=" << fmt(trip->i_d_ka) << " kA I_r=" << fmt(trip->i_r_ka) << " kA\n";
    } else {
        std::cout << "relay: no trip (attack ineffective)\n";
    }

    if (!args.model.empty() && trip) {
        RnnModel model = load_model(args.model);
        WindowSpec window = WindowSpec::defaults(profile.kind, profile.waveform.fs_hz);
        ValidationDecision d = validate(model, attacked, profile.relay, window);
        std::cout << "validation: "
                  << (d.verdict == ValidationDecision::Verdict::BlockTrip ? "BLOCK (FDIA)"
                                                                          : "PERMIT (fault)")
                  << " p_fdia=" << fmt(d.probability_fdia) << " elapsed=" << fmt(d.elapsed_s * 1e3)
                  << " ms\n";
    }

    std::string out = args.out_csv.empty()
                          ? "attack_" + line_kind_name(profile.kind) + "_" +
                                attack_strategy_name(spec.strategy) + ".csv"
                          : args.out_csv;
    std::string csv = "sample_index";
    for (int c = 0; c < attacked.d(); ++c) csv += "," + layout.channel_name(c);
    csv += "\n";
    for (std::size_t k = 0; k < attacked.size(); ++k) {
        csv += std::to_string(k);
        for (int c = 0; c < attacked.d(); ++c) csv += "," + fmt(attacked.at(k, c));
        csv += "\n";
    }
    write_text(out, csv);
    config.echo_to(out + ".config");
    std::cout << "stream written to " << out << "\n";
    return 0;
}

int cmd_bench(const BenchArgs& args) {
    RunConfig config = args.resolve();
    RnnModel model = load_model(args.model);
    LatencyStats stats =
        bench_latency(model, config.get_int("bench.iters"), config.get_u64("bench.seed"));

    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "bench: %d iterations, median %.4f ms, p99 %.4f ms, mean %.4f ms\n",
                  stats.iterations, stats.median_s * 1e3, stats.p99_s * 1e3, stats.mean_s * 1e3);
    std::cout << buf;

    std::string out = args.out_csv.empty() ? args.model + ".bench.csv" : args.out_csv;
    std::string csv = "stat,value\n";
    csv += "iterations," + std::to_string(stats.iterations) + "\n";
    csv += "median_ms," + fmt(stats.median_s * 1e3) + "\n";
    csv += "p99_ms," + fmt(stats.p99_s * 1e3) + "\n";
    csv += "mean_ms," + fmt(stats.mean_s * 1e3) + "\n";
    write_text(out, csv);
    return 0;
}

int cmd_model_info(const ModelInfoArgs& args) {
    RnnModel model = load_model(args.model);
    std::cout << model_summary(model) << "\n";
    return 0;
}

} // namespace mivs::cmd
