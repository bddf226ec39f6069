// Command-line front end: dataset generation, training, evaluation, attack
// demonstration, latency benchmarking, and model inspection.

#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mivs/commands.hpp"

namespace {

using mivs::cmd::AttackArgs;
using mivs::cmd::BenchArgs;
using mivs::cmd::EvalArgs;
using mivs::cmd::GenArgs;
using mivs::cmd::ModelInfoArgs;
using mivs::cmd::TrainArgs;

// Maps a dedicated flag onto a config override so explicit flags always win
// over the config file.
void add_override(CLI::App* app, mivs::cmd::CommonArgs& args, const std::string& flag,
                  const std::string& key, const std::string& help) {
    app->add_option_function<std::string>(
           flag,
           [&args, key](const std::string& v) { args.overrides.push_back(key + "=" + v); },
           help)
        ->expected(1);
}

void add_common(CLI::App* app, mivs::cmd::CommonArgs& args) {
    app->add_option("--config", args.config_path, "config file (key = value sections)");
    app->add_option_function<std::vector<std::string>>(
        "--set",
        [&args](const std::vector<std::string>& vs) {
            for (const auto& v : vs) args.overrides.push_back(v);
        },
        "override any config key, e.g. --set signal.fs_hz=1000");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"line-current differential relay / FDIA / validation toolkit"};
    app.require_subcommand(1);

    GenArgs gen;
    auto* gen_cmd = app.add_subcommand("gen", "generate fault/FDIA datasets");
    add_common(gen_cmd, gen);
    gen_cmd->add_option("--out", gen.out, "output path prefix")->required();
    add_override(gen_cmd, gen, "--kind", "dataset.kind", "ac | dc");
    add_override(gen_cmd, gen, "--faults", "dataset.faults", "fault scenario count");
    add_override(gen_cmd, gen, "--attacks", "dataset.attacks", "attack scenario count");
    add_override(gen_cmd, gen, "--seed", "dataset.seed", "master seed");
    add_override(gen_cmd, gen, "--window-ms", "dataset.window_ms", "window length in ms");
    add_override(gen_cmd, gen, "--fs-hz", "signal.fs_hz", "sampling rate");
    add_override(gen_cmd, gen, "--line-name", "dataset.line_name", "scenario id prefix");
    add_override(gen_cmd, gen, "--threads", "dataset.threads", "parallel generation threads");

    TrainArgs train;
    auto* train_cmd = app.add_subcommand("train", "train the validation model");
    add_common(train_cmd, train);
    train_cmd->add_option("--data", train.data, "training dataset(s); repeat to pool")->required();
    train_cmd->add_option("--i-nom", train.i_nom_ka, "per-dataset normalization current (kA)");
    train_cmd->add_option("--out", train.out, "checkpoint output path")->required();
    train_cmd->add_flag("--grid-search", train.grid_search, "sweep hidden/dense/lr");
    train_cmd->add_option("--gs-hidden", train.gs_hidden, "grid-search hidden sizes");
    train_cmd->add_option("--gs-dense1", train.gs_dense1, "grid-search dense1 sizes (0 = auto)");
    train_cmd->add_option("--gs-lr", train.gs_lr, "grid-search learning rates");
    add_override(train_cmd, train, "--epochs", "train.epochs", "max epochs");
    add_override(train_cmd, train, "--batch", "train.batch", "mini-batch size");
    add_override(train_cmd, train, "--lr", "train.lr", "learning rate");
    add_override(train_cmd, train, "--seed", "train.seed", "training seed");
    add_override(train_cmd, train, "--val-fraction", "train.val_fraction", "validation share");
    add_override(train_cmd, train, "--head", "train.head", "flatten | last");

    EvalArgs eval;
    auto* eval_cmd = app.add_subcommand("eval", "evaluate a model on a dataset");
    add_common(eval_cmd, eval);
    eval_cmd->add_option("--model", eval.model, "model checkpoint")->required();
    eval_cmd->add_option("--data", eval.data, "dataset file")->required();
    eval_cmd->add_option("--sidecar", eval.sidecar, "scenario sidecar CSV");
    eval_cmd->add_option("--out", eval.out_prefix, "report path prefix");
    add_override(eval_cmd, eval, "--noise-snr", "eval.noise_snr_db",
                 "also evaluate at this SNR (dB) without retraining");
    add_override(eval_cmd, eval, "--noise-seed", "eval.noise_seed", "noise seed");
    add_override(eval_cmd, eval, "--per-line", "eval.per_line", "per-line breakdown (0/1)");
    add_override(eval_cmd, eval, "--roc", "eval.roc", "emit threshold sweep (0/1)");
    add_override(eval_cmd, eval, "--i-nom", "train.i_nom_ka", "normalization current (kA)");

    AttackArgs attack;
    auto* attack_cmd = app.add_subcommand("attack", "craft and demonstrate an attack");
    add_common(attack_cmd, attack);
    attack_cmd->add_option("--model", attack.model, "validate the attack with this model");
    attack_cmd->add_option("--out", attack.out_csv, "attacked stream CSV path");
    add_override(attack_cmd, attack, "--kind", "dataset.kind", "ac | dc");
    add_override(attack_cmd, attack, "--strategy", "attack.strategy", "scale | add | tsa");
    // explicit magnitudes switch the command from crafting to applying as-is
    attack_cmd->add_option_function<std::string>(
        "--alpha",
        [&attack](const std::string& v) {
            attack.overrides.push_back("attack.alpha=" + v);
            attack.overrides.push_back("attack.explicit=1");
        },
        "explicit scale factor");
    attack_cmd->add_option_function<std::string>(
        "--delta",
        [&attack](const std::string& v) {
            attack.overrides.push_back("attack.delta_ka=" + v);
            attack.overrides.push_back("attack.explicit=1");
        },
        "explicit additive offset (kA)");
    attack_cmd->add_option_function<std::string>(
        "--shift-ms",
        [&attack](const std::string& v) {
            attack.overrides.push_back("attack.shift_ms=" + v);
            attack.overrides.push_back("attack.explicit=1");
        },
        "explicit time shift (ms)");
    add_override(attack_cmd, attack, "--channels", "attack.channels",
                 "targeted remote channels, comma-separated");

    BenchArgs bench;
    auto* bench_cmd = app.add_subcommand("bench", "measure single-window inference latency");
    add_common(bench_cmd, bench);
    bench_cmd->add_option("--model", bench.model, "model checkpoint")->required();
    bench_cmd->add_option("--out", bench.out_csv, "latency CSV path");
    add_override(bench_cmd, bench, "--iters", "bench.iters", "timed iterations (after 100 warm-ups)");

    ModelInfoArgs info;
    auto* info_cmd = app.add_subcommand("model-info", "print checkpoint dimensions and size");
    info_cmd->add_option("--model", info.model, "model checkpoint")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen_cmd->parsed()) return mivs::cmd::cmd_gen(gen);
        if (train_cmd->parsed()) return mivs::cmd::cmd_train(train);
        if (eval_cmd->parsed()) return mivs::cmd::cmd_eval(eval);
        if (attack_cmd->parsed()) return mivs::cmd::cmd_attack(attack);
        if (bench_cmd->parsed()) return mivs::cmd::cmd_bench(bench);
        if (info_cmd->parsed()) return mivs::cmd::cmd_model_info(info);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
