#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "mivs/commands.hpp"
#include "mivs/config.hpp"

using namespace mivs;

TEST_SUITE_BEGIN("config");

namespace {

std::string temp_file(const std::string& name, const std::string& content) {
    std::string path = (std::filesystem::temp_directory_path() / name).string();
    std::ofstream(path) << content;
    return path;
}

} // namespace

TEST_CASE("defaults expose every registered key with typed access") {
    RunConfig c = RunConfig::defaults();
    CHECK(c.get_double("signal.fs_hz") == 4000.0);
    CHECK(c.get("dataset.kind") == "ac");
    CHECK(c.get_int("train.batch") == 32);
    CHECK(c.get_u64("dataset.seed") == 42);
    CHECK(c.get_bool("eval.per_line") == false);
}

TEST_CASE("MIVS_SEED provides the default seed") {
    setenv("MIVS_SEED", "777", 1);
    RunConfig c = RunConfig::defaults();
    CHECK(c.get_u64("dataset.seed") == 777);
    CHECK(c.get_u64("train.seed") == 777);
    unsetenv("MIVS_SEED");
    RunConfig d = RunConfig::defaults();
    CHECK(d.get_u64("dataset.seed") == 42);
}

TEST_CASE("unknown keys are hard errors") {
    RunConfig c = RunConfig::defaults();
    CHECK_THROWS_AS(c.set("signal.bogus=1"), std::invalid_argument);
    CHECK_THROWS_AS(c.get("nope.nothing"), std::invalid_argument);

    std::string path = temp_file("mivs_cfg_unknown.cfg", "[signal]\nmystery = 3\n");
    RunConfig d = RunConfig::defaults();
    CHECK_THROWS_AS(d.merge_file(path), std::invalid_argument);
    std::remove(path.c_str());
}

TEST_CASE("config files parse sections, comments, and whitespace") {
    std::string path = temp_file("mivs_cfg_ok.cfg",
                                 "# comment\n"
                                 "[signal]\n"
                                 "  fs_hz = 1000  \n"
                                 "\n"
                                 "[relay]\n"
                                 "eta = 0.15\n");
    RunConfig c = RunConfig::defaults();
    c.merge_file(path);
    CHECK(c.get_double("signal.fs_hz") == 1000.0);
    CHECK(c.get_double("relay.eta") == 0.15);
    CHECK(c.get_double("relay.m1") == 0.2); // untouched default
    std::remove(path.c_str());
}

TEST_CASE("keys outside a section and malformed lines fail") {
    std::string path = temp_file("mivs_cfg_bad1.cfg", "fs_hz = 1000\n");
    RunConfig c = RunConfig::defaults();
    CHECK_THROWS(c.merge_file(path));
    std::remove(path.c_str());

    path = temp_file("mivs_cfg_bad2.cfg", "[signal]\nfs_hz 1000\n");
    CHECK_THROWS(c.merge_file(path));
    std::remove(path.c_str());
}

TEST_CASE("overrides applied after a file win") {
    std::string path = temp_file("mivs_cfg_prec.cfg", "[train]\nepochs = 7\n");
    RunConfig c = RunConfig::defaults();
    c.merge_file(path);
    CHECK(c.get_int("train.epochs") == 7);
    c.set("train.epochs=3");
    CHECK(c.get_int("train.epochs") == 3);
    std::remove(path.c_str());
}

TEST_CASE("serialized echo reproduces the effective configuration") {
    RunConfig c = RunConfig::defaults();
    c.set("signal.fs_hz=1000");
    c.set("dataset.kind=dc");
    std::string echoed = temp_file("mivs_cfg_echo.cfg", c.serialize());

    RunConfig back = RunConfig::defaults();
    back.merge_file(echoed);
    CHECK(back.serialize() == c.serialize());
    std::remove(echoed.c_str());
}

TEST_CASE("typed getters reject non-numeric text") {
    RunConfig c = RunConfig::defaults();
    c.set("dataset.line_name=abc");
    CHECK_THROWS_AS(c.get_double("dataset.line_name"), std::invalid_argument);
    c.set("signal.fs_hz=4000.5");
    CHECK_THROWS_AS(c.get_int("signal.fs_hz"), std::invalid_argument);
}

TEST_CASE("profile assembly honors kind-specific relay defaults") {
    RunConfig c = RunConfig::defaults();
    c.set("dataset.kind=dc");
    LineProfile p = cmd::profile_from_config(c);
    CHECK(p.kind == LineKind::DC);
    CHECK(p.relay.kind == LineKind::DC);
    CHECK(p.relay.mag_window_s == 0.002);
    CHECK(p.name == "dc1");

    RunConfig a = RunConfig::defaults();
    a.set("relay.mag_window_s=0.01");
    LineProfile pa = cmd::profile_from_config(a);
    CHECK(pa.relay.mag_window_s == 0.01);
    CHECK(pa.relay.kind == LineKind::AC);
}

TEST_CASE("command layer: gen, train, eval round trip") {
    std::string dir = (std::filesystem::temp_directory_path() / "mivs_cmd_smoke").string();
    std::filesystem::remove_all(dir);

    cmd::GenArgs gen;
    gen.out = dir + "/dc";
    gen.overrides = {"dataset.kind=dc", "dataset.faults=12", "dataset.attacks=12",
                     "dataset.seed=5"};
    CHECK(cmd::cmd_gen(gen) == 0);
    CHECK(std::filesystem::exists(dir + "/dc.train.ds"));
    CHECK(std::filesystem::exists(dir + "/dc.test.csv"));
    CHECK(std::filesystem::exists(dir + "/dc.log"));
    CHECK(std::filesystem::exists(dir + "/dc.config"));

    cmd::TrainArgs train;
    train.data = {dir + "/dc.train.ds"};
    train.out = dir + "/dc.nn";
    train.overrides = {"train.epochs=2", "train.seed=5"};
    CHECK(cmd::cmd_train(train) == 0);
    CHECK(std::filesystem::exists(dir + "/dc.nn.curve.csv"));

    cmd::EvalArgs eval;
    eval.model = dir + "/dc.nn";
    eval.data = dir + "/dc.test.ds";
    eval.out_prefix = dir + "/dc.report";
    CHECK(cmd::cmd_eval(eval) == 0);
    CHECK(std::filesystem::exists(dir + "/dc.report.metrics.csv"));

    // Incompatible shapes produce an explicit dimension error.
    cmd::GenArgs gen_ac = gen;
    gen_ac.out = dir + "/ac";
    gen_ac.overrides = {"dataset.kind=ac", "dataset.faults=12", "dataset.attacks=12",
                        "dataset.seed=5"};
    CHECK(cmd::cmd_gen(gen_ac) == 0);
    cmd::EvalArgs bad = eval;
    bad.data = dir + "/ac.test.ds";
    CHECK_THROWS_AS(cmd::cmd_eval(bad), std::invalid_argument);

    std::filesystem::remove_all(dir);
}

TEST_CASE("grid assembly picks window defaults by kind and sampling rate") {
    RunConfig c = RunConfig::defaults();
    c.set("dataset.kind=dc");
    c.set("signal.fs_hz=1000");
    ScenarioGrid g = cmd::grid_from_config(c);
    CHECK(g.window.duration_ms == 4.0);
    CHECK(g.window.T() == 4);
    CHECK(g.n_faults == 1000);

    c.set("dataset.window_ms=8");
    ScenarioGrid g2 = cmd::grid_from_config(c);
    CHECK(g2.window.T() == 8);
}

TEST_SUITE_END();
