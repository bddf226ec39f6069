#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "mivs/errors.hpp"
#include "mivs/nn.hpp"
#include "mivs/rng.hpp"

using namespace mivs;

TEST_SUITE_BEGIN("nn");

namespace {

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

RnnModel small_model(int T, int d, int h, std::uint64_t seed) {
    RnnDims dims;
    dims.T = T;
    dims.d = d;
    dims.hidden = {h, h, h};
    dims.dense1 = 4;
    dims.dense2 = 3;
    return RnnModel::init(LineKind::AC, dims, seed);
}

std::vector<double> random_window(int T, int d, Rng& rng) {
    std::vector<double> w(static_cast<std::size_t>(T) * static_cast<std::size_t>(d));
    for (auto& v : w) v = rng.uniform(-1.0, 1.0);
    return w;
}

// Independent loss evaluation used by the finite-difference oracle.
double batch_loss(const RnnModel& m, const std::vector<std::vector<double>>& xs,
                  const std::vector<std::uint8_t>& ys) {
    std::vector<double> probs(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) probs[i] = forward(m, xs[i])[1];
    return bce_loss(probs, ys);
}

} // namespace

TEST_CASE("zero-weight model outputs (0.5, 0.5) for any input") {
    RnnModel m = small_model(5, 2, 3, 1);
    std::fill(m.params.begin(), m.params.end(), 0.0);
    Rng rng(2);
    auto w = random_window(5, 2, rng);
    auto p = forward(m, w);
    CHECK(p[0] == 0.5);
    CHECK(p[1] == 0.5);
    CHECK(predict_proba(m, w) == 0.5);
}

TEST_CASE("zero input with zero biases stays at (0.5, 0.5)") {
    RnnModel m = small_model(4, 2, 3, 7); // biases are zero-initialized
    std::vector<double> w(8, 0.0);
    auto p = forward(m, w);
    CHECK(p[0] == 0.5);
    CHECK(p[1] == 0.5);
}

TEST_CASE("forward is deterministic and validates its input") {
    RnnModel m = small_model(6, 4, 4, 3);
    Rng rng(4);
    auto w = random_window(6, 4, rng);
    auto a = forward(m, w);
    auto b = forward(m, w);
    CHECK(a[0] == b[0]);
    CHECK(a[1] == b[1]);

    std::vector<double> wrong(10, 0.0);
    CHECK_THROWS_AS(forward(m, wrong), std::invalid_argument);
    w[3] = std::nan("");
    CHECK_THROWS_AS(forward(m, w), std::invalid_argument);
}

TEST_CASE("softmax outputs are normalized for random models") {
    Rng rng(5);
    for (int i = 0; i < 10; ++i) {
        RnnModel m = small_model(5, 3, 4, 100 + static_cast<std::uint64_t>(i));
        auto w = random_window(5, 3, rng);
        auto p = forward(m, w);
        CHECK(p[0] > 0.0);
        CHECK(p[1] > 0.0);
        CHECK(std::fabs(p[0] + p[1] - 1.0) <= 1e-9);
    }
}

TEST_CASE("binary cross-entropy analytic values") {
    std::vector<double> half{0.5};
    std::vector<std::uint8_t> y0{0}, y1{1};
    CHECK(bce_loss(half, y0) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(bce_loss(half, y1) == doctest::Approx(std::log(2.0)).epsilon(1e-12));

    std::vector<double> exact{1.0};
    CHECK(bce_loss(exact, y1) <= 1e-10); // clamped at 1 - 1e-12

    // Mean of a two-element batch equals the average of the pieces.
    std::vector<double> pair{0.3, 0.8};
    std::vector<std::uint8_t> yy{1, 0};
    double a = -std::log(0.3), b = -std::log(1.0 - 0.8);
    CHECK(bce_loss(pair, yy) == doctest::Approx((a + b) / 2.0).epsilon(1e-12));

    CHECK_THROWS_AS(bce_loss({}, {}), std::invalid_argument);
}

TEST_CASE("loss on duplicated examples equals the single-example loss") {
    RnnModel m = small_model(5, 2, 3, 11);
    Rng rng(12);
    auto w = random_window(5, 2, rng);
    double p = predict_proba(m, w);
    std::vector<double> one{p}, four{p, p, p, p};
    std::vector<std::uint8_t> y_one{1}, y_four{1, 1, 1, 1};
    CHECK(bce_loss(one, y_one) == doctest::Approx(bce_loss(four, y_four)).epsilon(1e-15));
}

TEST_CASE("head bias gradient is the softmax-cross-entropy residual") {
    RnnModel m = small_model(5, 2, 3, 21);
    Rng rng(22);
    std::vector<std::vector<double>> xs{random_window(5, 2, rng)};
    std::vector<std::uint8_t> ys{0};
    auto p = forward(m, xs[0]);
    auto grads = backward_bptt(m, xs, ys);
    // Head biases are the last two parameters in declaration order.
    double g0 = grads[grads.size() - 2];
    double g1 = grads[grads.size() - 1];
    CHECK(g0 == doctest::Approx(p[0] - 1.0).epsilon(1e-12));
    CHECK(g1 == doctest::Approx(p[1]).epsilon(1e-12));
}

TEST_CASE("gradients cancel at the symmetric saddle") {
    RnnModel m = small_model(4, 2, 3, 31);
    std::fill(m.params.begin(), m.params.end(), 0.0);
    Rng rng(32);
    auto w = random_window(4, 2, rng);
    std::vector<std::vector<double>> xs{w, w};
    std::vector<std::uint8_t> ys{0, 1};
    auto grads = backward_bptt(m, xs, ys);
    for (double g : grads) CHECK(g == 0.0);
}

TEST_CASE("BPTT gradients match central finite differences") {
    // The independent oracle for every parameter of 20 random small models.
    Rng rng(40);
    for (int trial = 0; trial < 20; ++trial) {
        int T = 2 + static_cast<int>(rng.below(5));  // up to 6
        int d = 1 + static_cast<int>(rng.below(4));
        int h = 2 + static_cast<int>(rng.below(3));  // up to 4
        RnnModel m = small_model(T, d, h, 1000 + static_cast<std::uint64_t>(trial));

        std::vector<std::vector<double>> xs;
        std::vector<std::uint8_t> ys;
        for (int i = 0; i < 3; ++i) {
            xs.push_back(random_window(T, d, rng));
            ys.push_back(static_cast<std::uint8_t>(rng.below(2)));
        }

        auto grads = backward_bptt(m, xs, ys);
        REQUIRE(grads.size() == m.params.size());

        const double step = 1e-5;
        double max_rel = 0.0;
        for (std::size_t i = 0; i < m.params.size(); ++i) {
            double saved = m.params[i];
            m.params[i] = saved + step;
            double lp = batch_loss(m, xs, ys);
            m.params[i] = saved - step;
            double lm = batch_loss(m, xs, ys);
            m.params[i] = saved;
            double fd = (lp - lm) / (2.0 * step);
            double rel = std::fabs(grads[i] - fd) / std::max({1e-6, std::fabs(grads[i]), std::fabs(fd)});
            max_rel = std::max(max_rel, rel);
        }
        CHECK(max_rel <= 1e-4);
    }
}

TEST_CASE("adam first step moves every parameter by about the learning rate") {
    RnnModel m = small_model(4, 2, 3, 50);
    RnnModel before = m;
    AdamState state = AdamState::for_model(m);
    TrainConfig cfg;
    std::vector<double> grads(m.params.size(), 0.5);
    adam_step(m, grads, state, cfg);
    CHECK(state.step == 1);
    for (std::size_t i = 0; i < m.params.size(); ++i) {
        double delta = m.params[i] - before.params[i];
        CHECK(std::fabs(delta + cfg.lr) <= 1e-6 * cfg.lr + 1e-12);
    }
}

TEST_CASE("adam with zero gradient leaves parameters unchanged") {
    RnnModel m = small_model(4, 2, 3, 51);
    RnnModel before = m;
    AdamState state = AdamState::for_model(m);
    state.m.assign(state.m.size(), 0.1); // pre-existing momentum decays
    TrainConfig cfg;
    std::vector<double> zeros(m.params.size(), 0.0);
    RnnModel moved = m;
    AdamState s2 = AdamState::for_model(m);
    adam_step(moved, zeros, s2, cfg);
    CHECK(moved.params == before.params);
    CHECK(s2.step == 1);

    adam_step(m, zeros, state, cfg);
    CHECK(state.m[0] == doctest::Approx(0.09).epsilon(1e-12));
}

TEST_CASE("adam rejects mismatched shapes") {
    RnnModel m = small_model(4, 2, 3, 52);
    AdamState state = AdamState::for_model(m);
    TrainConfig cfg;
    std::vector<double> grads(3, 0.0);
    CHECK_THROWS_AS(adam_step(m, grads, state, cfg), std::invalid_argument);
}

TEST_CASE("training separates a linearly separable toy set") {
    RnnDims dims;
    dims.T = 5;
    dims.d = 2;
    dims.hidden = {4, 4, 4};
    dims.dense1 = 8;
    dims.dense2 = 4;
    RnnModel m = RnnModel::init(LineKind::AC, dims, 60);

    std::vector<std::vector<double>> xs;
    std::vector<std::uint8_t> ys;
    for (int i = 0; i < 10; ++i) {
        xs.push_back(std::vector<double>(10, 0.8));
        ys.push_back(0);
        xs.push_back(std::vector<double>(10, -0.8));
        ys.push_back(1);
    }

    TrainConfig cfg;
    cfg.epochs = 50;
    cfg.batch = 4;
    cfg.lr = 0.01;
    cfg.seed = 61;
    FitResult r = fit(m, xs, ys, {}, {}, cfg);
    auto [loss, acc] = evaluate_loss_acc(r.model, xs, ys);
    CHECK(acc == 1.0);
    CHECK(loss < 0.1);
    CHECK(!r.curve.empty());
}

TEST_CASE("fit with zero epochs returns the initialized model and an empty curve") {
    RnnModel m = small_model(5, 2, 3, 70);
    std::vector<std::vector<double>> xs{std::vector<double>(10, 0.1)};
    std::vector<std::uint8_t> ys{0};
    TrainConfig cfg;
    cfg.epochs = 0;
    FitResult r = fit(m, xs, ys, {}, {}, cfg);
    CHECK(r.curve.empty());
    CHECK(r.model.params == m.params);
}

TEST_CASE("training is bit-deterministic under a fixed seed") {
    RnnModel m = small_model(5, 2, 3, 80);
    Rng rng(81);
    std::vector<std::vector<double>> xs;
    std::vector<std::uint8_t> ys;
    for (int i = 0; i < 16; ++i) {
        xs.push_back(random_window(5, 2, rng));
        ys.push_back(static_cast<std::uint8_t>(i % 2));
    }
    TrainConfig cfg;
    cfg.epochs = 5;
    cfg.batch = 4;
    cfg.seed = 82;
    FitResult a = fit(m, xs, ys, xs, ys, cfg);
    FitResult b = fit(m, xs, ys, xs, ys, cfg);
    CHECK(a.model.params == b.model.params);
    REQUIRE(a.curve.size() == b.curve.size());
    for (std::size_t i = 0; i < a.curve.size(); ++i) {
        CHECK(a.curve[i].train_loss == b.curve[i].train_loss);
        CHECK(a.curve[i].val_loss == b.curve[i].val_loss);
    }
}

TEST_CASE("default dimensioning stays near the parameter budget at every profile") {
    struct Profile {
        int T, d;
    } profiles[] = {{40, 6}, {16, 4}, {10, 6}, {4, 4}};
    for (auto [T, d] : profiles) {
        RnnDims dims;
        dims.T = T;
        dims.d = d;
        dims.resolve();
        auto count = dims.param_count();
        CHECK(count >= static_cast<std::size_t>(RnnDims::kParamBudget * 0.8));
        CHECK(count <= static_cast<std::size_t>(RnnDims::kParamBudget * 1.2));
    }
}

TEST_CASE("checkpoints round-trip bit-exactly") {
    RnnModel m = small_model(6, 4, 4, 90);
    std::string p1 = temp_path("mivs_test_model1.nn");
    std::string p2 = temp_path("mivs_test_model2.nn");
    save_model(m, p1);
    RnnModel l1 = load_model(p1);
    CHECK(l1.dims.T == m.dims.T);
    CHECK(l1.param_count() == m.param_count());
    save_model(l1, p2);
    RnnModel l2 = load_model(p2);
    CHECK(l1.params == l2.params); // float32 quantization is idempotent

    std::ifstream f1(p1, std::ios::binary), f2(p2, std::ios::binary);
    std::string b1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
    std::string b2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
    CHECK(b1 == b2);

    Rng rng(91);
    auto w = random_window(6, 4, rng);
    CHECK(predict_proba(l1, w) == predict_proba(l2, w));
    std::remove(p1.c_str());
    std::remove(p2.c_str());
}

TEST_CASE("final-state head round-trips and differs in size") {
    RnnDims dims;
    dims.T = 10;
    dims.d = 6;
    dims.flatten_head = false;
    dims.dense1 = 8;
    RnnModel m = RnnModel::init(LineKind::AC, dims, 92);
    CHECK(m.dims.flatten_size() == 16);

    std::string p = temp_path("mivs_test_model_last.nn");
    save_model(m, p);
    RnnModel loaded = load_model(p);
    CHECK(loaded.dims.flatten_head == false);
    CHECK(loaded.param_count() == m.param_count());
    std::remove(p.c_str());
}

TEST_CASE("corrupt checkpoints raise format errors") {
    RnnModel m = small_model(5, 2, 3, 93);
    std::string p = temp_path("mivs_test_model_bad.nn");
    save_model(m, p);
    std::ifstream in(p, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    in.close();

    std::ofstream(p, std::ios::binary) << bytes.substr(0, bytes.size() - 3);
    CHECK_THROWS_AS(load_model(p), FormatError);
    std::string wrong = bytes;
    wrong[2] = 'X';
    std::ofstream(p, std::ios::binary) << wrong;
    CHECK_THROWS_AS(load_model(p), FormatError);
    std::remove(p.c_str());
}

TEST_SUITE_END();
