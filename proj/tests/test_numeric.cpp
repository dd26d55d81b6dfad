#include "doctest.h"

#include <cmath>
#include <random>

#include "stim/autograd.hpp"
#include "stim/gradcheck.hpp"
#include "stim/nn.hpp"
#include "stim/optimizer.hpp"
#include "stim/tensor.hpp"

using namespace stim;

namespace {

Tensor random_tensor(std::size_t r, std::size_t c, std::mt19937_64& rng,
                     double scale = 1.0) {
    std::uniform_real_distribution<double> dist(-scale, scale);
    Tensor t = Tensor::zeros({r, c});
    for (double& v : t.data) v = dist(rng);
    return t;
}

}  // namespace

TEST_CASE("softmax examples") {
    Tensor x = Tensor::row({0.0, 0.0, 0.0});
    Tensor y = softmax(x);
    for (double v : y.data) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

    Tensor z = softmax(Tensor::row({std::log(2.0), 0.0}));
    CHECK(z.data[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(z.data[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

    Tensor big = softmax(Tensor::row({1000.0, 0.0}));
    CHECK(big.all_finite());
    CHECK(big.data[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(big.data[1] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("softmax rows sum to one and permutation equivariance") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        Tensor x = random_tensor(4, 6, rng, 5.0);
        Tensor y = softmax(x, 1);
        for (std::size_t r = 0; r < 4; ++r) {
            double s = 0.0;
            for (std::size_t c = 0; c < 6; ++c) {
                CHECK(y.at(r, c) > 0.0);
                CHECK(y.at(r, c) < 1.0);
                s += y.at(r, c);
            }
            CHECK(s == doctest::Approx(1.0).epsilon(1e-9));
        }
        // Swap two columns of the input: output columns swap identically.
        Tensor xp = x;
        for (std::size_t r = 0; r < 4; ++r) std::swap(xp.at(r, 0), xp.at(r, 3));
        Tensor yp = softmax(xp, 1);
        for (std::size_t r = 0; r < 4; ++r) {
            CHECK(yp.at(r, 0) == doctest::Approx(y.at(r, 3)).epsilon(1e-12));
            CHECK(yp.at(r, 3) == doctest::Approx(y.at(r, 0)).epsilon(1e-12));
        }
    }
}

TEST_CASE("l2_normalize examples") {
    Tensor t = l2_normalize(Tensor::row({3.0, 4.0}));
    CHECK(t.data[0] == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(t.data[1] == doctest::Approx(0.8).epsilon(1e-12));

    Tensor unit = l2_normalize(Tensor::row({1.0, 0.0}));
    CHECK(unit.data[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(unit.data[1] == doctest::Approx(0.0).epsilon(1e-12));

    // Epsilon guard: zero vector passes through unchanged.
    Tensor zero = l2_normalize(Tensor::row({0.0, 0.0}));
    CHECK(zero.data[0] == 0.0);
    CHECK(zero.data[1] == 0.0);
}

TEST_CASE("l2_normalize output norms") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        Tensor x = random_tensor(5, 7, rng, 3.0);
        Tensor y = l2_normalize(x, 1);
        for (std::size_t r = 0; r < 5; ++r) {
            double n = 0.0;
            for (std::size_t c = 0; c < 7; ++c) n += y.at(r, c) * y.at(r, c);
            CHECK(std::sqrt(n) == doctest::Approx(1.0).epsilon(1e-9));
        }
    }
}

TEST_CASE("feed-forward block shape and identity case") {
    std::mt19937_64 rng(3);
    ParamStore store;
    FeedForwardBlock block(&store, "blk", {8, 4}, 4);
    VarPtr x = constant(random_tensor(3, 5, rng));
    VarPtr y = block.forward(x, rng);
    CHECK(y->value.rows() == 3);
    CHECK(y->value.cols() == 4);

    // Re-binding to a different width must fail.
    VarPtr bad = constant(random_tensor(3, 6, rng));
    CHECK_THROWS_AS(block.forward(bad), DimensionError);

    // Identity-activation single layer with identity weights and zero bias.
    ParamStore store2;
    FeedForwardBlock id_block(&store2, "id", {}, 3, Activation::Relu,
                              Activation::Identity);
    std::mt19937_64 rng2(1);
    id_block.bind(3, rng2);
    Tensor eye = Tensor::zeros({3, 3});
    for (int i = 0; i < 3; ++i) eye.at(i, i) = 1.0;
    store2.get("id/l0/W")->value = eye;
    VarPtr x2 = constant(random_tensor(2, 3, rng2));
    VarPtr y2 = id_block.forward(x2);
    for (std::size_t i = 0; i < x2->value.size(); ++i)
        CHECK(y2->value.data[i] == doctest::Approx(x2->value.data[i]).epsilon(1e-15));
}

TEST_CASE("glorot init stays within the documented bound") {
    std::mt19937_64 rng(5);
    Tensor w = glorot_uniform(10, 6, rng);
    const double bound = std::sqrt(6.0 / 16.0);
    for (double v : w.data) {
        CHECK(v <= bound);
        CHECK(v >= -bound);
    }
}

TEST_CASE("gradcheck: quadratic and feed-forward block, 20 seeds") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        std::mt19937_64 rng(seed);

        // f(w) = sum(w^2): analytic gradient 2w.
        {
            ParamStore store;
            VarPtr w = store.create("w", random_tensor(1, 3, rng, 2.0));
            auto loss = [&]() { return ops::sum_all(ops::mul(w, w)); };
            auto report = grad_check(loss, store);
            CHECK(report.passes(1e-6));
        }

        // Full block: two hidden layers, relu, sigmoid output, BCE loss.
        {
            ParamStore store;
            FeedForwardBlock block(&store, "blk", {8, 4}, 1, Activation::Relu,
                                   Activation::Sigmoid);
            block.bind(5, rng);
            jitter_params(store, rng);  // keep relu pre-activations off the kink
            Tensor xv = random_tensor(6, 5, rng);
            std::vector<double> labels{1, 0, 1, 1, 0, 0};
            auto loss = [&]() {
                return ops::bce_loss(block.forward(constant(xv)), labels);
            };
            auto report = grad_check(loss, store);
            CHECK(report.max_rel_err < 1e-5);
        }
    }
}

TEST_CASE("gradcheck: attention-shaped op composition") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        std::mt19937_64 rng(seed);
        const std::size_t B = 2, L = 4, d = 3;
        ParamStore store;
        VarPtr q = store.create("q", random_tensor(B, d, rng));
        VarPtr k = store.create("k", random_tensor(B * L, d, rng));
        VarPtr m = store.create("m", random_tensor(B, L, rng, 0.5));
        std::vector<bool> valid(B * L, true);
        valid[3] = false;  // one padding slot
        auto loss = [&]() {
            VarPtr qh = ops::l2norm_rows(q);
            VarPtr kh = ops::l2norm_rows(k);
            VarPtr sims = ops::reshape(
                ops::rowwise_dot(ops::tile_rows(qh, L), kh), B, L);
            VarPtr w = ops::softmax_rows_masked(ops::mul(sims, m), valid);
            VarPtr pooled = ops::attention_pool(w, k);
            return ops::sum_all(ops::sigmoid(pooled));
        };
        auto report = grad_check(loss, store);
        CHECK(report.max_rel_err < 1e-5);
    }
}

TEST_CASE("gradcheck: softmax + cross-entropy composition") {
    std::mt19937_64 rng(42);
    ParamStore store;
    VarPtr z = store.create("z", random_tensor(4, 3, rng, 2.0));
    auto loss = [&]() {
        VarPtr p = ops::softmax_rows(z);
        // Cross entropy against class 0 per row via slicing.
        VarPtr p0 = ops::slice_cols(p, 0, 1);
        return ops::bce_loss(p0, {1, 1, 1, 1});
    };
    auto report = grad_check(loss, store);
    CHECK(report.max_rel_err < 1e-6);
}

TEST_CASE("gradcheck: embedding gather and scale_rows") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        std::mt19937_64 rng(seed);
        ParamStore store;
        VarPtr table = store.create("emb", random_tensor(6, 4, rng));
        VarPtr s = store.create("s", random_tensor(3, 1, rng));
        auto loss = [&]() {
            VarPtr rows = ops::gather_rows(table, {1, 4, 1});
            return ops::sum_all(ops::sigmoid(ops::scale_rows(rows, s)));
        };
        auto report = grad_check(loss, store);
        CHECK(report.max_rel_err < 1e-5);
    }
}

TEST_CASE("optimizer: plain descent example") {
    ParamStore store;
    VarPtr w = store.create("w", Tensor::full({1, 1}, 1.0));
    w->grad.at(0, 0) = 0.5;
    OptimizerConfig cfg;
    cfg.kind = OptimizerKind::Sgd;
    cfg.lr = 0.1;
    Optimizer opt(cfg);
    opt.step(store);
    CHECK(w->value.at(0, 0) == doctest::Approx(0.95).epsilon(1e-15));
}

TEST_CASE("optimizer: zero gradient leaves parameters unchanged") {
    for (OptimizerKind kind :
         {OptimizerKind::Sgd, OptimizerKind::Adam, OptimizerKind::AdamW}) {
        ParamStore store;
        VarPtr w = store.create("w", Tensor::full({2, 2}, 0.7));
        OptimizerConfig cfg;
        cfg.kind = kind;
        Optimizer opt(cfg);
        opt.step(store);
        for (double v : w->value.data) CHECK(v == doctest::Approx(0.7).epsilon(1e-12));
    }
}

TEST_CASE("optimizer: Adam first-step magnitude is about lr") {
    ParamStore store;
    VarPtr w = store.create("w", Tensor::full({1, 1}, 0.0));
    w->grad.at(0, 0) = 1.0;
    OptimizerConfig cfg;
    cfg.kind = OptimizerKind::Adam;
    cfg.lr = 1e-3;
    Optimizer opt(cfg);
    opt.step(store);
    CHECK(std::fabs(w->value.at(0, 0)) == doctest::Approx(1e-3).epsilon(1e-6));
}

TEST_CASE("optimizer: non-finite gradient raises with the parameter path") {
    ParamStore store;
    VarPtr w = store.create("layer/W", Tensor::full({1, 1}, 0.0));
    w->grad.at(0, 0) = std::numeric_limits<double>::quiet_NaN();
    Optimizer opt(OptimizerConfig{});
    try {
        opt.step(store);
        FAIL("expected TrainingError");
    } catch (const TrainingError& e) {
        CHECK(std::string(e.what()).find("layer/W") != std::string::npos);
    }
}

TEST_CASE("forward outputs stay finite on finite inputs") {
    std::mt19937_64 rng(99);
    ParamStore store;
    FeedForwardBlock block(&store, "b", {8, 4}, 2, Activation::Relu,
                           Activation::Sigmoid);
    block.bind(4, rng);
    VarPtr y = block.forward(constant(random_tensor(16, 4, rng, 100.0)));
    CHECK(y->value.all_finite());
}
