#include <doctest.h>

#include <cmath>
#include <numbers>

#include "chaosssl/contrastive.hpp"
#include "chaosssl/dataset.hpp"
#include "chaosssl/errors.hpp"
#include "chaosssl/finetune.hpp"
#include "test_util.hpp"

using namespace chaosssl;
using testutil::normal;

namespace {

DatasetSplit small_split(std::uint64_t seed) {
    TextureDatasetSpec spec;
    spec.images_per_class = 48;
    spec.height = spec.width = 12;
    spec.seed = seed;
    return gen_dataset(spec);
}

Classifier random_classifier(std::size_t input_dim, std::size_t classes, Rng& rng) {
    Mlp enc = make_encoder({input_dim, {32}, 16}, rng);
    return {std::move(enc), ClassifierHead::random(16, classes, rng)};
}

}  // namespace

TEST_CASE("cross-entropy hand values") {
    SUBCASE("uniform logits over four classes give ln 4") {
        const Tensor logits = Tensor::zeros({3, 4});
        const std::vector<int> y{0, 2, 3};
        CHECK(std::abs(cross_entropy(logits, y).item() - std::log(4.0)) <= 1e-12);
    }
    SUBCASE("uniform logits give ln M for every M") {
        for (std::size_t m = 2; m <= 10; ++m) {
            const std::vector<int> y{0, static_cast<int>(m - 1)};
            CHECK(std::abs(cross_entropy(Tensor::full({2, m}, 3.7), y).item() - std::log(static_cast<double>(m))) <= 1e-12);
        }
    }
    SUBCASE("a margin of 1000 on the true class gives essentially zero") {
        const Tensor logits = Tensor::from({2, 3}, {1000, 0, 0, 0, 0, 1000});
        const std::vector<int> y{0, 2};
        const double l = cross_entropy(logits, y).item();
        CHECK(l >= 0.0);
        CHECK(l <= 1e-300);
    }
    SUBCASE("malformed labels are rejected") {
        const Tensor logits = Tensor::zeros({2, 3});
        CHECK_THROWS_AS(cross_entropy(logits, std::vector<int>{0, 3}), ContractError);
        CHECK_THROWS_AS(cross_entropy(logits, Tensor::from({2, 3}, {1, 1, 0, 0, 0, 1})), ContractError);
        CHECK_THROWS_AS(cross_entropy(logits, Tensor::from({2, 3}, {0.5, 0.5, 0, 0, 0, 1})), ContractError);
        CHECK_THROWS_AS(cross_entropy(logits, Tensor::zeros({2, 4})), DimensionError);
    }
}

TEST_CASE("cross-entropy gradient is (softmax - y) / B") {
    Rng rng(1);
    Tensor logits = normal({5, 4}, rng, true);
    const std::vector<int> y{0, 3, 1, 1, 2};
    backward(cross_entropy(logits, y));
    for (std::size_t i = 0; i < 5; ++i) {
        double z = 0.0;
        for (std::size_t j = 0; j < 4; ++j) z += std::exp(logits.at(i, j));
        for (std::size_t j = 0; j < 4; ++j) {
            const double p = std::exp(logits.at(i, j)) / z;
            const double expected = (p - (static_cast<int>(j) == y[i] ? 1.0 : 0.0)) / 5.0;
            CHECK(std::abs(logits.grad()[i * 4 + j] - expected) <= 1e-14);
        }
    }
    const Tensor fd = finite_diff_grad([&](const Tensor&) { return cross_entropy(logits, y).item(); }, logits, 1e-6);
    for (std::size_t i = 0; i < logits.numel(); ++i) CHECK(testutil::rel_err(logits.grad()[i], fd.data()[i]) <= 1e-6);
}

TEST_CASE("cosine annealing schedule") {
    CHECK(cosine_annealing_lr(0, 10, 1e-3, 0.0) == 1e-3);
    CHECK(cosine_annealing_lr(10, 10, 1e-3, 0.0) == 0.0);
    CHECK(cosine_annealing_lr(5, 10, 1e-3, 0.0) == 5e-4);
    CHECK(cosine_annealing_lr(5, 10, 1e-3, 1e-4) == doctest::Approx(5.5e-4).epsilon(1e-15));
    double prev = 1.0;
    for (int t = 0; t <= 30; ++t) {
        const double lr = cosine_annealing_lr(t, 30, 1e-3, 1e-5);
        CHECK(lr <= prev);
        CHECK(lr >= 1e-5);
        CHECK(std::abs(lr - (1e-5 + 0.5 * (1e-3 - 1e-5) * (1 + std::cos(std::numbers::pi * t / 30)))) <= 1e-18);
        prev = lr;
    }
    CHECK_THROWS_AS(cosine_annealing_lr(11, 10, 1e-3, 0.0), ContractError);
    CHECK_THROWS_AS(cosine_annealing_lr(0, 0, 1e-3, 0.0), ContractError);
}

TEST_CASE("argmax") {
    SUBCASE("ties go to the lowest index") {
        CHECK(argmax_rows(Tensor::from({2, 3}, {1, 1, 1, 0, 2, 2})) == std::vector<int>{0, 1});
    }
    SUBCASE("adding a constant to a row leaves it unchanged") {
        Rng rng(2);
        const Tensor logits = normal({20, 5}, rng);
        std::vector<double> shifted(logits.data().begin(), logits.data().end());
        for (std::size_t i = 0; i < 20; ++i)
            for (std::size_t j = 0; j < 5; ++j) shifted[i * 5 + j] += 0.25 * static_cast<double>(i);
        CHECK(argmax_rows(logits) == argmax_rows(Tensor::from({20, 5}, shifted)));
    }
    SUBCASE("accuracy") {
        CHECK(accuracy(std::vector<int>{0, 1, 2, 2}, std::vector<int>{0, 1, 1, 2}) == 0.75);
        CHECK_THROWS_AS(accuracy(std::vector<int>{0}, std::vector<int>{0, 1}), ContractError);
    }
}

TEST_CASE("fine-tuning") {
    const DatasetSplit split = small_split(1);
    const std::size_t dim = split.train.images.front().size();

    SUBCASE("zero epochs leave the model untouched") {
        Rng rng(3);
        Classifier model = random_classifier(dim, 4, rng);
        const Mlp before = model.encoder.clone();
        FinetuneConfig cfg;
        cfg.epochs = 0;
        const auto history = finetune(model, split.train.view(), cfg);
        CHECK(history.epoch_losses.empty());
        for (std::size_t i = 0; i < before.parameters().size(); ++i)
            CHECK(bit_identical(before.parameters()[i], model.encoder.parameters()[i]));
    }
    SUBCASE("a zero learning rate leaves the model untouched") {
        Rng rng(4);
        Classifier model = random_classifier(dim, 4, rng);
        const Mlp before = model.encoder.clone();
        const Tensor head_before = model.head.layer.weight.clone();
        FinetuneConfig cfg;
        cfg.epochs = 2;
        cfg.lr_max = 0.0;
        const auto history = finetune(model, split.train.view(), cfg);
        CHECK(history.epoch_lrs == std::vector<double>{0.0, 0.0});
        for (std::size_t i = 0; i < before.parameters().size(); ++i)
            CHECK(bit_identical(before.parameters()[i], model.encoder.parameters()[i]));
        CHECK(bit_identical(head_before, model.head.layer.weight));
    }
    SUBCASE("the learning rate follows the schedule per epoch") {
        Rng rng(5);
        Classifier model = random_classifier(dim, 4, rng);
        FinetuneConfig cfg;
        cfg.epochs = 4;
        const auto history = finetune(model, split.train.view(), cfg);
        REQUIRE(history.epoch_lrs.size() == 4);
        for (int e = 0; e < 4; ++e) CHECK(history.epoch_lrs[e] == cosine_annealing_lr(e, 4, 1e-3, 0.0));
    }
    SUBCASE("mismatched heads are rejected") {
        Rng rng(6);
        Classifier model = random_classifier(dim, 3, rng);
        CHECK_THROWS_AS(finetune(model, split.train.view(), FinetuneConfig{}), ContractError);
    }
    SUBCASE("same seed, same weights") {
        FinetuneConfig cfg;
        cfg.epochs = 2;
        cfg.seed = 9;
        Rng ra(7), rb(7);
        Classifier a = random_classifier(dim, 4, ra);
        Classifier b = random_classifier(dim, 4, rb);
        CHECK(finetune(a, split.train.view(), cfg).epoch_losses == finetune(b, split.train.view(), cfg).epoch_losses);
        for (std::size_t i = 0; i < a.encoder.parameters().size(); ++i)
            CHECK(bit_identical(a.encoder.parameters()[i], b.encoder.parameters()[i]));
    }
}

TEST_CASE("fine-tuning lifts training accuracy above chance") {
    for (std::uint64_t seed : {0u, 1u, 2u}) {
        const DatasetSplit split = small_split(10 + seed);
        Rng rng(20 + seed);
        Classifier model = random_classifier(split.train.images.front().size(), 4, rng);
        FinetuneConfig cfg;
        cfg.epochs = 10;
        cfg.batch_size = 16;
        cfg.seed = seed;
        const auto history = finetune(model, split.train.view(), cfg);
        const double acc = accuracy(predict(model, split.train.images), split.train.labels);
        INFO("seed " << seed << " train accuracy " << acc);
        CHECK(history.epoch_losses.back() < history.epoch_losses.front());
        CHECK(acc > 0.5);
    }
}
