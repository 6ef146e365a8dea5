#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

#include "chaosssl/errors.hpp"
#include "chaosssl/tensor.hpp"
#include "test_util.hpp"

using namespace chaosssl;
using testutil::normal;

namespace {

// Central differences written out by hand, independent of finite_diff_grad.
std::vector<double> central_diff(const std::function<double()>& f, Tensor x, double h) {
    std::vector<double> out(x.numel());
    auto data = x.mutable_data();
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double keep = data[i];
        data[i] = keep + h;
        const double up = f();
        data[i] = keep - h;
        const double down = f();
        data[i] = keep;
        out[i] = (up - down) / (2.0 * h);
    }
    return out;
}

void check_grad(const Tensor& x, const std::vector<double>& numeric, double tol) {
    REQUIRE(x.has_grad());
    for (std::size_t i = 0; i < numeric.size(); ++i) {
        INFO("index " << i << " analytic " << x.grad()[i] << " numeric " << numeric[i]);
        CHECK(testutil::rel_err(x.grad()[i], numeric[i]) <= tol);
    }
}

}  // namespace

TEST_CASE("tensor construction validates shape and data") {
    CHECK_THROWS_AS(Tensor::from({2, 3}, {1, 2, 3}), DimensionError);
    CHECK_THROWS_AS(Tensor::zeros({2, 0}), DimensionError);
    const Tensor t = Tensor::from({2, 3}, {1, 2, 3, 4, 5, 6});
    CHECK(t.numel() == 6);
    CHECK(t.at(1, 2) == 6.0);
    CHECK_FALSE(t.has_grad());
    CHECK(Tensor::scalar(2.5).item() == 2.5);
    CHECK_THROWS_AS(t.item(), ContractError);
}

TEST_CASE("matmul examples") {
    SUBCASE("identity leaves A unchanged") {
        Rng rng(1);
        const Tensor a = normal({2, 5}, rng);
        const Tensor eye = Tensor::from({2, 2}, {1, 0, 0, 1});
        const Tensor out = matmul(eye, a);
        CHECK(out.shape() == a.shape());
        for (std::size_t i = 0; i < a.numel(); ++i) CHECK(out.data()[i] == a.data()[i]);
    }
    SUBCASE("hand sum") {
        const Tensor out = matmul(Tensor::from({2, 2}, {1, 2, 3, 4}), Tensor::from({2, 1}, {1, 1}));
        CHECK(out.shape() == Shape{2, 1});
        CHECK(out.data()[0] == 3.0);
        CHECK(out.data()[1] == 7.0);
    }
    SUBCASE("inner dimension mismatch") {
        CHECK_THROWS_AS(matmul(Tensor::zeros({2, 3}), Tensor::zeros({2, 3})), DimensionError);
    }
    SUBCASE("gradient of sum(a b) w.r.t. a is ones bᵀ and matches central differences") {
        Rng rng(2);
        Tensor a = normal({3, 4}, rng, true);
        const Tensor b = normal({4, 2}, rng);
        backward(sum(matmul(a, b)));
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t k = 0; k < 4; ++k)
                CHECK(a.grad()[i * 4 + k] == doctest::Approx(b.at(k, 0) + b.at(k, 1)).epsilon(1e-14));
        check_grad(a, central_diff([&] { return sum(matmul(a, b)).item(); }, a, 1e-6), 1e-6);
    }
}

TEST_CASE("linear and transpose agree with matmul") {
    Rng rng(3);
    const Tensor x = normal({5, 4}, rng);
    const Tensor w = normal({3, 4}, rng);
    const Tensor b = normal({3}, rng);
    const Tensor y = linear(x, w, b);
    const Tensor ref = add_rowwise(matmul(x, transpose(w)), b);
    CHECK(testutil::max_abs_diff(y.data(), ref.data()) <= 1e-14);
    CHECK_THROWS_AS(linear(x, Tensor::zeros({3, 5})), DimensionError);
}

TEST_CASE("elementwise examples") {
    CHECK(sigmoid(Tensor::scalar(0.0)).item() == 0.5);
    CHECK(relu(Tensor::scalar(-3.0)).item() == 0.0);
    CHECK(relu(Tensor::scalar(3.0)).item() == 3.0);
    const double eps = 1e-6;
    CHECK(clamp(Tensor::scalar(1.0), eps, 1.0 - eps).item() == 1.0 - eps);
    CHECK(clamp(Tensor::scalar(1.0), eps, 1.0 - eps).item() == doctest::Approx(0.999999).epsilon(1e-15));
    CHECK(sigmoid(Tensor::scalar(-800.0)).item() >= 0.0);
    CHECK(sigmoid(Tensor::scalar(800.0)).item() == 1.0);
    CHECK_THROWS_AS(log(Tensor::scalar(0.0)), DomainError);
    CHECK_THROWS_AS(log(Tensor::scalar(-1.0)), DomainError);
    CHECK_THROWS_AS(add(Tensor::zeros({2, 2}), Tensor::zeros({2, 3})), DimensionError);
    // Single-element broadcast.
    const Tensor s = mul(Tensor::from({3}, {1, 2, 3}), Tensor::scalar(2.0));
    CHECK(s.data()[2] == 6.0);
}

TEST_CASE("elementwise gradients match central differences") {
    Rng rng(4);
    Tensor a = normal({2, 3}, rng, true);
    Tensor b = normal({2, 3}, rng, true);
    // Keep log's argument positive.
    auto f = [&] {
        return sum(add(mul(sigmoid(a), exp(scale(b, 0.3))), log(add(mul(a, a), Tensor::scalar(1.0)))) -
                   relu(sub(a, b)) + clamp(b, -0.5, 0.5));
    };
    backward(f());
    check_grad(a, central_diff([&] { return f().item(); }, a, 1e-6), 1e-6);
    check_grad(b, central_diff([&] { return f().item(); }, b, 1e-6), 1e-6);
}

TEST_CASE("softmax examples and stability") {
    SUBCASE("uniform") {
        const Tensor p = softmax(Tensor::from({1, 3}, {0, 0, 0}));
        for (double v : p.data()) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    }
    SUBCASE("large logits do not overflow") {
        const Tensor p = softmax(Tensor::from({1, 2}, {1000, 0}));
        CHECK(std::isfinite(p.data()[0]));
        CHECK(p.data()[0] == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(p.data()[1] >= 0.0);
        CHECK(p.data()[1] < 1e-300);
    }
    SUBCASE("[1,2,3] against direct evaluation") {
        const Tensor p = softmax(Tensor::from({1, 3}, {1, 2, 3}));
        const double z = std::exp(1.0) + std::exp(2.0) + std::exp(3.0);
        const double expected[] = {std::exp(1.0) / z, std::exp(2.0) / z, std::exp(3.0) / z};
        const double published[] = {0.09003057, 0.24472847, 0.66524096};
        for (int i = 0; i < 3; ++i) {
            CHECK(p.data()[i] == doctest::Approx(expected[i]).epsilon(1e-14));
            CHECK(std::abs(p.data()[i] - published[i]) <= 5e-9);
        }
    }
    SUBCASE("rows sum to one for |x| <= 1000") {
        Rng rng(5);
        std::uniform_real_distribution<double> big(-1000.0, 1000.0);
        for (int trial = 0; trial < 100; ++trial) {
            std::vector<double> v(4 * 7);
            for (double& x : v) x = big(rng);
            const Tensor p = softmax(Tensor::from({4, 7}, v));
            for (std::size_t r = 0; r < 4; ++r) {
                double s = 0.0;
                for (std::size_t c = 0; c < 7; ++c) {
                    CHECK(p.at(r, c) >= 0.0);
                    s += p.at(r, c);
                }
                CHECK(std::abs(s - 1.0) <= 1e-12);
            }
        }
    }
    SUBCASE("log_softmax equals log of softmax") {
        Rng rng(6);
        const Tensor x = normal({3, 5}, rng);
        const Tensor a = log_softmax(x);
        const Tensor b = softmax(x);
        for (std::size_t i = 0; i < a.numel(); ++i) CHECK(a.data()[i] == doctest::Approx(std::log(b.data()[i])).epsilon(1e-13));
    }
}

TEST_CASE("row-wise reductions") {
    const Tensor x = Tensor::from({2, 3}, {1, 2, 3, 0, -1, 4});
    const Tensor full = logsumexp_rows(x);
    CHECK(full.data()[0] == doctest::Approx(std::log(std::exp(1.0) + std::exp(2.0) + std::exp(3.0))).epsilon(1e-15));
    const Tensor off = logsumexp_rows(Tensor::from({2, 2}, {9, 1, 2, 9}), true);
    CHECK(off.data()[0] == 1.0);
    CHECK(off.data()[1] == 2.0);
    const std::vector<std::size_t> cols{2, 0};
    const Tensor g = gather_cols(x, cols);
    CHECK(g.data()[0] == 3.0);
    CHECK(g.data()[1] == 0.0);
    CHECK_THROWS_AS(normalize_rows(Tensor::from({2, 2}, {1, 0, 0, 0})), DomainError);
    const Tensor n = normalize_rows(Tensor::from({1, 2}, {3, 4}));
    CHECK(n.data()[0] == doctest::Approx(0.6).epsilon(1e-15));
    const Tensor cc = concat_cols(Tensor::from({1, 1}, {1}), Tensor::from({1, 2}, {2, 3}));
    CHECK(cc.shape() == Shape{1, 3});
    CHECK(cc.data()[2] == 3.0);
    const Tensor cr = concat_rows(Tensor::from({1, 2}, {1, 2}), Tensor::from({1, 2}, {3, 4}));
    CHECK(cr.shape() == Shape{2, 2});
    CHECK(cr.at(1, 0) == 3.0);
}

TEST_CASE("row-wise op gradients match central differences") {
    Rng rng(7);
    Tensor x = normal({4, 3}, rng, true);
    const std::vector<std::size_t> cols{1, 0, 2, 1};
    const Tensor w = normal({4, 3}, rng);
    auto f = [&] {
        const Tensor n = normalize_rows(x);
        const Tensor both = concat_rows(concat_cols(n, x), concat_cols(x, n));
        return mean(logsumexp_rows(matmul(both, transpose(both)), true)) + sum(gather_cols(x, cols)) +
               sum(mul(log_softmax(x), w)) + sum(mul(softmax(x), w));
    };
    backward(f());
    check_grad(x, central_diff([&] { return f().item(); }, x, 1e-6), 1e-6);
}

TEST_CASE("backward examples") {
    SUBCASE("sum of a vector") {
        Tensor w = Tensor::from({5}, {1, -2, 3, 0.5, 7}, true);
        backward(sum(w));
        for (double g : w.grad()) CHECK(g == 1.0);
    }
    SUBCASE("sigmoid(w) * w against the closed form") {
        for (double v : {-2.0, -0.3, 0.0, 0.7, 3.0}) {
            Tensor w = Tensor::scalar(v, true);
            backward(mul(sigmoid(w), w));
            const double s = 1.0 / (1.0 + std::exp(-v));
            CHECK(w.grad()[0] == doctest::Approx(s + v * s * (1.0 - s)).epsilon(1e-14));
        }
    }
    SUBCASE("shared subexpressions accumulate") {
        Tensor w = Tensor::scalar(3.0, true);
        const Tensor y = mul(w, w);
        backward(add(y, y));  // 2 w^2 -> 4 w
        CHECK(w.grad()[0] == 12.0);
    }
    SUBCASE("non-scalar loss is rejected") {
        Tensor w = Tensor::from({2}, {1, 2}, true);
        CHECK_THROWS_AS(backward(scale(w, 2.0)), ContractError);
    }
    SUBCASE("tensors without requires_grad get no gradient") {
        Tensor w = Tensor::from({2}, {1, 2}, true);
        const Tensor c = Tensor::from({2}, {3, 4});
        backward(sum(mul(w, c)));
        CHECK_FALSE(c.has_grad());
        CHECK(w.grad()[1] == 4.0);
    }
    SUBCASE("repeated backward is deterministic") {
        Rng rng(8);
        Tensor a = normal({3, 3}, rng, true);
        backward(sum(relu(matmul(a, a))));
        const std::vector<double> first(a.grad().begin(), a.grad().end());
        a.zero_grad();
        backward(sum(relu(matmul(a, a))));
        for (std::size_t i = 0; i < first.size(); ++i) CHECK(first[i] == a.grad()[i]);
    }
}

TEST_CASE("graph order is topological and visits each node once") {
    Rng rng(9);
    Tensor a = normal({2, 2}, rng, true);
    const Tensor b = sigmoid(a);
    const Tensor c = mul(b, a);
    const Tensor d = add(c, b);
    const Tensor loss = sum(mul(d, d));
    const Graph g(loss);
    std::set<const void*> seen;
    std::map<const void*, std::size_t> position;
    for (std::size_t i = 0; i < g.order().size(); ++i) {
        const auto* key = g.order()[i].handle().get();
        CHECK(seen.insert(key).second);
        position[key] = i;
    }
    for (std::size_t i = 0; i < g.order().size(); ++i) {
        const auto& impl = g.order()[i].handle();
        if (!impl->creator) continue;
        for (const auto& in : impl->creator->inputs) {
            REQUIRE(position.count(in.get()));
            CHECK(position[in.get()] < i);
        }
    }
    CHECK(g.order().back().same_storage(loss));
    CHECK(g.node_count() == 5);  // sigmoid, mul, add, mul, sum
}

TEST_CASE("finite_diff_grad examples") {
    SUBCASE("quadratic") {
        const Tensor x = Tensor::scalar(3.0);
        const Tensor g = finite_diff_grad([](const Tensor& t) { return t.item() * t.item(); }, x, 1e-5);
        CHECK(std::abs(g.item() - 6.0) <= 1e-6);
        CHECK(x.item() == 3.0);  // restored
    }
    SUBCASE("constant function") {
        const Tensor x = Tensor::from({4}, {1, 2, 3, 4});
        const Tensor g = finite_diff_grad([](const Tensor&) { return 7.0; }, x, 1e-5);
        for (double v : g.data()) CHECK(v == 0.0);
    }
    SUBCASE("agrees with backward on a smooth composite") {
        Rng rng(10);
        Tensor x = normal({3, 4}, rng, true);
        auto f = [](const Tensor& t) { return mean(exp(scale(softmax(t), 2.0))); };
        backward(f(x));
        const Tensor g = finite_diff_grad([&](const Tensor& t) { return f(t).item(); }, x, 1e-6);
        check_grad(x, std::vector<double>(g.data().begin(), g.data().end()), 1e-6);
    }
}

TEST_CASE("detach and clone copy storage") {
    Tensor w = Tensor::from({2}, {1, 2}, true);
    const Tensor d = w.detach();
    const Tensor c = w.clone();
    CHECK_FALSE(d.same_storage(w));
    CHECK_FALSE(d.requires_grad());
    CHECK(c.requires_grad());
    w.mutable_data()[0] = 5.0;
    CHECK(d.data()[0] == 1.0);
    CHECK(c.data()[0] == 1.0);
}
