#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "poselab/ad/grad_check.hpp"
#include "poselab/ad/ops.hpp"
#include "poselab/ad/tensor.hpp"
#include "poselab/util/rng.hpp"

using namespace poselab;
using ad::Tensor;

namespace {

Tensor random_tensor(ad::Shape shape, rng::Generator& gen, bool requires_grad,
                     double lo = -1.0, double hi = 1.0) {
    std::vector<double> v(ad::shape_numel(shape));
    for (auto& x : v) x = gen.uniform(lo, hi);
    return Tensor(std::move(shape), std::move(v), requires_grad);
}

}  // namespace

TEST_CASE("elementwise forward values") {
    Tensor x({3}, {-1.0, 0.0, 2.0});
    CHECK(ad::relu(x).data() == std::vector<double>{0.0, 0.0, 2.0});

    Tensor z({1}, {0.0});
    CHECK(ad::exp(z).data()[0] == 1.0);

    Tensor a({2}, {1.0, 2.0});
    Tensor b({2}, {10.0, 20.0});
    CHECK(ad::add(a, b).data() == std::vector<double>{11.0, 22.0});
    CHECK(ad::sub(a, b).data() == std::vector<double>{-9.0, -18.0});
    CHECK(ad::mul(a, b).data() == std::vector<double>{10.0, 40.0});
    CHECK(ad::scale(a, 3.0).data() == std::vector<double>{3.0, 6.0});

    // scalar broadcast on either side
    Tensor s = Tensor::scalar(2.0);
    CHECK(ad::mul(s, b).data() == std::vector<double>{20.0, 40.0});
    CHECK(ad::add(b, s).data() == std::vector<double>{12.0, 22.0});
}

TEST_CASE("elementwise rejects shape mismatch naming both shapes") {
    Tensor a({2}, {1.0, 2.0});
    Tensor b({3}, {1.0, 2.0, 3.0});
    CHECK_THROWS_WITH(ad::add(a, b),
                      Catch::Matchers::ContainsSubstring("[2]") &&
                          Catch::Matchers::ContainsSubstring("[3]"));
}

TEST_CASE("backward of x*x at x=3 gives 6") {
    Tensor x = Tensor::scalar(3.0, true);
    ad::Tape tape;
    ad::TapeScope scope(tape);
    Tensor y = ad::mul(x, x);
    ad::backward(y);
    CHECK(x.grad()[0] == Catch::Approx(6.0));
}

TEST_CASE("matmul forward") {
    Tensor eye({3, 3}, {1, 0, 0, 0, 1, 0, 0, 0, 1});
    Tensor v({3}, {2.5, -1.0, 7.0});
    CHECK(ad::matmul(eye, v).data() == v.data());

    Tensor a({2, 2}, {1, 2, 3, 4});
    Tensor ones({2, 1}, {1, 1});
    auto out = ad::matmul(a, ones);
    CHECK(out.shape() == ad::Shape{2, 1});
    CHECK(out.data() == std::vector<double>{3.0, 7.0});

    Tensor bad({3, 1}, {1, 1, 1});
    CHECK_THROWS_AS(ad::matmul(a, bad), std::invalid_argument);
}

TEST_CASE("matmul gradient vs finite differences") {
    rng::Generator gen(42);
    Tensor a = random_tensor({4, 5}, gen, true);
    Tensor b = random_tensor({5, 3}, gen, true);
    std::vector<Tensor> params{a, b};
    double err = ad::grad_check(
        [&] { return ad::reduce_sum(ad::matmul(a, b)); }, params, 1e-6);
    CHECK(err < 1e-5);
}

TEST_CASE("conv2d identity and sum cases") {
    rng::Generator gen(7);
    Tensor img = random_tensor({1, 4, 4}, gen, false);
    Tensor unit({1, 1, 1, 1}, {1.0});
    auto out = ad::conv2d(img, unit, 1, 0);
    CHECK(out.shape() == img.shape());
    CHECK(out.data() == img.data());

    Tensor ones_in({1, 3, 3}, std::vector<double>(9, 1.0));
    Tensor ones_k({1, 1, 3, 3}, std::vector<double>(9, 1.0));
    auto s = ad::conv2d(ones_in, ones_k, 1, 0);
    CHECK(s.shape() == ad::Shape{1, 1, 1});
    CHECK(s.data()[0] == 9.0);

    // kernel larger than padded input is rejected
    Tensor small({1, 2, 2}, {1, 2, 3, 4});
    CHECK_THROWS_AS(ad::conv2d(small, ones_k, 1, 0), std::invalid_argument);
}

TEST_CASE("conv2d output geometry") {
    rng::Generator gen(11);
    Tensor img = random_tensor({2, 8, 8}, gen, false);
    Tensor k = random_tensor({4, 2, 3, 3}, gen, false);
    auto out = ad::conv2d(img, k, 2, 1);
    // floor((8 + 2 - 3)/2) + 1 = 4
    CHECK(out.shape() == ad::Shape{4, 4, 4});
}

TEST_CASE("conv2d gradient vs finite differences") {
    rng::Generator gen(13);
    Tensor img = random_tensor({2, 8, 8}, gen, true);
    Tensor k = random_tensor({4, 2, 3, 3}, gen, true);
    Tensor bias = random_tensor({4}, gen, true);
    std::vector<Tensor> params{img, k, bias};
    double err = ad::grad_check(
        [&] { return ad::reduce_sum(ad::conv2d(img, k, bias, 1, 1)); }, params,
        1e-6);
    CHECK(err < 1e-5);
}

TEST_CASE("reductions") {
    Tensor v({2}, {3.0, 4.0});
    CHECK(ad::l2norm(v).item() == Catch::Approx(5.0).epsilon(1e-12));

    Tensor m({3}, {1.0, 2.0, 3.0});
    CHECK(ad::reduce_mean(m).item() == Catch::Approx(2.0));
    CHECK(ad::reduce_sum(m).item() == Catch::Approx(6.0));

    ad::Tape tape;
    ad::TapeScope scope(tape);
    Tensor v2({2}, {3.0, 4.0}, true);
    ad::backward(ad::l2norm(v2));
    CHECK(v2.grad()[0] == Catch::Approx(0.6).margin(1e-9));
    CHECK(v2.grad()[1] == Catch::Approx(0.8).margin(1e-9));
}

TEST_CASE("l2norm gradient defined at zero residual") {
    ad::Tape tape;
    ad::TapeScope scope(tape);
    Tensor z({3}, {0.0, 0.0, 0.0}, true);
    ad::backward(ad::l2norm(z));
    for (double g : z.grad()) CHECK(std::isfinite(g));
}

TEST_CASE("structural forward") {
    Tensor a({2}, {1.0, 2.0});
    Tensor b({1}, {3.0});
    auto cat = ad::concat({a, b}, 0);
    CHECK(cat.data() == std::vector<double>{1.0, 2.0, 3.0});

    Tensor sq({1, 2, 2}, {1, 2, 3, 4});
    auto mp = ad::max_pool2d(sq, 2, 2);
    CHECK(mp.shape() == ad::Shape{1, 1, 1});
    CHECK(mp.data()[0] == 4.0);

    auto ap = ad::avg_pool2d(sq, 2, 2);
    CHECK(ap.data()[0] == Catch::Approx(2.5));

    auto sl = ad::slice(cat, 0, 1, 2);
    CHECK(sl.data() == std::vector<double>{2.0, 3.0});

    auto rs = ad::reshape(sq, {4});
    CHECK(rs.data() == sq.data());
    CHECK_THROWS_AS(ad::reshape(sq, {5}), std::invalid_argument);

    Tensor c({2}, {9.0, 9.0});
    Tensor d({2, 1}, {9.0, 9.0});
    CHECK_THROWS_AS(ad::concat({c, d}, 0), std::invalid_argument);
}

TEST_CASE("max_pool ties route to first row-major element") {
    ad::Tape tape;
    ad::TapeScope scope(tape);
    Tensor sq({1, 2, 2}, {5.0, 5.0, 5.0, 5.0}, true);
    ad::backward(ad::reduce_sum(ad::max_pool2d(sq, 2, 2)));
    CHECK(sq.grad() == std::vector<double>{1.0, 0.0, 0.0, 0.0});
}

TEST_CASE("avg_pool2d gradient vs finite differences") {
    rng::Generator gen(17);
    Tensor img = random_tensor({1, 4, 4}, gen, true);
    std::vector<Tensor> params{img};
    double err = ad::grad_check(
        [&] { return ad::reduce_sum(ad::avg_pool2d(img, 2, 2)); }, params, 1e-6);
    CHECK(err < 1e-5);
}

TEST_CASE("backward basics") {
    {
        ad::Tape tape;
        ad::TapeScope scope(tape);
        Tensor x = Tensor::scalar(0.0, true);
        ad::backward(ad::exp(x));
        CHECK(x.grad()[0] == Catch::Approx(1.0));
    }
    {
        ad::Tape tape;
        ad::TapeScope scope(tape);
        Tensor x = Tensor::scalar(1.5, true);
        Tensor y = Tensor::scalar(-0.5, true);
        ad::backward(ad::add(x, y));
        CHECK(x.grad()[0] == 1.0);
        CHECK(y.grad()[0] == 1.0);
    }
}

TEST_CASE("backward rejects non-scalar and foreign outputs") {
    ad::Tape tape;
    ad::TapeScope scope(tape);
    Tensor x({2}, {1.0, 2.0}, true);
    Tensor y = ad::scale(x, 2.0);
    CHECK_THROWS_AS(ad::backward(y), std::invalid_argument);

    ad::Tape other;
    Tensor s = Tensor::scalar(1.0, true);
    Tensor out;
    {
        ad::TapeScope inner(other);
        out = ad::mul(s, s);
    }
    // `out` was recorded on `other`, not on the active tape
    CHECK_THROWS_AS(ad::backward(out), std::runtime_error);
}

TEST_CASE("repeated backward without reset accumulates") {
    ad::Tape tape;
    ad::TapeScope scope(tape);
    Tensor x = Tensor::scalar(3.0, true);
    Tensor y = ad::mul(x, x);
    ad::backward(y);
    ad::backward(y);
    CHECK(x.grad()[0] == Catch::Approx(12.0));
}

TEST_CASE("tape reset drops recorded ops") {
    ad::Tape tape;
    ad::TapeScope scope(tape);
    Tensor x = Tensor::scalar(2.0, true);
    Tensor y = ad::mul(x, x);
    CHECK(tape.size() == 1);
    tape.reset();
    CHECK(tape.size() == 0);
    CHECK_THROWS_AS(ad::backward(y), std::runtime_error);  // y no longer owned
}

TEST_CASE("leaf without requires_grad keeps grad absent") {
    ad::Tape tape;
    ad::TapeScope scope(tape);
    Tensor x = Tensor::scalar(2.0, true);
    Tensor c = Tensor::scalar(5.0, false);
    ad::backward(ad::mul(x, c));
    CHECK(x.grad()[0] == 5.0);
    CHECK_FALSE(c.has_grad());
}

TEST_CASE("grad_check sanity bounds") {
    // linear function: exact for central differences
    Tensor w({3}, {0.5, -1.0, 2.0}, true);
    Tensor c({3}, {1.0, 2.0, 3.0});
    std::vector<Tensor> params{w};
    double err_lin = ad::grad_check(
        [&] { return ad::reduce_sum(ad::mul(w, c)); }, params, 1e-6);
    CHECK(err_lin < 1e-9);

    Tensor x = Tensor::scalar(1.0, true);
    std::vector<Tensor> px{x};
    double err_quad =
        ad::grad_check([&] { return ad::mul(x, x); }, px, 1e-6);
    CHECK(err_quad < 1e-8);
}

TEST_CASE("every differentiable op passes a random gradient check") {
    rng::Generator gen(2024);
    auto check = [&](auto graph, std::vector<Tensor> params, double tol = 1e-4) {
        double err = ad::grad_check(graph, params, 1e-6);
        CHECK(err < tol);
    };

    Tensor a = random_tensor({2, 3}, gen, true);
    Tensor b = random_tensor({2, 3}, gen, true);
    check([&] { return ad::reduce_sum(ad::add(a, b)); }, {a, b});
    check([&] { return ad::reduce_sum(ad::sub(a, b)); }, {a, b});
    check([&] { return ad::reduce_sum(ad::mul(a, b)); }, {a, b});
    check([&] { return ad::reduce_sum(ad::relu(a)); }, {a});
    check([&] { return ad::reduce_sum(ad::sigmoid(a)); }, {a});
    check([&] { return ad::reduce_sum(ad::tanh(a)); }, {a});
    check([&] { return ad::reduce_sum(ad::exp(a)); }, {a});
    check([&] { return ad::reduce_sum(ad::scale(a, -2.5)); }, {a});
    check([&] { return ad::reduce_mean(ad::mul(a, a)); }, {a});
    check([&] { return ad::l2norm(a); }, {a});

    Tensor s = Tensor::scalar(0.7, true);
    check([&] { return ad::reduce_sum(ad::mul(a, s)); }, {a, s});

    Tensor m1 = random_tensor({3, 4}, gen, true);
    Tensor m2 = random_tensor({4, 2}, gen, true);
    check([&] { return ad::reduce_sum(ad::matmul(m1, m2)); }, {m1, m2});

    Tensor img = random_tensor({2, 6, 6}, gen, true);
    Tensor k = random_tensor({3, 2, 3, 3}, gen, true);
    check([&] { return ad::reduce_sum(ad::conv2d(img, k, 2, 1)); }, {img, k});
    check([&] { return ad::reduce_sum(ad::max_pool2d(img, 2, 2)); }, {img});
    check([&] { return ad::reduce_sum(ad::avg_pool2d(img, 3, 1, 1)); }, {img});
    check([&] { return ad::reduce_sum(ad::slice(img, 1, 1, 3)); }, {img});
    check([&] { return ad::reduce_sum(ad::concat({a, b}, 1)); }, {a, b});
    check([&] { return ad::l2norm(ad::reshape(img, {72})); }, {img});
}

TEST_CASE("uncertainty-weighted loss graph matches finite differences") {
    // position/orientation residual norms weighted by exp(-s) + s, built from
    // raw ops; the bridge result the whole training stack depends on.
    rng::Generator gen(99);
    Tensor x = random_tensor({3}, gen, false);
    Tensor x_pred = random_tensor({3}, gen, true);
    Tensor q = random_tensor({4}, gen, false);
    Tensor q_pred = random_tensor({4}, gen, true);
    Tensor s_x = Tensor::scalar(0.3, true);
    Tensor s_q = Tensor::scalar(-2.0, true);

    auto loss = [&] {
        auto term_x = ad::mul(ad::l2norm(ad::sub(x_pred, x)),
                              ad::exp(ad::scale(s_x, -1.0)));
        auto term_q = ad::mul(ad::l2norm(ad::sub(q_pred, q)),
                              ad::exp(ad::scale(s_q, -1.0)));
        return ad::add(ad::add(term_x, s_x), ad::add(term_q, s_q));
    };
    std::vector<Tensor> params{x_pred, q_pred, s_x, s_q};
    double err = ad::grad_check(loss, params, 1e-5);
    CHECK(err < 1e-4);
}

TEST_CASE("forward evaluation is deterministic") {
    rng::Generator gen(5);
    Tensor a = random_tensor({2, 5, 5}, gen, false);
    Tensor k = random_tensor({3, 2, 3, 3}, gen, false);
    auto r1 = ad::conv2d(a, k, 1, 1);
    auto r2 = ad::conv2d(a, k, 1, 1);
    CHECK(r1.data() == r2.data());
}
