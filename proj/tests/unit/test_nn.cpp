#include "doctest.h"

#include <cmath>
#include <filesystem>

#include "acd/errors.hpp"
#include "acd/nn.hpp"

using namespace acd;
using Rng = std::mt19937_64;

namespace {

// Scalar loss L = sum(w .* y) for a fixed random weighting w, so dL/dy = w.
double weighted_loss(const Mlp& net, const Eigen::MatrixXd& x, const Eigen::MatrixXd& w) {
    return (net.forward_batch(x).array() * w.array()).sum();
}

double max_relative_fd_error(Mlp& net, const Eigen::MatrixXd& x, const Eigen::MatrixXd& w) {
    const auto cache = net.forward_cached(x);
    const auto grads = net.backward(cache, w);
    const double h = 1e-5;
    double worst = 0.0;
    auto check = [&](double& p, double analytic) {
        const double saved = p;
        p = saved + h;
        const double up = weighted_loss(net, x, w);
        p = saved - h;
        const double down = weighted_loss(net, x, w);
        p = saved;
        const double numeric = (up - down) / (2 * h);
        const double err = std::abs(numeric - analytic) / std::max(1.0, std::abs(numeric) + std::abs(analytic));
        worst = std::max(worst, err);
    };
    auto& layers = net.mutable_layers();
    for (std::size_t l = 0; l < layers.size(); ++l) {
        for (Eigen::Index i = 0; i < layers[l].weights.size(); ++i)
            check(layers[l].weights.data()[i], grads.layers[l].weights.data()[i]);
        for (Eigen::Index i = 0; i < layers[l].bias.size(); ++i)
            check(layers[l].bias(i), grads.layers[l].bias(i));
    }
    return worst;
}

}  // namespace

TEST_CASE("forward arithmetic") {
    auto net = Mlp::zeros({1, 1});
    net.mutable_layers()[0].weights(0, 0) = 2.0;
    net.mutable_layers()[0].bias(0) = 1.0;
    Eigen::VectorXd x(1);
    x << 3.0;
    CHECK(net.forward(x)(0) == 7.0);

    const auto cache = net.forward_cached(x);
    const auto g = net.backward(cache, Eigen::MatrixXd::Ones(1, 1));
    CHECK(g.layers[0].weights(0, 0) == 3.0);
    CHECK(g.layers[0].bias(0) == 1.0);

    auto z = Mlp::zeros({4, 8, 3});
    CHECK(z.forward(Eigen::VectorXd::Random(4)).isZero());
    CHECK_THROWS_AS(z.forward(Eigen::VectorXd::Zero(5)), InputError);
}

TEST_CASE("random net gives finite outputs") {
    Rng rng(1);
    Mlp net({54, 64, 64, 78}, rng);
    CHECK(net.parameter_count() == 54 * 64 + 64 + 64 * 64 + 64 + 64 * 78 + 78);
    std::normal_distribution<double> n(0.0, 3.0);
    for (int i = 0; i < 20; ++i) {
        Eigen::VectorXd x(54);
        for (auto& v : x) v = n(rng);
        CHECK(net.forward(x).allFinite());
    }
}

TEST_CASE("analytic gradients match central differences") {
    Rng rng(7);
    const std::vector<std::vector<std::size_t>> archs = {{3, 5, 2}, {6, 4, 4, 3}, {54, 8, 8, 5}};
    for (const auto& dims : archs) {
        for (int trial = 0; trial < 10; ++trial) {
            Mlp net(dims, rng);
            const Eigen::MatrixXd x = Eigen::MatrixXd::Random(static_cast<Eigen::Index>(dims.front()), 3);
            const Eigen::MatrixXd w = Eigen::MatrixXd::Random(static_cast<Eigen::Index>(dims.back()), 3);
            CHECK(max_relative_fd_error(net, x, w) < 1e-4);
        }
    }
}

TEST_CASE("zero upstream gradient gives zero parameter gradient") {
    Rng rng(2);
    Mlp net({4, 6, 2}, rng);
    const auto cache = net.forward_cached(Eigen::MatrixXd::Random(4, 5));
    CHECK(net.backward(cache, Eigen::MatrixXd::Zero(2, 5)).all_zero());
}

TEST_CASE("stale cache is rejected") {
    Rng rng(2);
    Mlp net({4, 6, 2}, rng);
    const auto cache = net.forward_cached(Eigen::MatrixXd::Random(4, 1));
    net.mutable_layers()[0].bias(0) += 1.0;
    CHECK_THROWS_AS(net.backward(cache, Eigen::MatrixXd::Ones(2, 1)), StateError);
}

TEST_CASE("adam first step moves by the learning rate") {
    Rng rng(3);
    Mlp net({3, 4, 2}, rng);
    const Mlp before = net;
    Adam opt(net, AdamConfig{0.01});
    auto g = net.zero_gradients();
    adam_step(net, g, opt);
    for (std::size_t l = 0; l < net.layers().size(); ++l)
        CHECK(net.layers()[l].weights.isApprox(before.layers()[l].weights));

    Adam fresh(net, AdamConfig{0.01});
    const Mlp start = net;
    for (auto& layer : g.layers) {
        layer.weights.setOnes();
        layer.bias.setOnes();
    }
    fresh.step(net, g);
    for (std::size_t l = 0; l < net.layers().size(); ++l) {
        const Eigen::MatrixXd dw = net.layers()[l].weights - start.layers()[l].weights;
        CHECK(dw.maxCoeff() == doctest::Approx(-0.01).epsilon(1e-5));
        CHECK(dw.minCoeff() == doctest::Approx(-0.01).epsilon(1e-5));
    }
}

TEST_CASE("gradient clipping") {
    auto net = Mlp::zeros({1, 1});
    auto g = net.zero_gradients();
    g.layers[0].weights(0, 0) = 3.0;
    g.layers[0].bias(0) = 4.0;
    CHECK(g.norm() == doctest::Approx(5.0));
    auto c = g;
    CHECK(clip_grad_norm(c, 0.5) == doctest::Approx(5.0));
    CHECK(c.norm() == doctest::Approx(0.5));
    Adam opt(net, AdamConfig{});
    CHECK(adam_step(net, g, opt, 0.5) == doctest::Approx(0.5));
    auto small = g;
    small.scale(0.01);
    CHECK(clip_grad_norm(small, 0.5) == doctest::Approx(0.05));
    CHECK(small.norm() == doctest::Approx(0.05));
}

TEST_CASE("softmax") {
    Eigen::VectorXd z = Eigen::VectorXd::Zero(3);
    const auto p = softmax(z);
    for (int i = 0; i < 3; ++i) CHECK(p(i) == doctest::Approx(1.0 / 3));
    Eigen::VectorXd big(2);
    big << 1000.0, 0.0;
    const auto q = softmax(big);
    CHECK(q(0) == doctest::Approx(1.0));
    CHECK(q(1) == doctest::Approx(0.0));
    CHECK(q.allFinite());
    CHECK(log_softmax(big).allFinite());

    Rng rng(5);
    std::normal_distribution<double> n(0.0, 10.0);
    for (int t = 0; t < 100; ++t) {
        Eigen::VectorXd l(78);
        for (auto& v : l) v = n(rng);
        CHECK(std::abs(softmax(l).sum() - 1.0) < 1e-12);
        CHECK((log_softmax(l).array().exp() - softmax(l).array()).abs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("model persistence round trip") {
    Rng rng(9);
    ModelFile m;
    m.algorithm = "dqn";
    m.feature_layout = "layout-A";
    m.action_encoding = "enc-A";
    m.networks["q"] = Mlp({5, 7, 3}, rng);
    m.metadata["note"] = "x";
    const auto path = std::filesystem::temp_directory_path() / "acd_nn_roundtrip.json";
    save_model(path, m);
    const auto back = load_model(path);
    std::filesystem::remove(path);
    CHECK(back.algorithm == "dqn");
    const Eigen::VectorXd x = Eigen::VectorXd::Random(5);
    CHECK(back.networks.at("q").forward(x).isApprox(m.networks.at("q").forward(x), 1e-15));
    CHECK_NOTHROW(check_model_compatible(back, "layout-A", "enc-A"));
    CHECK_THROWS_AS(check_model_compatible(back, "layout-B", "enc-A"), InputError);
    CHECK_THROWS_AS(check_model_compatible(back, "layout-A", "enc-B"), InputError);
}
