#include <cmath>
#include <sstream>

#include "doctest.h"
#include "hpgan/neural.hpp"

using namespace hpgan;

namespace {

MlpArch arch(std::vector<std::size_t> widths, OutputActivation out) { return {std::move(widths), out}; }

bool same(const Mlp& a, const Mlp& b) {
  if (a.layers.size() != b.layers.size()) return false;
  for (std::size_t i = 0; i < a.layers.size(); ++i)
    if (a.layers[i].weight != b.layers[i].weight || a.layers[i].bias != b.layers[i].bias) return false;
  return true;
}

bool same(const LayerTensors& a, const LayerTensors& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].weight != b[i].weight || a[i].bias != b[i].bias) return false;
  return true;
}

}  // namespace

TEST_CASE("architecture validation") {
  CHECK_THROWS(arch({3}, OutputActivation::Tanh).validate());
  CHECK_THROWS(arch({3, 0, 2}, OutputActivation::Tanh).validate());
  CHECK_THROWS(arch({3, 2}, OutputActivation::Tanh).validate());
  CHECK_NOTHROW(arch({3, 1, 2}, OutputActivation::Tanh).validate());
  Rng rng(1);
  CHECK_THROWS(init_gan(arch({2, 4, 3}, OutputActivation::Tanh),
                        arch({4, 4, 1}, OutputActivation::Logistic), rng));
  const auto net = init_mlp(arch({3, 5, 2}, OutputActivation::Tanh), rng);
  CHECK(net.parameter_count() == 3 * 5 + 5 + 5 * 2 + 2);
}

TEST_CASE("forward pass") {
  Mlp net = zero_mlp(arch({2, 1, 1}, OutputActivation::Tanh));
  net.layers[0].weight << 1.0, -2.0;
  net.layers[0].bias << 0.5;
  net.layers[1].weight << 2.0;
  net.layers[1].bias << -0.1;
  Eigen::VectorXd x(2);
  x << 0.3, 0.1;
  const double h = std::tanh(0.6);
  CHECK(mlp_forward(net, x)(0) == doctest::Approx(std::tanh(2.0 * h - 0.1)));
  net.arch.output = OutputActivation::Logistic;
  CHECK(mlp_forward(net, x)(0) == doctest::Approx(1.0 / (1.0 + std::exp(-(2.0 * h - 0.1)))));

  Rng rng(2);
  const auto deep = init_mlp(arch({4, 6, 3}, OutputActivation::Tanh), rng);
  const Eigen::MatrixXd batch = sample_noise(4, 5, rng);
  const Eigen::MatrixXd out = mlp_forward(deep, batch);
  REQUIRE(out.rows() == 3);
  REQUIRE(out.cols() == 5);
  for (int c = 0; c < 5; ++c) {
    const Eigen::VectorXd col = batch.col(c);
    CHECK((mlp_forward(deep, col) - out.col(c)).cwiseAbs().maxCoeff() < 1e-15);
  }
  CHECK(out.cwiseAbs().maxCoeff() < 1.0);
  CHECK_THROWS(mlp_forward(deep, Eigen::MatrixXd(Eigen::MatrixXd::Zero(3, 2))));
}

TEST_CASE("noise batch range") {
  Rng rng(3);
  const auto z = sample_noise(100, 50, rng);
  CHECK(z.minCoeff() >= -1.0);
  CHECK(z.maxCoeff() < 1.0);
  CHECK(std::abs(z.mean()) < 0.02);
}

TEST_CASE("losses with a constant discriminator") {
  const auto disc = zero_mlp(arch({3, 4, 1}, OutputActivation::Logistic));
  const auto gen = zero_mlp(arch({2, 4, 3}, OutputActivation::Tanh));
  Rng rng(4);
  const auto real = sample_noise(3, 10, rng);
  const auto fake = sample_noise(3, 10, rng);
  CHECK(discriminator_loss(disc, real, fake) == doctest::Approx(2.0 * std::log(2.0)));
  CHECK(generator_loss(gen, disc, sample_noise(2, 10, rng)) == doctest::Approx(std::log(2.0)));
}

TEST_CASE("analytic gradients match finite differences") {
  Rng rng(5);
  const auto g = arch({4, 7, 6, 5}, OutputActivation::Tanh);
  const auto d = arch({5, 6, 1}, OutputActivation::Logistic);
  for (int t = 0; t < 5; ++t) {
    const auto rep = gradient_check(g, d, rng);
    CHECK(rep.discriminator_max_rel_error < 1e-5);
    CHECK(rep.generator_max_rel_error < 1e-5);
  }
  // All-zero parameters exercise the exactly-zero gradient paths.
  const auto zero = gradient_check(g, d, rng, true);
  CHECK(zero.max_rel_error() < 1e-4);
}

TEST_CASE("adam update") {
  Mlp net = zero_mlp(arch({1, 1, 1}, OutputActivation::Tanh));
  AdamState state;
  const DenseLayer none{Eigen::MatrixXd::Zero(1, 1), Eigen::VectorXd::Zero(1)};
  LayerTensors grads{DenseLayer{Eigen::MatrixXd::Constant(1, 1, 2.0), Eigen::VectorXd::Constant(1, -3.0)},
                     none};
  AdamSettings s;
  s.learning_rate = 0.1;
  adam_update(net, state, grads, s);
  // The first bias-corrected step is lr * sign(g) up to epsilon.
  CHECK(net.layers[0].weight(0, 0) == doctest::Approx(-0.1).epsilon(1e-6));
  CHECK(net.layers[0].bias(0) == doctest::Approx(0.1).epsilon(1e-6));
  CHECK(state.step == 1);
  LayerTensors zero{none, none};
  const double w = net.layers[0].weight(0, 0);
  adam_update(net, state, zero, s);
  // momentum keeps moving in the same direction
  CHECK(net.layers[0].weight(0, 0) < w);
}

TEST_CASE("generator learns a one-dimensional target") {
  Rng rng(6);
  AdamSettings adam;
  adam.learning_rate = 2e-3;
  auto model = init_gan(arch({4, 16, 1}, OutputActivation::Tanh),
                        arch({1, 16, 1}, OutputActivation::Logistic), rng, adam, 64);
  const double target = 0.5;
  for (int it = 0; it < 3000; ++it) {
    Eigen::MatrixXd real(1, 64);
    for (int c = 0; c < 64; ++c) real(0, c) = target + 0.05 * rng.uniform(-1.0, 1.0);
    gan_train_step(model, real, rng);
  }
  const auto out = gan_generate(model, 2000, rng);
  CHECK(std::abs(out.mean() - target) < 0.1);
  CHECK(model.iteration == 3000);
}

TEST_CASE("training is deterministic for a fixed seed") {
  auto run = [] {
    Rng rng(7);
    auto model = init_gan(arch({3, 8, 4}, OutputActivation::Tanh),
                          arch({4, 8, 1}, OutputActivation::Logistic), rng, {}, 10);
    std::vector<StepLosses> losses;
    for (int it = 0; it < 20; ++it) losses.push_back(gan_train_step(model, sample_noise(4, 10, rng), rng));
    return std::pair{model, losses};
  };
  const auto [m1, l1] = run();
  const auto [m2, l2] = run();
  CHECK(same(m1.generator, m2.generator));
  CHECK(same(m1.discriminator, m2.discriminator));
  for (std::size_t i = 0; i < l1.size(); ++i) {
    CHECK(l1[i].d_loss == l2[i].d_loss);
    CHECK(l1[i].g_loss == l2[i].g_loss);
  }
}

TEST_CASE("checkpoint round trip is exact") {
  Rng rng(8);
  auto model = init_gan(arch({3, 5, 4}, OutputActivation::Tanh),
                        arch({4, 5, 1}, OutputActivation::Logistic), rng, {}, 6);
  for (int it = 0; it < 5; ++it) gan_train_step(model, sample_noise(4, 6, rng), rng);
  std::ostringstream os;
  write_checkpoint(os, model, 42);
  std::istringstream is(os.str());
  const auto loaded = read_checkpoint(is);
  CHECK(loaded.seed == 42);
  CHECK(loaded.model.iteration == model.iteration);
  CHECK(loaded.model.batch_size == 6);
  CHECK(same(loaded.model.generator, model.generator));
  CHECK(same(loaded.model.discriminator, model.discriminator));
  CHECK(same(loaded.model.generator_opt.first_moment, model.generator_opt.first_moment));
  CHECK(same(loaded.model.discriminator_opt.second_moment, model.discriminator_opt.second_moment));
  CHECK(loaded.model.generator_opt.step == model.generator_opt.step);
  std::ostringstream again;
  write_checkpoint(again, loaded.model, 42);
  CHECK(again.str() == os.str());

  // Continuing from the restored model matches continuing the original.
  Rng r1(9), r2(9);
  auto a = model;
  auto b = loaded.model;
  const auto batch = sample_noise(4, 6, r1);
  sample_noise(4, 6, r2);
  gan_train_step(a, batch, r1);
  gan_train_step(b, batch, r2);
  CHECK(same(a.generator, b.generator));

  std::istringstream bad("hpgan-checkpoint 99\n");
  CHECK_THROWS(read_checkpoint(bad));
  std::string text = os.str();
  std::istringstream truncated(text.substr(0, text.size() / 2));
  CHECK_THROWS(read_checkpoint(truncated));
}
