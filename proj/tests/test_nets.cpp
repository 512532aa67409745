// Copyright 2026 The loco Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <catch2/catch_amalgamated.hpp>
#include <filesystem>

#include "loco/nets.hpp"
#include "support/gradcheck.hpp"

using namespace loco;
using namespace loco::nets;

namespace {

MlpSpec small_spec(Activation out_act = Activation::Identity) {
  MlpSpec s;
  s.input_dim = 5;
  s.hidden = {8, 6};
  s.output_dim = 3;
  s.output_act = out_act;
  return s;
}

}  // namespace

TEST_CASE("mlp zero weights yield zero outputs, tanh included") {
  Mlp<double> net;
  net.spec = small_spec(Activation::Tanh);
  Rng rng(1);
  net.init(rng);
  for (auto& w : net.W) w.setZero();
  const MatX x = MatX::Random(5, 4);
  const MatX y = net.forward(x);
  REQUIRE(y.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("single identity layer applies the ELU definition") {
  Mlp<double> net;
  net.spec.input_dim = 1;
  net.spec.hidden = {1};
  net.spec.output_dim = 1;
  Rng rng(2);
  net.init(rng);
  net.W[0](0, 0) = 1.0;
  net.W[1](0, 0) = 1.0;
  net.b[0].setZero();
  net.b[1].setZero();
  MatX x(1, 1);
  x << -1.0;
  REQUIRE(net.forward(x)(0, 0) == Catch::Approx(std::exp(-1.0) - 1.0).epsilon(1e-12));
  x << 0.7;
  REQUIRE(net.forward(x)(0, 0) == Catch::Approx(0.7).epsilon(1e-12));
}

TEST_CASE("elu is C1 at zero") {
  const double h = 1e-9;
  MatX zp(1, 1), zm(1, 1), a;
  zp << h;
  zm << -h;
  MatX ap, am;
  detail::apply_activation(Activation::Elu, zp, ap);
  detail::apply_activation(Activation::Elu, zm, am);
  REQUIRE(std::abs(ap(0, 0) - am(0, 0)) < 1e-8);
  const MatX dp = detail::activation_derivative(Activation::Elu, zp, ap);
  const MatX dm = detail::activation_derivative(Activation::Elu, zm, am);
  REQUIRE(std::abs(dp(0, 0) - dm(0, 0)) < 1e-8);
}

TEST_CASE("forward is pure") {
  Mlp<double> net;
  net.spec = small_spec();
  Rng rng(3);
  net.init(rng);
  const MatX x = MatX::Random(5, 7);
  REQUIRE(net.forward(x) == net.forward(x));
}

TEST_CASE("shape mismatches are rejected with both shapes reported") {
  Mlp<double> net;
  net.spec = small_spec();
  Rng rng(4);
  net.init(rng);
  try {
    net.forward(MatX::Random(4, 2));
    FAIL("expected throw");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    REQUIRE(msg.find("4") != std::string::npos);
    REQUIRE(msg.find("5") != std::string::npos);
  }
  Mlp<double>::Cache cache;
  net.forward(MatX::Random(5, 2), &cache);
  auto grads = net.make_grads();
  REQUIRE_THROWS_AS(net.backward(cache, MatX::Random(3, 5), grads), ConfigError);
}

TEST_CASE("linear chain rule on a 1x1 net") {
  Mlp<double> net;
  net.spec.input_dim = 1;
  net.spec.hidden = {};
  net.spec.output_dim = 1;
  Rng rng(5);
  net.init(rng);
  net.W[0](0, 0) = 2.0;
  net.b[0].setZero();
  MatX x(1, 1), dy(1, 1);
  x << 3.0;
  dy << 1.5;
  Mlp<double>::Cache cache;
  net.forward(x, &cache);
  auto grads = net.make_grads();
  const MatX dx = net.backward(cache, dy, grads);
  REQUIRE(grads.dW[0](0, 0) == Catch::Approx(3.0 * 1.5));  // x * dL/dy
  REQUIRE(grads.db[0](0) == Catch::Approx(1.5));
  REQUIRE(dx(0, 0) == Catch::Approx(2.0 * 1.5));
}

TEST_CASE("zero output gradient gives zero parameter gradients") {
  Mlp<double> net;
  net.spec = small_spec(Activation::Tanh);
  Rng rng(6);
  net.init(rng);
  Mlp<double>::Cache cache;
  net.forward(MatX::Random(5, 3), &cache);
  auto grads = net.make_grads();
  net.backward(cache, MatX::Zero(3, 3), grads);
  for (const auto& g : grads.dW) REQUIRE(g.cwiseAbs().maxCoeff() == 0.0);
  for (const auto& g : grads.db) REQUIRE(g.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("mlp gradients match central finite differences") {
  for (Activation out : {Activation::Identity, Activation::Tanh}) {
    Mlp<double> net;
    net.spec = small_spec(out);
    Rng rng(7);
    net.init(rng);
    const MatX x = MatX::Random(5, 4);
    const MatX w = MatX::Random(3, 4);  // fixed loss weights

    auto grads = net.make_grads();
    const auto loss = [&]() { return (net.forward(x).array() * w.array()).sum(); };
    Mlp<double>::Cache cache;
    net.forward(x, &cache);
    net.backward(cache, w, grads);

    Rng check_rng(8);
    const auto res = test::finite_difference_check(loss, net.param_blocks("mlp"),
                                                   net.grad_blocks(grads, "mlp"), check_rng, 40);
    INFO("worst " << res.worst_block << "[" << res.worst_index << "] analytic " << res.analytic
                  << " numeric " << res.numeric);
    REQUIRE(res.max_rel_error < 1e-4);
  }
}

TEST_CASE("mlp input gradient matches finite differences") {
  Mlp<double> net;
  net.spec.input_dim = 6;
  net.spec.hidden = {8, 4};
  net.spec.output_dim = 1;
  Rng rng(9);
  net.init(rng);
  MatX x = MatX::Random(6, 3);
  Mlp<double>::Cache cache;
  net.forward(x, &cache);
  const MatX g = net.input_gradient(cache);
  const double h = 1e-5;
  for (int b = 0; b < 3; ++b) {
    for (int i = 0; i < 6; ++i) {
      MatX xp = x, xm = x;
      xp(i, b) += h;
      xm(i, b) -= h;
      const double fd = (net.forward(xp)(0, b) - net.forward(xm)(0, b)) / (2 * h);
      REQUIRE(g(i, b) == Catch::Approx(fd).margin(1e-6));
    }
  }
}

TEST_CASE("gradient penalty parameter gradients match finite differences") {
  Mlp<double> net;
  net.spec.input_dim = 6;
  net.spec.hidden = {8, 4};
  net.spec.output_dim = 1;
  Rng rng(10);
  net.init(rng);
  const MatX x = MatX::Random(6, 3);
  const double coef = 5.0;

  const auto penalty_value = [&]() {
    Mlp<double>::Cache cache;
    net.forward(x, &cache);
    const MatX g = net.input_gradient(cache);
    return coef * g.array().square().sum() / double(x.cols());
  };

  Mlp<double>::Cache cache;
  net.forward(x, &cache);
  const MatX g = net.input_gradient(cache);
  auto grads = net.make_grads();
  const double reported = net.gradient_penalty(cache, g, coef, grads);
  REQUIRE(reported == Catch::Approx(penalty_value()).epsilon(1e-10));

  Rng check_rng(11);
  const auto res = test::finite_difference_check(penalty_value, net.param_blocks("d"),
                                                 net.grad_blocks(grads, "d"), check_rng, 40);
  INFO("worst " << res.worst_block << "[" << res.worst_index << "] analytic " << res.analytic
                << " numeric " << res.numeric);
  REQUIRE(res.max_rel_error < 1e-4);
}

TEST_CASE("lstm zero parameters give zero hidden state") {
  Lstm<double> lstm;
  lstm.spec.input_dim = 4;
  lstm.spec.hidden = {5, 5};
  Rng rng(12);
  lstm.init(rng);
  for (auto& w : lstm.W_ih) w.setZero();
  for (auto& w : lstm.W_hh) w.setZero();
  for (auto& b : lstm.bias) b.setZero();
  auto state = lstm.zero_state(2);
  const MatX out = lstm.step(MatX::Random(4, 2), state);
  REQUIRE(out.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("lstm state threading equals a continuous run") {
  Lstm<double> lstm;
  lstm.spec.input_dim = 3;
  lstm.spec.hidden = {6, 6, 6};
  Rng rng(13);
  lstm.init(rng);
  const MatX x1 = MatX::Random(3, 2), x2 = MatX::Random(3, 2);
  auto s1 = lstm.zero_state(2);
  lstm.step(x1, s1);
  auto saved = s1;  // deep copy
  const MatX direct = lstm.step(x2, s1);
  const MatX resumed = lstm.step(x2, saved);
  REQUIRE(direct == resumed);
}

TEST_CASE("lstm BPTT gradients match finite differences over 5 steps") {
  Lstm<double> lstm;
  lstm.spec.input_dim = 3;
  lstm.spec.hidden = {4, 4, 4};
  Rng rng(14);
  lstm.init(rng);
  const int T = 5, B = 2;
  std::vector<MatX> xs(T), ws(T);
  for (int t = 0; t < T; ++t) {
    xs[t] = MatX::Random(3, B);
    ws[t] = MatX::Random(4, B);
  }
  const auto loss = [&]() {
    auto state = lstm.zero_state(B);
    double total = 0.0;
    for (int t = 0; t < T; ++t) total += (lstm.step(xs[t], state).array() * ws[t].array()).sum();
    return total;
  };
  auto state = lstm.zero_state(B);
  std::vector<Lstm<double>::StepCache> caches(T);
  std::vector<MatX> dtop(T);
  for (int t = 0; t < T; ++t) {
    lstm.step(xs[t], state, &caches[t]);
    dtop[t] = ws[t];
  }
  auto grads = lstm.make_grads();
  lstm.backward_window(caches, dtop, grads);

  Rng check_rng(15);
  const auto res = test::finite_difference_check(loss, lstm.param_blocks("lstm"),
                                                 lstm.grad_blocks(grads, "lstm"), check_rng, 30);
  INFO("worst " << res.worst_block << "[" << res.worst_index << "] analytic " << res.analytic
                << " numeric " << res.numeric);
  REQUIRE(res.max_rel_error < 1e-4);
}

TEST_CASE("adam basics") {
  Mlp<double> net;
  net.spec.input_dim = 2;
  net.spec.hidden = {};
  net.spec.output_dim = 2;
  Rng rng(16);
  net.init(rng);
  const MatX w_before = net.W[0];
  auto grads = net.make_grads();
  Adam<double> adam(1e-3);
  adam.attach(net.param_blocks("n"));

  SECTION("zero gradient leaves parameters unchanged") {
    REQUIRE(adam.step(net.param_blocks("n"), net.grad_blocks(grads, "n")));
    REQUIRE(net.W[0] == w_before);
  }
  SECTION("first step is approximately -lr * sign(g)") {
    grads.dW[0].setConstant(0.37);
    REQUIRE(adam.step(net.param_blocks("n"), net.grad_blocks(grads, "n")));
    const MatX delta = net.W[0] - w_before;
    for (int i = 0; i < delta.size(); ++i)
      REQUIRE(delta(i) == Catch::Approx(-1e-3).epsilon(1e-4));
  }
  SECTION("non-finite gradients skip the update") {
    grads.dW[0](0, 0) = std::numeric_limits<double>::quiet_NaN();
    REQUIRE_FALSE(adam.step(net.param_blocks("n"), net.grad_blocks(grads, "n")));
    REQUIRE(net.W[0] == w_before);
    REQUIRE(adam.skipped() == 1);
  }
}

TEST_CASE("adam minimizes a quadratic bowl below 1e-6 in 500 steps") {
  VecX x = VecX::Constant(8, 2.0);
  VecX target(8);
  Rng rng(17);
  for (int i = 0; i < 8; ++i) target[i] = rng.uniform(-1, 1);
  VecX grad(8);
  Adam<double> adam(0.05);
  std::vector<ParamBlock<double>> params{{"x", x.data(), 8, 1}};
  std::vector<ParamBlock<double>> grads{{"x", grad.data(), 8, 1}};
  adam.attach(params);
  double value = 0.0;
  for (int iter = 0; iter < 500; ++iter) {
    grad = 2.0 * (x - target);
    adam.step(params, grads);
    value = (x - target).squaredNorm();
  }
  REQUIRE(value < 1e-6);
}

TEST_CASE("checkpoint round trip is exact and validates its header") {
  Mlp<float> net;
  net.spec = small_spec(Activation::Tanh);
  Rng rng(18);
  net.init(rng);
  const auto path = std::filesystem::temp_directory_path() / "loco_ckpt.bin";
  save_checkpoint(path.string(), net.spec.signature(), net.param_blocks("net"));

  Mlp<float> loaded;
  loaded.spec = net.spec;
  Rng rng2(99);
  loaded.init(rng2);
  load_checkpoint(path.string(), net.spec.signature(), loaded.param_blocks("net"));
  for (size_t l = 0; l < net.W.size(); ++l) {
    REQUIRE(loaded.W[l] == net.W[l]);
    REQUIRE(loaded.b[l] == net.b[l]);
  }
  // outputs identical after the round trip
  const Eigen::MatrixXf x = Eigen::MatrixXf::Random(5, 3);
  REQUIRE(loaded.forward(x) == net.forward(x));

  SECTION("spec mismatch is rejected") {
    REQUIRE_THROWS_AS(load_checkpoint(path.string(), "something else", loaded.param_blocks("net")),
                      IoError);
  }
  SECTION("corrupted magic is rejected") {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(0);
    const uint32_t junk = 0xDEADBEEF;
    f.write(reinterpret_cast<const char*>(&junk), 4);
    f.close();
    REQUIRE_THROWS_AS(
        load_checkpoint(path.string(), net.spec.signature(), loaded.param_blocks("net")), IoError);
  }
  std::filesystem::remove(path);
}

TEST_CASE("orthogonal init produces orthonormal columns scaled by gain") {
  Rng rng(19);
  const MatX q = orthogonal<double>(16, 8, std::sqrt(2.0), rng);
  const MatX gram = q.transpose() * q;
  REQUIRE((gram - 2.0 * MatX::Identity(8, 8)).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("tanh output layer bounds raw outputs to (-1,1)") {
  Mlp<double> net;
  net.spec = small_spec(Activation::Tanh);
  Rng rng(20);
  net.init(rng, 3.0);
  const MatX y = net.forward(MatX::Random(5, 64) * 10.0);
  REQUIRE(y.maxCoeff() < 1.0);
  REQUIRE(y.minCoeff() > -1.0);
}
