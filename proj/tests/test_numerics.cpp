#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "doctest.h"
#include "starris/checkpoint.hpp"
#include "starris/matrix.hpp"
#include "starris/mlp.hpp"
#include "starris/optimizer.hpp"
#include "starris/rng.hpp"

using namespace starris;

namespace {

ComplexMatrix random_complex(int rows, int cols, Rng& rng) {
  ComplexMatrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = Complex{rng.normal(), rng.normal()};
  return m;
}

RealMatrix random_real(int rows, int cols, Rng& rng, double scale = 1.0) {
  RealMatrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = scale * rng.normal();
  return m;
}

double loss_of(const MlpParameters& params, const RealMatrix& input, const RealMatrix& upstream) {
  const RealMatrix out = mlp_forward(params, input, Mode::Train);
  return (upstream.array() * out.array()).sum();
}

// Central finite differences over every trainable parameter and the input.
void check_gradients(MlpParameters params, const RealMatrix& input, const RealMatrix& upstream) {
  ForwardCache cache;
  mlp_forward(params, input, Mode::Train, &cache);
  const Gradients grads = mlp_backward(params, cache, upstream);
  const RealVector analytic = flatten_gradients(params, grads);
  const RealVector theta = flatten_trainable(params);
  const double step = 1e-5;

  for (long i = 0; i < theta.size(); ++i) {
    RealVector bumped = theta;
    bumped[i] = theta[i] + step;
    unflatten_trainable(params, bumped);
    const double hi = loss_of(params, input, upstream);
    bumped[i] = theta[i] - step;
    unflatten_trainable(params, bumped);
    const double lo = loss_of(params, input, upstream);
    const double fd = (hi - lo) / (2.0 * step);
    const double tol = 1e-4 * std::max({std::abs(fd), std::abs(analytic[i]), 1e-4});
    CHECK(std::abs(analytic[i] - fd) <= tol);
  }
  unflatten_trainable(params, theta);

  for (long r = 0; r < input.rows(); ++r) {
    for (long c = 0; c < input.cols(); ++c) {
      RealMatrix bumped = input;
      bumped(r, c) = input(r, c) + step;
      const double hi = loss_of(params, bumped, upstream);
      bumped(r, c) = input(r, c) - step;
      const double lo = loss_of(params, bumped, upstream);
      const double fd = (hi - lo) / (2.0 * step);
      const double an = grads.input(r, c);
      const double tol = 1e-4 * std::max({std::abs(fd), std::abs(an), 1e-4});
      CHECK(std::abs(an - fd) <= tol);
    }
  }
}

MlpParameters single_norm_block(int width) {
  Block block;
  block.dense.weight = RealMatrix::Identity(width, width);
  block.dense.bias = RealVector::Zero(width);
  block.norm = BatchNormParams{RealVector::Ones(width), RealVector::Zero(width),
                               RealVector::Zero(width), RealVector::Ones(width)};
  block.act = Activation::Identity;
  MlpParameters params;
  params.input_width = width;
  params.blocks.push_back(block);
  return params;
}

}  // namespace

TEST_CASE("complex_matmul identity and scalars") {
  Rng rng(7);
  const ComplexMatrix x = random_complex(2, 3, rng);
  const ComplexMatrix eye = ComplexMatrix::Identity(2, 2);
  const ComplexMatrix prod = complex_matmul(eye, x);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 3; ++j) CHECK(prod(i, j) == x(i, j));

  ComplexMatrix a(1, 1), b(1, 1);
  a(0, 0) = Complex{1.0, 1.0};
  b(0, 0) = Complex{1.0, -1.0};
  CHECK(complex_matmul(a, b)(0, 0) == Complex{2.0, 0.0});
}

TEST_CASE("complex_matmul matches summed dot products") {
  Rng rng(11);
  const ComplexMatrix a = random_complex(3, 4, rng);
  const ComplexMatrix b = random_complex(4, 2, rng);
  const ComplexMatrix prod = complex_matmul(a, b);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 2; ++j) {
      Complex acc{0.0, 0.0};
      for (int k = 0; k < 4; ++k) acc += a(i, k) * b(k, j);
      CHECK(std::abs(prod(i, j) - acc) <= 1e-12);
    }
  }
}

TEST_CASE("complex_matmul rejects mismatched shapes") {
  Rng rng(3);
  const ComplexMatrix a = random_complex(2, 3, rng);
  const ComplexMatrix b = random_complex(2, 2, rng);
  CHECK_THROWS_AS(complex_matmul(a, b), std::invalid_argument);
}

TEST_CASE("adjoint of a product reverses the factors") {
  Rng rng(13);
  const ComplexMatrix a = random_complex(3, 4, rng);
  const ComplexMatrix b = random_complex(4, 2, rng);
  const ComplexMatrix lhs = complex_matmul(a, b).adjoint();
  const ComplexMatrix rhs = complex_matmul(b.adjoint(), a.adjoint());
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("zero actor network maps everything to zero") {
  Rng rng(5);
  MlpParameters actor = make_actor_network(3, 2, 4, rng);
  RealVector zeros = RealVector::Zero(trainable_count(actor));
  unflatten_trainable(actor, zeros);
  const RealMatrix out = mlp_forward(actor, random_real(4, 3, rng), Mode::Train);
  CHECK(out.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("batch norm zeroes a zero-variance batch") {
  MlpParameters params = single_norm_block(3);
  RealMatrix input(2, 3);
  input << 5.0, -1.0, 2.0, 5.0, -1.0, 2.0;
  const RealMatrix out = mlp_forward(params, input, Mode::Train);
  CHECK(out.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("batch norm train output has zero mean and unit variance") {
  MlpParameters params = single_norm_block(3);
  Rng rng(17);
  const RealMatrix input = random_real(16, 3, rng, 20.0);
  const RealMatrix out = mlp_forward(params, input, Mode::Train);
  for (int c = 0; c < 3; ++c) {
    const double mean = out.col(c).mean();
    const double var = (out.col(c).array() - mean).square().sum() / 16.0;
    CHECK(std::abs(mean) <= 1e-6);
    CHECK(std::abs(var - 1.0) <= 1e-6);
  }
}

TEST_CASE("eval mode normalizes with the running statistics") {
  MlpParameters params = single_norm_block(2);
  params.blocks[0].norm->running_mean << 1.0, -2.0;
  params.blocks[0].norm->running_var << 4.0, 9.0;
  params.blocks[0].norm->scale << 2.0, 1.0;
  params.blocks[0].norm->shift << 0.5, 0.0;
  RealMatrix input(1, 2);
  input << 3.0, 1.0;
  const RealMatrix out = mlp_forward(params, input, Mode::Eval);
  const double e0 = 2.0 * (3.0 - 1.0) / std::sqrt(4.0 + kBatchNormEpsilon) + 0.5;
  const double e1 = 1.0 * (1.0 + 2.0) / std::sqrt(9.0 + kBatchNormEpsilon);
  CHECK(out(0, 0) == doctest::Approx(e0).epsilon(1e-12));
  CHECK(out(0, 1) == doctest::Approx(e1).epsilon(1e-12));
}

TEST_CASE("actor forward matches a hand-rolled layer walk") {
  Rng rng(23);
  const MlpParameters actor = make_actor_network(3, 2, 4, rng);
  Rng data(29);
  const RealMatrix x = random_real(5, 3, data);
  const RealMatrix got = mlp_forward(actor, x, Mode::Train);

  // Block 0: dense, batch norm on batch statistics, rectified linear.
  const Block& b0 = actor.blocks[0];
  RealMatrix z = (x * b0.dense.weight).rowwise() + b0.dense.bias.transpose();
  RealMatrix h0(z.rows(), z.cols());
  for (int c = 0; c < z.cols(); ++c) {
    const double mean = z.col(c).mean();
    const double var = (z.col(c).array() - mean).square().sum() / z.rows();
    for (int r = 0; r < z.rows(); ++r) {
      const double xhat = (z(r, c) - mean) / std::sqrt(var + kBatchNormEpsilon);
      h0(r, c) = std::max(0.0, b0.norm->scale[c] * xhat + b0.norm->shift[c]);
    }
  }
  // Blocks 1 and 2: dense + tanh.
  RealMatrix h = h0;
  for (int bi = 1; bi <= 2; ++bi) {
    const Block& b = actor.blocks[bi];
    RealMatrix zz = (h * b.dense.weight).rowwise() + b.dense.bias.transpose();
    h = zz.array().tanh().matrix();
  }
  CHECK((got - h).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("critic forward routes state and action branches then concatenates") {
  Rng rng(31);
  const MlpParameters critic = make_critic_network(3, 2, 4, rng);
  Rng data(37);
  const RealMatrix input = random_real(6, 5, data);
  const RealMatrix got = mlp_forward(critic, input, Mode::Train);
  REQUIRE(got.rows() == 6);
  REQUIRE(got.cols() == 1);

  auto branch = [](const Block& b, const RealMatrix& x) {
    RealMatrix z = (x * b.dense.weight).rowwise() + b.dense.bias.transpose();
    RealMatrix out(z.rows(), z.cols());
    for (int c = 0; c < z.cols(); ++c) {
      const double mean = z.col(c).mean();
      const double var = (z.col(c).array() - mean).square().sum() / z.rows();
      for (int r = 0; r < z.rows(); ++r) {
        const double xhat = (z(r, c) - mean) / std::sqrt(var + kBatchNormEpsilon);
        out(r, c) = std::max(0.0, b.norm->scale[c] * xhat + b.norm->shift[c]);
      }
    }
    return out;
  };
  const RealMatrix hs = branch(critic.blocks[0], input.leftCols(3));
  const RealMatrix ha = branch(critic.blocks[1], input.rightCols(2));
  RealMatrix cat(6, 8);
  cat << hs, ha;
  RealMatrix z2 = (cat * critic.blocks[2].dense.weight).rowwise() +
                  critic.blocks[2].dense.bias.transpose();
  RealMatrix h2 = z2.cwiseMax(0.0);
  RealMatrix expect = (h2 * critic.blocks[3].dense.weight).rowwise() +
                      critic.blocks[3].dense.bias.transpose();
  CHECK((got - expect).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("actor output stays strictly inside the open unit interval") {
  Rng rng(41);
  const MlpParameters actor = make_actor_network(4, 3, 8, rng);
  RealMatrix extreme(2, 4);
  extreme << 1e6, -1e6, 1e6, -1e6, -1e6, 1e6, -1e6, 1e6;
  const RealMatrix out = mlp_forward(actor, extreme, Mode::Train);
  for (int r = 0; r < out.rows(); ++r)
    for (int c = 0; c < out.cols(); ++c) CHECK(std::abs(out(r, c)) < 1.0);
}

TEST_CASE("zero upstream gradient gives zero gradients") {
  Rng rng(43);
  const MlpParameters actor = make_actor_network(3, 2, 4, rng);
  const RealMatrix input = random_real(4, 3, rng);
  ForwardCache cache;
  mlp_forward(actor, input, Mode::Train, &cache);
  const Gradients grads = mlp_backward(actor, cache, RealMatrix::Zero(4, 2));
  CHECK(flatten_gradients(actor, grads).cwiseAbs().maxCoeff() == 0.0);
  CHECK(grads.input.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("single linear layer weight gradient equals the selected input row") {
  Block block;
  block.dense.weight = RealMatrix::Zero(3, 1);
  block.dense.bias = RealVector::Zero(1);
  block.act = Activation::Identity;
  MlpParameters params;
  params.input_width = 3;
  params.blocks.push_back(block);

  RealMatrix input(2, 3);
  input << 1.5, -2.0, 0.25, 9.0, 9.0, 9.0;
  RealMatrix upstream(2, 1);
  upstream << 1.0, 0.0;
  ForwardCache cache;
  mlp_forward(params, input, Mode::Train, &cache);
  const Gradients grads = mlp_backward(params, cache, upstream);
  CHECK(grads.blocks[0].weight(0, 0) == 1.5);
  CHECK(grads.blocks[0].weight(1, 0) == -2.0);
  CHECK(grads.blocks[0].weight(2, 0) == 0.25);
  CHECK(grads.blocks[0].bias[0] == 1.0);
}

TEST_CASE("actor gradients match central finite differences") {
  Rng rng(47);
  MlpParameters actor = make_actor_network(3, 2, 4, rng);
  Rng data(53);
  const RealMatrix input = random_real(4, 3, data);
  const RealMatrix upstream = random_real(4, 2, data);
  check_gradients(actor, input, upstream);
}

TEST_CASE("critic gradients match central finite differences") {
  Rng rng(59);
  MlpParameters critic = make_critic_network(3, 2, 4, rng);
  Rng data(61);
  const RealMatrix input = random_real(4, 5, data);
  const RealMatrix upstream = random_real(4, 1, data);
  check_gradients(critic, input, upstream);
}

TEST_CASE("backward refuses eval-mode caches") {
  Rng rng(67);
  const MlpParameters actor = make_actor_network(3, 2, 4, rng);
  const RealMatrix input = random_real(4, 3, rng);
  ForwardCache cache;
  mlp_forward(actor, input, Mode::Eval, &cache);
  CHECK_THROWS_AS(mlp_backward(actor, cache, RealMatrix::Zero(4, 2)), std::invalid_argument);
}

TEST_CASE("train mode needs a real batch") {
  Rng rng(71);
  const MlpParameters actor = make_actor_network(3, 2, 4, rng);
  CHECK_THROWS_AS(mlp_forward(actor, random_real(1, 3, rng), Mode::Train), std::invalid_argument);
}

TEST_CASE("optimizer leaves parameters alone under zero gradients") {
  Rng rng(73);
  MlpParameters actor = make_actor_network(3, 2, 4, rng);
  const RealVector before = flatten_trainable(actor);
  Gradients grads;
  grads.blocks.resize(actor.blocks.size());
  for (std::size_t b = 0; b < actor.blocks.size(); ++b) {
    const Block& block = actor.blocks[b];
    grads.blocks[b].weight = RealMatrix::Zero(block.dense.weight.rows(), block.dense.weight.cols());
    grads.blocks[b].bias = RealVector::Zero(block.dense.bias.size());
    if (block.norm) {
      grads.blocks[b].scale = RealVector::Zero(block.norm->scale.size());
      grads.blocks[b].shift = RealVector::Zero(block.norm->shift.size());
    }
  }
  AdamState state;
  optimizer_step(actor, grads, 0.001, state);
  CHECK((flatten_trainable(actor) - before).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("first adaptive step moves a scalar parameter by the learning rate") {
  Block block;
  block.dense.weight = RealMatrix::Constant(1, 1, 0.7);
  block.dense.bias = RealVector::Zero(1);
  block.act = Activation::Identity;
  MlpParameters params;
  params.input_width = 1;
  params.blocks.push_back(block);

  Gradients grads;
  grads.blocks.resize(1);
  grads.blocks[0].weight = RealMatrix::Constant(1, 1, 1.0);
  grads.blocks[0].bias = RealVector::Zero(1);
  AdamState state;
  optimizer_step(params, grads, 0.01, state);
  const double moved = 0.7 - params.blocks[0].dense.weight(0, 0);
  CHECK(moved == doctest::Approx(0.01).epsilon(1e-6));
  CHECK(params.blocks[0].dense.bias[0] == 0.0);
  CHECK(state.step == 1);
}

TEST_CASE("adaptive moments descend a convex quadratic") {
  Block block;
  block.dense.weight = RealMatrix::Zero(1, 2);
  block.dense.bias = RealVector::Zero(2);
  block.act = Activation::Identity;
  MlpParameters params;
  params.input_width = 1;
  params.blocks.push_back(block);

  const double t0 = 1.0, t1 = 0.5;
  AdamState state;
  auto loss = [&]() {
    const double d0 = params.blocks[0].dense.weight(0, 0) - t0;
    const double d1 = params.blocks[0].dense.weight(0, 1) - t1;
    return d0 * d0 + d1 * d1;
  };
  double prev = loss();
  for (int k = 0; k < 100; ++k) {
    Gradients grads;
    grads.blocks.resize(1);
    grads.blocks[0].weight = RealMatrix(1, 2);
    grads.blocks[0].weight(0, 0) = 2.0 * (params.blocks[0].dense.weight(0, 0) - t0);
    grads.blocks[0].weight(0, 1) = 2.0 * (params.blocks[0].dense.weight(0, 1) - t1);
    grads.blocks[0].bias = RealVector::Zero(2);
    optimizer_step(params, grads, 0.001, state);
    const double now = loss();
    CHECK(now < prev);
    prev = now;
  }
}

TEST_CASE("non-finite gradients abort the step and leave everything unchanged") {
  Rng rng(79);
  MlpParameters actor = make_actor_network(3, 2, 4, rng);
  const RealVector before = flatten_trainable(actor);
  ForwardCache cache;
  const RealMatrix input = random_real(4, 3, rng);
  mlp_forward(actor, input, Mode::Train, &cache);
  Gradients grads = mlp_backward(actor, cache, RealMatrix::Ones(4, 2));
  grads.blocks[0].weight(0, 0) = std::numeric_limits<double>::quiet_NaN();
  AdamState state;
  CHECK_THROWS_AS(optimizer_step(actor, grads, 0.001, state), NumericError);
  CHECK((flatten_trainable(actor) - before).cwiseAbs().maxCoeff() == 0.0);
  CHECK(state.step == 0);
}

TEST_CASE("soft update interpolates and tau one copies") {
  Rng rng(83);
  MlpParameters online = make_actor_network(3, 2, 4, rng);
  MlpParameters target = make_actor_network(3, 2, 4, rng);
  MlpParameters copy = target;

  soft_update(copy, online, 1.0);
  CHECK(max_abs_difference(copy, online) == 0.0);

  const double tau = 0.005;
  MlpParameters blended = target;
  soft_update(blended, online, tau);
  const RealVector expect =
      tau * flatten_trainable(online) + (1.0 - tau) * flatten_trainable(target);
  CHECK((flatten_trainable(blended) - expect).cwiseAbs().maxCoeff() <= 1e-15);
  // Running statistics blend too.
  const double mixed_var = tau * online.blocks[0].norm->running_var[0] +
                           (1.0 - tau) * target.blocks[0].norm->running_var[0];
  CHECK(blended.blocks[0].norm->running_var[0] == doctest::Approx(mixed_var).epsilon(1e-15));

  CHECK_THROWS_AS(soft_update(blended, online, 0.0), std::invalid_argument);
  MlpParameters other = make_actor_network(3, 2, 5, rng);
  CHECK_THROWS_AS(soft_update(other, online, 0.5), std::invalid_argument);
}

TEST_CASE("flatten and unflatten round trip") {
  Rng rng(89);
  MlpParameters critic = make_critic_network(3, 2, 4, rng);
  RealVector theta = flatten_trainable(critic);
  CHECK(theta.size() == trainable_count(critic));
  for (long i = 0; i < theta.size(); ++i) theta[i] += 0.25 * std::sin(static_cast<double>(i));
  unflatten_trainable(critic, theta);
  CHECK((flatten_trainable(critic) - theta).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("trainable_count matches the explicit tally") {
  Rng rng(97);
  const MlpParameters actor = make_actor_network(3, 2, 4, rng);
  // 3*4+4 dense + 4+4 norm, then 4*4+4, then 4*2+2.
  CHECK(trainable_count(actor) == 54);
}

TEST_CASE("network serialization round trips bit-exactly") {
  Rng rng(101);
  const MlpParameters actor = make_actor_network(5, 3, 6, rng);
  const MlpParameters back = network_from_string(network_to_string(actor));
  CHECK(max_abs_difference(actor, back) == 0.0);
  CHECK(back.input_width == actor.input_width);
  CHECK(back.split_at == actor.split_at);

  const MlpParameters critic = make_critic_network(4, 2, 5, rng);
  const MlpParameters back2 = network_from_string(network_to_string(critic));
  CHECK(max_abs_difference(critic, back2) == 0.0);
  CHECK(back2.split_at == critic.split_at);
}

TEST_CASE("parameter validation rejects broken topologies") {
  Rng rng(103);
  MlpParameters actor = make_actor_network(3, 2, 4, rng);
  actor.blocks[1].dense.weight = RealMatrix::Zero(5, 4);  // breaks the chain
  CHECK_THROWS_AS(actor.validate(), std::invalid_argument);

  MlpParameters negative_var = make_actor_network(3, 2, 4, rng);
  negative_var.blocks[0].norm->running_var[0] = 0.0;
  CHECK_THROWS_AS(negative_var.validate(), std::invalid_argument);
}
