#include "starris/mlp.hpp"

#include <cmath>
#include <stdexcept>

namespace starris {

namespace {

// tanh clamped one ulp inside +-1 so the open-interval contract on actor
// outputs holds even at saturation.
double bounded_tanh(double x) {
  constexpr double limit = 1.0 - 1.1102230246251565e-16;  // nextafter(1.0, 0.0)
  const double y = std::tanh(x);
  return y > limit ? limit : (y < -limit ? -limit : y);
}

RealMatrix apply_activation(const RealMatrix& z, Activation act) {
  switch (act) {
    case Activation::Identity:
      return z;
    case Activation::Relu:
      return z.cwiseMax(0.0);
    case Activation::Tanh:
      return z.unaryExpr([](double v) { return bounded_tanh(v); });
  }
  throw std::logic_error("unknown activation");
}

// d act / d z expressed through cached values; post is act(z).
RealMatrix activation_backward(const RealMatrix& upstream, const BlockCache& cache, Activation act) {
  switch (act) {
    case Activation::Identity:
      return upstream;
    case Activation::Relu:
      return (cache.output.array() > 0.0).select(upstream, RealMatrix::Zero(upstream.rows(), upstream.cols()));
    case Activation::Tanh:
      return (upstream.array() * (1.0 - cache.output.array().square())).matrix();
  }
  throw std::logic_error("unknown activation");
}

DenseParams init_dense(int in, int out, double bound, Rng& rng) {
  DenseParams dense;
  dense.weight.resize(in, out);
  for (int r = 0; r < in; ++r)
    for (int c = 0; c < out; ++c) dense.weight(r, c) = rng.uniform(-bound, bound);
  dense.bias.resize(out);
  for (int c = 0; c < out; ++c) dense.bias(c) = rng.uniform(-bound, bound);
  return dense;
}

BatchNormParams init_norm(int width) {
  BatchNormParams norm;
  norm.scale = RealVector::Ones(width);
  norm.shift = RealVector::Zero(width);
  norm.running_mean = RealVector::Zero(width);
  norm.running_var = RealVector::Ones(width);
  return norm;
}

Block hidden_block(int in, int out, bool with_norm, Activation act, Rng& rng) {
  Block block;
  block.dense = init_dense(in, out, 1.0 / std::sqrt(static_cast<double>(in)), rng);
  if (with_norm) block.norm = init_norm(out);
  block.act = act;
  return block;
}

Block output_block(int in, int out, Activation act, Rng& rng) {
  Block block;
  block.dense = init_dense(in, out, 3e-3, rng);
  block.act = act;
  return block;
}

// Forward through one block; fills the cache when given.
RealMatrix block_forward(const Block& block, const RealMatrix& x, Mode mode, BlockCache* cache) {
  if (x.cols() != block.in_width()) {
    throw std::invalid_argument("mlp_forward: block expects " + std::to_string(block.in_width()) +
                                " inputs, got " + std::to_string(x.cols()));
  }
  RealMatrix z = (x * block.dense.weight).rowwise() + block.dense.bias.transpose();
  RealMatrix normalized;
  RealVector mean, var;
  RealMatrix pre_act;
  if (block.norm) {
    const auto& norm = *block.norm;
    if (mode == Mode::Train) {
      const double rows = static_cast<double>(z.rows());
      mean = z.colwise().mean().transpose();
      RealMatrix centered = z.rowwise() - mean.transpose();
      var = (centered.array().square().colwise().sum() / rows).matrix().transpose();
      RealVector inv_std = (var.array() + kBatchNormEpsilon).sqrt().inverse().matrix();
      normalized = (centered.array().rowwise() * inv_std.transpose().array()).matrix();
    } else {
      RealVector inv_std = (norm.running_var.array() + kBatchNormEpsilon).sqrt().inverse().matrix();
      normalized = ((z.rowwise() - norm.running_mean.transpose()).array().rowwise() *
                    inv_std.transpose().array())
                       .matrix();
    }
    pre_act = (normalized.array().rowwise() * norm.scale.transpose().array()).matrix().rowwise() +
              norm.shift.transpose();
  } else {
    pre_act = z;
  }
  RealMatrix y = apply_activation(pre_act, block.act);
  if (cache) {
    cache->input = x;
    cache->pre_norm = std::move(z);
    cache->normalized = std::move(normalized);
    cache->batch_mean = std::move(mean);
    cache->batch_var = std::move(var);
    cache->output = y;
  }
  return y;
}

// Gradients of one block given d loss / d output; returns d loss / d input.
RealMatrix block_backward(const Block& block, const BlockCache& cache, const RealMatrix& upstream,
                          BlockGradients& grads) {
  RealMatrix d_pre = activation_backward(upstream, cache, block.act);
  RealMatrix dz;
  if (block.norm) {
    const auto& norm = *block.norm;
    grads.scale = (d_pre.array() * cache.normalized.array()).colwise().sum().matrix().transpose();
    grads.shift = d_pre.colwise().sum().transpose();
    RealMatrix d_hat = (d_pre.array().rowwise() * norm.scale.transpose().array()).matrix();
    const double rows = static_cast<double>(d_hat.rows());
    RealVector inv_std = (cache.batch_var.array() + kBatchNormEpsilon).sqrt().inverse().matrix();
    RealVector sum_d_hat = d_hat.colwise().sum().transpose();
    RealVector sum_d_hat_xhat =
        (d_hat.array() * cache.normalized.array()).colwise().sum().matrix().transpose();
    // dz = inv_std/m * (m*d_hat - sum(d_hat) - xhat .* sum(d_hat .* xhat))
    dz = (((d_hat * rows).rowwise() - sum_d_hat.transpose()).array() -
          cache.normalized.array().rowwise() * sum_d_hat_xhat.transpose().array())
             .matrix();
    dz = (dz.array().rowwise() * (inv_std / rows).transpose().array()).matrix();
  } else {
    dz = std::move(d_pre);
  }
  grads.weight = cache.input.transpose() * dz;
  grads.bias = dz.colwise().sum().transpose();
  return dz * block.dense.weight.transpose();
}

}  // namespace

std::string activation_name(Activation act) {
  switch (act) {
    case Activation::Identity:
      return "identity";
    case Activation::Relu:
      return "relu";
    case Activation::Tanh:
      return "tanh";
  }
  throw std::logic_error("unknown activation");
}

Activation activation_from_name(const std::string& name) {
  if (name == "identity") return Activation::Identity;
  if (name == "relu") return Activation::Relu;
  if (name == "tanh") return Activation::Tanh;
  throw std::invalid_argument("unknown activation name: " + name);
}

void MlpParameters::validate() const {
  if (blocks.empty()) throw std::invalid_argument("MlpParameters: no blocks");
  if (split_at < 0 || split_at > input_width)
    throw std::invalid_argument("MlpParameters: split_at out of range");
  const std::size_t chain_start = split_at > 0 ? 2 : 0;
  if (split_at > 0) {
    if (blocks.size() < 3) throw std::invalid_argument("MlpParameters: split topology needs 3+ blocks");
    if (blocks[0].in_width() != split_at || blocks[1].in_width() != input_width - split_at)
      throw std::invalid_argument("MlpParameters: branch widths do not match split");
    if (blocks[2].in_width() != blocks[0].out_width() + blocks[1].out_width())
      throw std::invalid_argument("MlpParameters: concatenation width mismatch");
  } else if (blocks[0].in_width() != input_width) {
    throw std::invalid_argument("MlpParameters: first block width mismatch");
  }
  for (std::size_t i = chain_start + 1; i < blocks.size(); ++i) {
    if (blocks[i].in_width() != blocks[i - 1].out_width())
      throw std::invalid_argument("MlpParameters: layer widths do not chain at block " + std::to_string(i));
  }
  for (const Block& block : blocks) {
    if (block.dense.bias.size() != block.out_width())
      throw std::invalid_argument("MlpParameters: bias width mismatch");
    if (block.norm) {
      const auto& n = *block.norm;
      if (n.scale.size() != block.out_width() || n.shift.size() != block.out_width() ||
          n.running_mean.size() != block.out_width() || n.running_var.size() != block.out_width())
        throw std::invalid_argument("MlpParameters: batch-norm width mismatch");
      if ((n.running_var.array() <= 0.0).any())
        throw std::invalid_argument("MlpParameters: running variance must be positive");
    }
  }
}

MlpParameters make_actor_network(int state_size, int action_size, int hidden_units, Rng& rng) {
  MlpParameters params;
  params.input_width = state_size;
  params.blocks.push_back(hidden_block(state_size, hidden_units, true, Activation::Relu, rng));
  params.blocks.push_back(hidden_block(hidden_units, hidden_units, false, Activation::Tanh, rng));
  params.blocks.push_back(output_block(hidden_units, action_size, Activation::Tanh, rng));
  params.validate();
  return params;
}

MlpParameters make_critic_network(int state_size, int action_size, int hidden_units, Rng& rng) {
  MlpParameters params;
  params.input_width = state_size + action_size;
  params.split_at = state_size;
  params.blocks.push_back(hidden_block(state_size, hidden_units, true, Activation::Relu, rng));
  params.blocks.push_back(hidden_block(action_size, hidden_units, true, Activation::Relu, rng));
  params.blocks.push_back(hidden_block(2 * hidden_units, hidden_units, false, Activation::Relu, rng));
  params.blocks.push_back(output_block(hidden_units, 1, Activation::Identity, rng));
  params.validate();
  return params;
}

RealMatrix mlp_forward(const MlpParameters& params, const RealMatrix& input, Mode mode,
                       ForwardCache* cache) {
  if (input.cols() != params.input_width) {
    throw std::invalid_argument("mlp_forward: expected " + std::to_string(params.input_width) +
                                " input columns, got " + std::to_string(input.cols()));
  }
  if (mode == Mode::Train && input.rows() < 2)
    throw std::invalid_argument("mlp_forward: train mode needs a batch of at least 2 rows");
  if (cache) {
    cache->mode = mode;
    cache->blocks.assign(params.blocks.size(), BlockCache{});
  }
  RealMatrix current;
  std::size_t first_chain_block = 0;
  if (params.split_at > 0) {
    RealMatrix left = block_forward(params.blocks[0], input.leftCols(params.split_at), mode,
                                    cache ? &cache->blocks[0] : nullptr);
    RealMatrix right = block_forward(params.blocks[1],
                                     input.rightCols(params.input_width - params.split_at), mode,
                                     cache ? &cache->blocks[1] : nullptr);
    current.resize(input.rows(), left.cols() + right.cols());
    current << left, right;
    first_chain_block = 2;
  } else {
    current = input;
  }
  for (std::size_t i = first_chain_block; i < params.blocks.size(); ++i) {
    current = block_forward(params.blocks[i], current, mode, cache ? &cache->blocks[i] : nullptr);
  }
  if (!current.allFinite()) throw NumericError("mlp_forward: non-finite output");
  if (cache) cache->output = current;
  return current;
}

void update_running_stats(MlpParameters& params, const ForwardCache& cache) {
  if (cache.mode != Mode::Train)
    throw std::invalid_argument("update_running_stats: cache must come from a train-mode forward");
  for (std::size_t i = 0; i < params.blocks.size(); ++i) {
    if (!params.blocks[i].norm) continue;
    auto& norm = *params.blocks[i].norm;
    const auto& bc = cache.blocks[i];
    norm.running_mean = kBatchNormMomentum * norm.running_mean + (1.0 - kBatchNormMomentum) * bc.batch_mean;
    norm.running_var = kBatchNormMomentum * norm.running_var + (1.0 - kBatchNormMomentum) * bc.batch_var;
  }
}

Gradients mlp_backward(const MlpParameters& params, const ForwardCache& cache,
                       const RealMatrix& upstream) {
  if (cache.mode != Mode::Train)
    throw std::invalid_argument("mlp_backward: batch statistics are not differentiated in eval mode");
  if (upstream.rows() != cache.output.rows() || upstream.cols() != cache.output.cols())
    throw std::invalid_argument("mlp_backward: upstream shape must match the forward output");
  Gradients grads;
  grads.blocks.resize(params.blocks.size());
  RealMatrix current = upstream;
  const std::size_t first_chain_block = params.split_at > 0 ? 2 : 0;
  for (std::size_t i = params.blocks.size(); i-- > first_chain_block;) {
    current = block_backward(params.blocks[i], cache.blocks[i], current, grads.blocks[i]);
  }
  if (params.split_at > 0) {
    const int left_width = params.blocks[0].out_width();
    const int right_width = params.blocks[1].out_width();
    RealMatrix d_left = block_backward(params.blocks[0], cache.blocks[0],
                                       current.leftCols(left_width), grads.blocks[0]);
    RealMatrix d_right = block_backward(params.blocks[1], cache.blocks[1],
                                        current.rightCols(right_width), grads.blocks[1]);
    grads.input.resize(d_left.rows(), params.input_width);
    grads.input << d_left, d_right;
  } else {
    grads.input = std::move(current);
  }
  return grads;
}

Gradients mlp_backward(const MlpParameters& params, const RealMatrix& input,
                       const RealMatrix& upstream, Mode mode) {
  if (mode != Mode::Train)
    throw std::invalid_argument("mlp_backward: batch statistics are not differentiated in eval mode");
  ForwardCache cache;
  mlp_forward(params, input, mode, &cache);
  return mlp_backward(params, cache, upstream);
}

namespace {

template <typename Fn>
void for_each_trainable(const MlpParameters& params, Fn&& fn) {
  for (const Block& block : params.blocks) {
    fn(block.dense.weight);
    fn(block.dense.bias);
    if (block.norm) {
      fn(block.norm->scale);
      fn(block.norm->shift);
    }
  }
}

void append(RealVector& out, long& offset, const RealMatrix& m) {
  for (long r = 0; r < m.rows(); ++r)
    for (long c = 0; c < m.cols(); ++c) out(offset++) = m(r, c);
}

void append(RealVector& out, long& offset, const RealVector& v) {
  out.segment(offset, v.size()) = v;
  offset += v.size();
}

void take(const RealVector& in, long& offset, RealMatrix& m) {
  for (long r = 0; r < m.rows(); ++r)
    for (long c = 0; c < m.cols(); ++c) m(r, c) = in(offset++);
}

void take(const RealVector& in, long& offset, RealVector& v) {
  v = in.segment(offset, v.size());
  offset += v.size();
}

}  // namespace

long trainable_count(const MlpParameters& params) {
  long total = 0;
  for_each_trainable(params, [&](const auto& t) { total += t.size(); });
  return total;
}

RealVector flatten_trainable(const MlpParameters& params) {
  RealVector flat(trainable_count(params));
  long offset = 0;
  for (const Block& block : params.blocks) {
    append(flat, offset, block.dense.weight);
    append(flat, offset, block.dense.bias);
    if (block.norm) {
      append(flat, offset, block.norm->scale);
      append(flat, offset, block.norm->shift);
    }
  }
  return flat;
}

void unflatten_trainable(MlpParameters& params, const RealVector& flat) {
  if (flat.size() != trainable_count(params))
    throw std::invalid_argument("unflatten_trainable: size mismatch");
  long offset = 0;
  for (Block& block : params.blocks) {
    take(flat, offset, block.dense.weight);
    take(flat, offset, block.dense.bias);
    if (block.norm) {
      take(flat, offset, block.norm->scale);
      take(flat, offset, block.norm->shift);
    }
  }
}

RealVector flatten_gradients(const MlpParameters& params, const Gradients& grads) {
  if (grads.blocks.size() != params.blocks.size())
    throw std::invalid_argument("flatten_gradients: block count mismatch");
  RealVector flat(trainable_count(params));
  long offset = 0;
  for (std::size_t i = 0; i < params.blocks.size(); ++i) {
    append(flat, offset, grads.blocks[i].weight);
    append(flat, offset, grads.blocks[i].bias);
    if (params.blocks[i].norm) {
      append(flat, offset, grads.blocks[i].scale);
      append(flat, offset, grads.blocks[i].shift);
    }
  }
  return flat;
}

namespace {

void lerp(RealVector& target, const RealVector& online, double tau) {
  target = tau * online + (1.0 - tau) * target;
}

void lerp(RealMatrix& target, const RealMatrix& online, double tau) {
  target = tau * online + (1.0 - tau) * target;
}

}  // namespace

void soft_update(MlpParameters& target, const MlpParameters& online, double tau) {
  if (tau <= 0.0 || tau > 1.0) throw std::invalid_argument("soft_update: tau must be in (0, 1]");
  if (target.blocks.size() != online.blocks.size())
    throw std::invalid_argument("soft_update: topology mismatch");
  for (std::size_t i = 0; i < target.blocks.size(); ++i) {
    Block& t = target.blocks[i];
    const Block& o = online.blocks[i];
    if (t.dense.weight.rows() != o.dense.weight.rows() ||
        t.dense.weight.cols() != o.dense.weight.cols())
      throw std::invalid_argument("soft_update: topology mismatch");
    lerp(t.dense.weight, o.dense.weight, tau);
    lerp(t.dense.bias, o.dense.bias, tau);
    if (t.norm.has_value() != o.norm.has_value())
      throw std::invalid_argument("soft_update: topology mismatch");
    if (t.norm) {
      lerp(t.norm->scale, o.norm->scale, tau);
      lerp(t.norm->shift, o.norm->shift, tau);
      lerp(t.norm->running_mean, o.norm->running_mean, tau);
      lerp(t.norm->running_var, o.norm->running_var, tau);
    }
  }
}

double max_abs_difference(const MlpParameters& a, const MlpParameters& b) {
  double worst = 0.0;
  auto track = [&worst](const auto& x, const auto& y) {
    if (x.size() > 0) worst = std::max(worst, (x - y).cwiseAbs().maxCoeff());
  };
  for (std::size_t i = 0; i < a.blocks.size(); ++i) {
    track(a.blocks[i].dense.weight, b.blocks[i].dense.weight);
    track(a.blocks[i].dense.bias, b.blocks[i].dense.bias);
    if (a.blocks[i].norm && b.blocks[i].norm) {
      track(a.blocks[i].norm->scale, b.blocks[i].norm->scale);
      track(a.blocks[i].norm->shift, b.blocks[i].norm->shift);
      track(a.blocks[i].norm->running_mean, b.blocks[i].norm->running_mean);
      track(a.blocks[i].norm->running_var, b.blocks[i].norm->running_var);
    }
  }
  return worst;
}

}  // namespace starris
