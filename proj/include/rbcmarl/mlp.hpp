#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "rbcmarl/errors.hpp"
#include "rbcmarl/rng.hpp"

namespace rbcmarl {

// Allowed-action flags per head; an empty list admits every action.
using HeadMask = std::vector<std::uint8_t>;
using HeadMasks = std::vector<HeadMask>;

// Fully connected tanh trunk producing a shared feature, one linear
// categorical head per action dimension and a scalar value head on the same
// feature. Column j of every activation matrix is batch row j.
template <typename Scalar>
struct MlpParams {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  std::vector<Matrix> weights;
  std::vector<Vector> biases;
  std::vector<Matrix> head_weights;
  std::vector<Vector> head_biases;
  Matrix value_weight;
  Vector value_bias;

  int input_width() const { return static_cast<int>(weights.front().cols()); }
  int feature_width() const { return static_cast<int>(weights.back().rows()); }
  int num_heads() const { return static_cast<int>(head_weights.size()); }
  std::vector<int> head_sizes() const {
    std::vector<int> sizes;
    for (const auto& w : head_weights) sizes.push_back(static_cast<int>(w.rows()));
    return sizes;
  }

  std::vector<std::span<Scalar>> tensors() {
    std::vector<std::span<Scalar>> out;
    const auto add = [&](auto& m) {
      out.emplace_back(m.data(), static_cast<std::size_t>(m.size()));
    };
    for (std::size_t l = 0; l < weights.size(); ++l) {
      add(weights[l]);
      add(biases[l]);
    }
    for (std::size_t h = 0; h < head_weights.size(); ++h) {
      add(head_weights[h]);
      add(head_biases[h]);
    }
    add(value_weight);
    add(value_bias);
    return out;
  }

  std::vector<std::span<const Scalar>> tensors() const {
    auto* self = const_cast<MlpParams*>(this);
    std::vector<std::span<const Scalar>> out;
    for (auto s : self->tensors()) out.emplace_back(s.data(), s.size());
    return out;
  }

  std::size_t num_parameters() const {
    std::size_t n = 0;
    for (auto t : tensors()) n += t.size();
    return n;
  }

  void set_zero() {
    for (auto t : tensors()) std::fill(t.begin(), t.end(), Scalar(0));
  }

  MlpParams zeros_like() const {
    MlpParams z = *this;
    z.set_zero();
    return z;
  }

  template <typename Other>
  MlpParams<Other> cast() const {
    MlpParams<Other> o;
    for (const auto& m : weights) o.weights.push_back(m.template cast<Other>());
    for (const auto& m : biases) o.biases.push_back(m.template cast<Other>());
    for (const auto& m : head_weights) o.head_weights.push_back(m.template cast<Other>());
    for (const auto& m : head_biases) o.head_biases.push_back(m.template cast<Other>());
    o.value_weight = value_weight.template cast<Other>();
    o.value_bias = value_bias.template cast<Other>();
    return o;
  }

  bool operator==(const MlpParams& o) const {
    const auto a = tensors();
    const auto b = o.tensors();
    if (a.size() != b.size()) return false;
    for (std::size_t k = 0; k < a.size(); ++k) {
      if (a[k].size() != b[k].size() ||
          !std::equal(a[k].begin(), a[k].end(), b[k].begin())) {
        return false;
      }
    }
    return weights.size() == o.weights.size() &&
           head_weights.size() == o.head_weights.size();
  }
};

template <typename Scalar>
using Gradients = MlpParams<Scalar>;

// Weights uniform in +-1/sqrt(fan_in), biases zero.
template <typename Scalar>
MlpParams<Scalar> make_mlp(int input_width, int hidden_width, int hidden_layers,
                           const std::vector<int>& head_sizes, Rng& rng) {
  using Matrix = typename MlpParams<Scalar>::Matrix;
  using Vector = typename MlpParams<Scalar>::Vector;
  const auto init = [&](int rows, int cols) {
    Matrix m(rows, cols);
    const double bound = 1.0 / std::sqrt(static_cast<double>(cols));
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      for (Eigen::Index r = 0; r < m.rows(); ++r) {
        m(r, c) = static_cast<Scalar>(rng.uniform(-bound, bound));
      }
    }
    return m;
  };
  MlpParams<Scalar> p;
  int fan_in = input_width;
  for (int l = 0; l < hidden_layers; ++l) {
    p.weights.push_back(init(hidden_width, fan_in));
    p.biases.push_back(Vector::Zero(hidden_width));
    fan_in = hidden_width;
  }
  for (int n : head_sizes) {
    p.head_weights.push_back(init(n, hidden_width));
    p.head_biases.push_back(Vector::Zero(n));
  }
  p.value_weight = init(1, hidden_width);
  p.value_bias = Vector::Zero(1);
  return p;
}

template <typename Scalar>
struct ForwardCache {
  using Matrix = typename MlpParams<Scalar>::Matrix;
  Matrix input;
  std::vector<Matrix> activations;  // post-tanh per hidden layer
  std::vector<Matrix> log_probs;    // per head; masked entries are -inf
  std::vector<Matrix> probs;        // per head; masked entries are 0
  Matrix value;                     // 1 x batch
  HeadMasks masks;

  int batch() const { return static_cast<int>(input.cols()); }
  const Matrix& feature() const { return activations.back(); }
};

namespace detail {

inline bool allowed(const HeadMask& mask, Eigen::Index k) {
  return mask.empty() || mask[static_cast<std::size_t>(k)] != 0;
}

}  // namespace detail

template <typename Scalar>
ForwardCache<Scalar> forward(
    const MlpParams<Scalar>& params,
    const Eigen::Ref<const typename MlpParams<Scalar>::Matrix>& input,
    const HeadMasks& masks = {}) {
  using Matrix = typename MlpParams<Scalar>::Matrix;
  if (input.rows() != params.input_width()) {
    throw ConfigError("forward: observation width " +
                      std::to_string(input.rows()) + " does not match network input " +
                      std::to_string(params.input_width()));
  }
  if (!masks.empty() && static_cast<int>(masks.size()) != params.num_heads()) {
    throw ConfigError("forward: one mask per head required");
  }
  ForwardCache<Scalar> cache;
  cache.input = input;
  cache.masks = masks;
  cache.masks.resize(static_cast<std::size_t>(params.num_heads()));
  const Matrix* prev = &cache.input;
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    Matrix z = params.weights[l] * (*prev);
    z.colwise() += params.biases[l];
    cache.activations.push_back(z.array().tanh().matrix());
    prev = &cache.activations.back();
  }
  const Matrix& phi = cache.activations.back();
  const Eigen::Index batch = phi.cols();
  const Scalar neg_inf = -std::numeric_limits<Scalar>::infinity();
  for (std::size_t h = 0; h < params.head_weights.size(); ++h) {
    const HeadMask& mask = cache.masks[h];
    if (!mask.empty() &&
        static_cast<Eigen::Index>(mask.size()) != params.head_weights[h].rows()) {
      throw ConfigError("forward: mask size does not match head size");
    }
    Matrix z = params.head_weights[h] * phi;
    z.colwise() += params.head_biases[h];
    Matrix logp(z.rows(), batch);
    Matrix prob(z.rows(), batch);
    bool any = false;
    for (Eigen::Index k = 0; k < z.rows(); ++k) any |= detail::allowed(mask, k);
    if (!any) throw ConfigError("forward: head " + std::to_string(h) + " is fully masked");
    for (Eigen::Index b = 0; b < batch; ++b) {
      Scalar zmax = neg_inf;
      for (Eigen::Index k = 0; k < z.rows(); ++k) {
        if (detail::allowed(mask, k)) zmax = std::max(zmax, z(k, b));
      }
      Scalar sum = 0;
      for (Eigen::Index k = 0; k < z.rows(); ++k) {
        if (detail::allowed(mask, k)) sum += std::exp(z(k, b) - zmax);
      }
      const Scalar log_sum = std::log(sum);
      for (Eigen::Index k = 0; k < z.rows(); ++k) {
        if (detail::allowed(mask, k)) {
          logp(k, b) = z(k, b) - zmax - log_sum;
          prob(k, b) = std::exp(logp(k, b));
        } else {
          logp(k, b) = neg_inf;
          prob(k, b) = 0;
        }
      }
    }
    cache.log_probs.push_back(std::move(logp));
    cache.probs.push_back(std::move(prob));
  }
  cache.value = params.value_weight * phi;
  cache.value.array() += params.value_bias(0);
  return cache;
}

// Joint log-probability of `actions` (row-major, heads per row) per row.
template <typename Scalar>
std::vector<Scalar> log_prob(const ForwardCache<Scalar>& cache,
                             std::span<const int> actions) {
  const auto heads = cache.log_probs.size();
  std::vector<Scalar> out(static_cast<std::size_t>(cache.batch()), Scalar(0));
  for (std::size_t b = 0; b < out.size(); ++b) {
    for (std::size_t h = 0; h < heads; ++h) {
      out[b] += cache.log_probs[h](actions[b * heads + h], static_cast<Eigen::Index>(b));
    }
  }
  return out;
}

// Sum over heads of the categorical entropy over the admitted support.
template <typename Scalar>
std::vector<Scalar> entropy(const ForwardCache<Scalar>& cache) {
  std::vector<Scalar> out(static_cast<std::size_t>(cache.batch()), Scalar(0));
  for (std::size_t h = 0; h < cache.probs.size(); ++h) {
    const auto& p = cache.probs[h];
    const auto& lp = cache.log_probs[h];
    for (Eigen::Index b = 0; b < p.cols(); ++b) {
      for (Eigen::Index k = 0; k < p.rows(); ++k) {
        if (p(k, b) > 0) out[static_cast<std::size_t>(b)] -= p(k, b) * lp(k, b);
      }
    }
  }
  return out;
}

inline double categorical_entropy(std::span<const double> probs) {
  double h = 0;
  for (double p : probs) {
    if (p > 0) h -= p * std::log(p);
  }
  return h;
}

struct SampledAction {
  std::vector<int> indices;  // one per head
  double log_prob = 0;
};

// Draws one action per head for batch row `row` by inverse CDF. Masked
// entries carry zero probability and are never returned.
template <typename Scalar>
SampledAction sample(const ForwardCache<Scalar>& cache, int row, Rng& rng) {
  SampledAction a;
  const auto b = static_cast<Eigen::Index>(row);
  for (std::size_t h = 0; h < cache.probs.size(); ++h) {
    const auto& p = cache.probs[h];
    const double u = rng.uniform();
    double cum = 0;
    Eigen::Index pick = -1;
    Eigen::Index last_allowed = -1;
    for (Eigen::Index k = 0; k < p.rows(); ++k) {
      if (p(k, b) <= 0) continue;
      last_allowed = k;
      cum += static_cast<double>(p(k, b));
      if (u < cum) {
        pick = k;
        break;
      }
    }
    if (pick < 0) pick = last_allowed;
    if (pick < 0) throw RuntimeError("sample: head has no admissible action");
    a.indices.push_back(static_cast<int>(pick));
    a.log_prob += static_cast<double>(cache.log_probs[h](pick, b));
  }
  return a;
}

// Exact backpropagation of seeds on the head logits and the value output.
template <typename Scalar>
Gradients<Scalar> backward(
    const MlpParams<Scalar>& params, const ForwardCache<Scalar>& cache,
    const std::vector<typename MlpParams<Scalar>::Matrix>& dlogits,
    const typename MlpParams<Scalar>::Matrix& dvalue) {
  using Matrix = typename MlpParams<Scalar>::Matrix;
  Gradients<Scalar> g = params.zeros_like();
  const Matrix& phi = cache.feature();
  Matrix dphi = params.value_weight.transpose() * dvalue;
  g.value_weight.noalias() = dvalue * phi.transpose();
  g.value_bias(0) = dvalue.sum();
  for (std::size_t h = 0; h < params.head_weights.size(); ++h) {
    g.head_weights[h].noalias() = dlogits[h] * phi.transpose();
    g.head_biases[h] = dlogits[h].rowwise().sum();
    dphi.noalias() += params.head_weights[h].transpose() * dlogits[h];
  }
  Matrix dact = std::move(dphi);
  for (std::size_t l = params.weights.size(); l-- > 0;) {
    const Matrix& act = cache.activations[l];
    Matrix dz = (dact.array() * (Scalar(1) - act.array().square())).matrix();
    const Matrix& prev = l == 0 ? cache.input : cache.activations[l - 1];
    g.weights[l].noalias() = dz * prev.transpose();
    g.biases[l] = dz.rowwise().sum();
    if (l > 0) dact.noalias() = params.weights[l].transpose() * dz;
  }
  return g;
}

template <typename Scalar>
void accumulate(Gradients<Scalar>& into, const Gradients<Scalar>& g) {
  auto dst = into.tensors();
  const auto src = g.tensors();
  for (std::size_t t = 0; t < dst.size(); ++t) {
    for (std::size_t k = 0; k < dst[t].size(); ++k) dst[t][k] += src[t][k];
  }
}

}  // namespace rbcmarl
