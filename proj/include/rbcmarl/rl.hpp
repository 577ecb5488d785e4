#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "rbcmarl/mlp.hpp"

namespace rbcmarl {

// Reward-to-go G_t = r_t + gamma * G_{t+1}, G_T = 0 (no bootstrap).
inline std::vector<double> discounted_returns(std::span<const double> rewards,
                                              double gamma) {
  std::vector<double> g(rewards.size());
  double acc = 0;
  for (std::size_t t = rewards.size(); t-- > 0;) {
    acc = rewards[t] + gamma * acc;
    g[t] = acc;
  }
  return g;
}

// (A - mean) / (std + 1e-8) with A = G - V and the population std.
inline std::vector<double> standardize(std::span<const double> a) {
  std::vector<double> out(a.begin(), a.end());
  if (out.empty()) return out;
  double mean = 0;
  for (double x : out) mean += x;
  mean /= static_cast<double>(out.size());
  double var = 0;
  for (double x : out) var += (x - mean) * (x - mean);
  const double std = std::sqrt(var / static_cast<double>(out.size()));
  for (double& x : out) x = (x - mean) / (std + 1e-8);
  return out;
}

inline std::vector<double> advantages(std::span<const double> returns,
                                      std::span<const double> values) {
  std::vector<double> a(returns.size());
  for (std::size_t k = 0; k < a.size(); ++k) a[k] = returns[k] - values[k];
  return standardize(a);
}

inline double huber(double x, double delta = 1.0) {
  const double ax = std::abs(x);
  return ax <= delta ? 0.5 * x * x : delta * (ax - 0.5 * delta);
}

inline double huber_derivative(double x, double delta = 1.0) {
  return std::clamp(x, -delta, delta);
}

struct LossAndSeed {
  double loss = 0;
  std::vector<double> seed;  // d loss / d input, per element
};

// Mean Huber loss of value predictions against returns.
inline LossAndSeed huber_value_loss(std::span<const double> values,
                                    std::span<const double> returns) {
  LossAndSeed r;
  const auto n = static_cast<double>(values.size());
  r.seed.resize(values.size());
  for (std::size_t k = 0; k < values.size(); ++k) {
    const double d = values[k] - returns[k];
    r.loss += huber(d) / n;
    r.seed[k] = huber_derivative(d) / n;
  }
  return r;
}

// Pointwise clipped surrogate min(r A, clip(r, 1-eps, 1+eps) A).
inline double ppo_objective(double ratio, double advantage, double clip) {
  const double clipped = std::clamp(ratio, 1.0 - clip, 1.0 + clip);
  return std::min(ratio * advantage, clipped * advantage);
}

// d objective / d log pi_new.
inline double ppo_objective_derivative(double ratio, double advantage,
                                       double clip) {
  const double clipped = std::clamp(ratio, 1.0 - clip, 1.0 + clip);
  if (ratio * advantage <= clipped * advantage) return ratio * advantage;
  return ratio == clipped ? ratio * advantage : 0.0;
}

// -mean(min(r A, clip(r) A)) with r = exp(logp_new - logp_old). The seed is
// the derivative with respect to logp_new.
inline LossAndSeed ppo_surrogate(std::span<const double> logp_new,
                                 std::span<const double> logp_old,
                                 std::span<const double> adv, double clip) {
  LossAndSeed r;
  const auto n = static_cast<double>(logp_new.size());
  r.seed.resize(logp_new.size());
  for (std::size_t k = 0; k < logp_new.size(); ++k) {
    const double ratio = std::exp(logp_new[k] - logp_old[k]);
    r.loss -= ppo_objective(ratio, adv[k], clip) / n;
    r.seed[k] = -ppo_objective_derivative(ratio, adv[k], clip) / n;
  }
  return r;
}

// Batch-mean policy gradient loss -mean(A logp) - alpha mean(H). The seed is
// the derivative with respect to logp.
inline LossAndSeed reinforce_loss(std::span<const double> logp,
                                  std::span<const double> adv,
                                  std::span<const double> entropy,
                                  double alpha) {
  LossAndSeed r;
  const auto n = static_cast<double>(logp.size());
  r.seed.resize(logp.size());
  for (std::size_t k = 0; k < logp.size(); ++k) {
    r.loss -= (adv[k] * logp[k] + alpha * entropy[k]) / n;
    r.seed[k] = -adv[k] / n;
  }
  return r;
}

template <typename Scalar>
double global_norm(const Gradients<Scalar>& g) {
  double sq = 0;
  for (auto t : g.tensors()) {
    for (Scalar x : t) sq += static_cast<double>(x) * static_cast<double>(x);
  }
  return std::sqrt(sq);
}

// Rescales so the global l2 norm is at most max_norm. Returns the norm
// before clipping.
template <typename Scalar>
double clip_gradients(Gradients<Scalar>& g, double max_norm) {
  const double norm = global_norm(g);
  if (norm > max_norm) {
    const auto scale = static_cast<Scalar>(max_norm / norm);
    for (auto t : g.tensors()) {
      for (Scalar& x : t) x *= scale;
    }
  }
  return norm;
}

template <typename Scalar>
struct AdamState {
  MlpParams<Scalar> m;
  MlpParams<Scalar> v;
  long step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  static AdamState like(const MlpParams<Scalar>& params, double beta1 = 0.9,
                        double beta2 = 0.999, double epsilon = 1e-8) {
    AdamState s;
    s.m = params.zeros_like();
    s.v = params.zeros_like();
    s.beta1 = beta1;
    s.beta2 = beta2;
    s.epsilon = epsilon;
    return s;
  }
};

// Bias-corrected Adam.
template <typename Scalar>
void adam_step(MlpParams<Scalar>& params, const Gradients<Scalar>& grads,
               AdamState<Scalar>& state, double lr) {
  state.step += 1;
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  auto p = params.tensors();
  const auto g = grads.tensors();
  auto m = state.m.tensors();
  auto v = state.v.tensors();
  for (std::size_t t = 0; t < p.size(); ++t) {
    for (std::size_t k = 0; k < p[t].size(); ++k) {
      const double gk = static_cast<double>(g[t][k]);
      const double mk = state.beta1 * static_cast<double>(m[t][k]) + (1 - state.beta1) * gk;
      const double vk = state.beta2 * static_cast<double>(v[t][k]) + (1 - state.beta2) * gk * gk;
      m[t][k] = static_cast<Scalar>(mk);
      v[t][k] = static_cast<Scalar>(vk);
      const double update = lr * (mk / c1) / (std::sqrt(vk / c2) + state.epsilon);
      p[t][k] = static_cast<Scalar>(static_cast<double>(p[t][k]) - update);
    }
  }
}

}  // namespace rbcmarl
