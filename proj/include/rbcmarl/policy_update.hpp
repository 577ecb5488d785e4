#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "rbcmarl/config.hpp"
#include "rbcmarl/errors.hpp"
#include "rbcmarl/mlp.hpp"
#include "rbcmarl/parallel.hpp"
#include "rbcmarl/rl.hpp"

namespace rbcmarl {

struct LossSettings {
  Algorithm algorithm = Algorithm::kPpo;
  double clip = 0.2;
  double entropy_coeff = 0.0;
  double value_coef = 0.5;
};

struct LossReport {
  double loss = 0;
  double policy_loss = 0;
  double value_loss = 0;
  double entropy = 0;  // batch mean, summed over heads

  LossReport& operator+=(const LossReport& o) {
    loss += o.loss;
    policy_loss += o.policy_loss;
    value_loss += o.value_loss;
    entropy += o.entropy;
    return *this;
  }
};

// Training rows for one shared policy: observations are column-major
// (width x rows), actions row-major (heads per row).
struct PolicyBatch {
  const float* obs = nullptr;
  int width = 0;
  long rows = 0;
  std::span<const int> actions;
  std::span<const double> old_logp;
  std::span<const double> advantages;
  std::span<const double> returns;
  HeadMasks masks;
};

// Loss and exact gradient for rows [begin, end) of a batch whose losses are
// averaged over `total_rows`:
//   policy term (clipped surrogate or REINFORCE) - alpha * entropy
//   + value_coef * Huber(V - G).
// Gradients are added into `grads`.
template <typename Scalar>
LossReport loss_and_gradient(
    const MlpParams<Scalar>& params,
    const Eigen::Ref<const typename MlpParams<Scalar>::Matrix>& obs,
    const HeadMasks& masks, std::span<const int> actions,
    std::span<const double> old_logp, std::span<const double> adv,
    std::span<const double> returns, const LossSettings& s, double total_rows,
    Gradients<Scalar>& grads) {
  using Matrix = typename MlpParams<Scalar>::Matrix;
  const auto cache = forward(params, obs, masks);
  const int batch = cache.batch();
  const std::size_t heads = cache.probs.size();
  const double inv_n = 1.0 / total_rows;

  std::vector<Matrix> dlogits;
  for (const auto& p : cache.probs) dlogits.push_back(Matrix::Zero(p.rows(), p.cols()));
  Matrix dvalue(1, batch);
  LossReport rep;

  for (int b = 0; b < batch; ++b) {
    const auto ub = static_cast<std::size_t>(b);
    double logp = 0;
    for (std::size_t h = 0; h < heads; ++h) {
      logp += static_cast<double>(cache.log_probs[h](actions[ub * heads + h], b));
    }
    double seed_logp = 0;
    if (s.algorithm == Algorithm::kPpo) {
      const double ratio = std::exp(logp - old_logp[ub]);
      rep.policy_loss -= ppo_objective(ratio, adv[ub], s.clip) * inv_n;
      seed_logp = -ppo_objective_derivative(ratio, adv[ub], s.clip) * inv_n;
    } else {
      rep.policy_loss -= adv[ub] * logp * inv_n;
      seed_logp = -adv[ub] * inv_n;
    }
    const double seed_entropy = -s.entropy_coeff * inv_n;
    for (std::size_t h = 0; h < heads; ++h) {
      const auto& p = cache.probs[h];
      const auto& lp = cache.log_probs[h];
      double head_entropy = 0;
      for (Eigen::Index k = 0; k < p.rows(); ++k) {
        if (p(k, b) > 0) head_entropy -= static_cast<double>(p(k, b) * lp(k, b));
      }
      rep.entropy += head_entropy * inv_n;
      const int chosen = actions[ub * heads + h];
      for (Eigen::Index k = 0; k < p.rows(); ++k) {
        const double pk = static_cast<double>(p(k, b));
        if (pk <= 0) continue;
        const double onehot = k == chosen ? 1.0 : 0.0;
        const double dh = -pk * (static_cast<double>(lp(k, b)) + head_entropy);
        dlogits[h](k, b) = static_cast<Scalar>(seed_logp * (onehot - pk) + seed_entropy * dh);
      }
    }
    const double diff = static_cast<double>(cache.value(0, b)) - returns[ub];
    rep.value_loss += huber(diff) * inv_n;
    dvalue(0, b) = static_cast<Scalar>(s.value_coef * huber_derivative(diff) * inv_n);
  }
  rep.loss = rep.policy_loss - s.entropy_coeff * rep.entropy + s.value_coef * rep.value_loss;
  accumulate(grads, backward(params, cache, dlogits, dvalue));
  return rep;
}

struct UpdateStats {
  LossReport loss;       // last epoch
  double grad_norm = 0;  // last epoch, before clipping
};

struct UpdateSettings {
  LossSettings loss;
  int epochs = 2;
  double learning_rate = 1e-3;
  double max_grad_norm = 2.0;
  long chunk_rows = 2048;
  int workers = 1;
};

// Full-batch update: `epochs` rounds of (gradient over all rows, global norm
// clip, Adam step). Rows are processed in fixed-size chunks whose gradients
// are summed in chunk order, so results do not depend on the worker count.
template <typename Scalar>
UpdateStats update_policy(MlpParams<Scalar>& params, AdamState<Scalar>& opt,
                          const PolicyBatch& batch, const UpdateSettings& u) {
  using Matrix = typename MlpParams<Scalar>::Matrix;
  UpdateStats stats;
  if (batch.rows == 0) return stats;
  const std::size_t heads = static_cast<std::size_t>(params.num_heads());
  const long chunks = (batch.rows + u.chunk_rows - 1) / u.chunk_rows;
  for (int epoch = 0; epoch < u.epochs; ++epoch) {
    std::vector<Gradients<Scalar>> partial(static_cast<std::size_t>(chunks));
    std::vector<LossReport> reports(static_cast<std::size_t>(chunks));
    parallel_for(static_cast<int>(chunks), u.workers, [&](int c) {
      const long begin = c * u.chunk_rows;
      const long end = std::min(batch.rows, begin + u.chunk_rows);
      const auto n = static_cast<std::size_t>(end - begin);
      const auto ub = static_cast<std::size_t>(begin);
      Eigen::Map<const Eigen::MatrixXf> all(batch.obs, batch.width, batch.rows);
      Matrix obs = all.middleCols(begin, end - begin).template cast<Scalar>();
      auto& g = partial[static_cast<std::size_t>(c)];
      g = params.zeros_like();
      reports[static_cast<std::size_t>(c)] = loss_and_gradient<Scalar>(
          params, obs, batch.masks, batch.actions.subspan(ub * heads, n * heads),
          batch.old_logp.subspan(ub, n), batch.advantages.subspan(ub, n),
          batch.returns.subspan(ub, n), u.loss, static_cast<double>(batch.rows), g);
    });
    Gradients<Scalar> grads = params.zeros_like();
    LossReport total;
    for (long c = 0; c < chunks; ++c) {
      accumulate(grads, partial[static_cast<std::size_t>(c)]);
      total += reports[static_cast<std::size_t>(c)];
    }
    if (!std::isfinite(total.loss)) {
      throw RuntimeError("non-finite loss (policy " + std::to_string(total.policy_loss) +
                         ", value " + std::to_string(total.value_loss) + ", entropy " +
                         std::to_string(total.entropy) + ")");
    }
    stats.loss = total;
    stats.grad_norm = clip_gradients(grads, u.max_grad_norm);
    if (!std::isfinite(stats.grad_norm)) throw RuntimeError("non-finite gradient norm");
    adam_step(params, grads, opt, u.learning_rate);
  }
  return stats;
}

}  // namespace rbcmarl
