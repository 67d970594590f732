#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "plma/model.hpp"

namespace plma {

// ---------------------------------------------------------------------------
// Gradient estimator

// Score-function estimate of d E[cost] / d phi from N >= 2 samples:
//   G[i][j] = 1/(N-1) * sum_k (cost_k - mean(cost)) * [perm_k(i) == j]
// `perms` are the sampled (pre-improvement) permutations and `costs` the
// objective after local improvement.
Matrix grad_wrt_heatmap(const std::vector<Permutation>& perms, const std::vector<double>& costs,
                        int n);

// ---------------------------------------------------------------------------
// Optimizers

struct AdamState {
  TensorSet m;
  TensorSet v;
  std::uint64_t step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  static AdamState for_params(const TensorSet& params);
};

// Bias-corrected Adam. Throws std::domain_error naming the tensor when a
// gradient entry is not finite; nothing is modified in that case.
void adam_step(AdamState& state, TensorSet& params, const TensorSet& grads, double lr);

class Optimizer {
 public:
  virtual ~Optimizer() = default;
  virtual void step(TensorSet& params, const TensorSet& grads) = 0;
};

class AdamOptimizer final : public Optimizer {
 public:
  AdamOptimizer(const TensorSet& params, double lr)
      : state_(AdamState::for_params(params)), lr_(lr) {}
  void step(TensorSet& params, const TensorSet& grads) override {
    adam_step(state_, params, grads, lr_);
  }
  const AdamState& state() const { return state_; }

 private:
  AdamState state_;
  double lr_;
};

// Leaves parameters untouched; counts calls.
class NoOpOptimizer final : public Optimizer {
 public:
  void step(TensorSet&, const TensorSet&) override { ++calls_; }
  std::uint64_t calls() const { return calls_; }

 private:
  std::uint64_t calls_ = 0;
};

// ---------------------------------------------------------------------------
// Bookkeeping

struct Incumbent {
  std::optional<Permutation> best;
  double cost = std::numeric_limits<double>::infinity();
  std::vector<double> trace;  // incumbent cost after each epoch

  bool has_value() const { return best.has_value(); }
  // Strict improvement only, so the earliest of equal-cost samples is kept.
  bool offer(const Permutation& p, double c);
};

struct ScoredSample {
  Permutation perm;
  double cost = 0.0;
};

// Index of the lowest-cost sample; ties go to the lowest index.
std::size_t retention(const std::vector<ScoredSample>& group);

struct TrainRecord {
  int step = 0;
  double mean_cost = 0.0;  // mean over all improved samples in the step
  double best_cost = 0.0;  // mean over instances of the best sample (finetune: incumbent)
  double wall_time = 0.0;  // seconds since the loop started
};

using TrainCallback = std::function<void(const TrainRecord&)>;

// ---------------------------------------------------------------------------
// Pretraining with the pushforward loss

struct PretrainConfig {
  int steps = 0;
  int batch_size = 64;
  int samples = 400;       // N, chains per instance
  int chain_length = 0;    // L; 0 means n
  LocalSearchConfig local_search{1, 0};
  double learning_rate = 1e-4;
  double clip_grad_norm = 0.0;  // 0 disables
  std::uint64_t seed = 0;
  int workers = 0;
};

// Draws the b-th instance of step s; rng is a stream unique to (s, b).
using InstanceSource = std::function<QapInstance(Rng& rng)>;

InstanceSource uniform_source(int n);
InstanceSource geometric_source(int n);
InstanceSource fixed_source(QapInstance inst);

void pretrain(const PretrainConfig& cfg, const InstanceSource& source, HeatmapModel& model,
              Optimizer& optimizer, const TrainCallback& on_step = {});
void pretrain(const PretrainConfig& cfg, const InstanceSource& source, HeatmapModel& model,
              const TrainCallback& on_step = {});

// ---------------------------------------------------------------------------
// Warm-started MCMC finetuning

struct FinetuneConfig {
  int epochs = 200;          // T
  int starts = 20;           // K
  int chains = 20;           // M
  int chain_length = -1;     // L; negative means floor(n / 3)
  int long_run_length = -1;  // negative means 10 n
  int ls_iterations = -1;    // T_LS; negative means n
  int ls_candidates = 0;     // K_LS; 0 means n
  double learning_rate = 1e-4;
  double clip_grad_norm = 0.0;
  std::uint64_t seed = 0;
  int workers = 0;
  double time_limit = 0.0;  // seconds; 0 disables
  // Stop once every instance's incumbent is at or below its target
  // (best_known unless `targets` is given).
  bool stop_at_target = false;
  std::vector<double> targets;

  int resolved_chain_length(int n) const { return chain_length >= 0 ? chain_length : n / 3; }
  int resolved_long_run(int n) const { return long_run_length >= 0 ? long_run_length : 10 * n; }
  LocalSearchConfig resolved_local_search(int n) const {
    return {ls_iterations >= 0 ? ls_iterations : n, ls_candidates > 0 ? ls_candidates : n};
  }
};

struct FinetuneResult {
  std::vector<Incumbent> incumbents;               // per instance
  std::vector<std::vector<Permutation>> starts;    // retained start points, per instance
  int epochs_run = 0;
  double wall_time = 0.0;
};

// Runs the finetuning loop on a batch that shares the model. When
// `initial_starts` is given (K per instance) the long-run initialisation is
// skipped and those permutations are used as the first start points.
FinetuneResult finetune(const FinetuneConfig& cfg, const std::vector<QapInstance>& batch,
                        HeatmapModel& model, Optimizer& optimizer,
                        const std::vector<std::vector<Permutation>>* initial_starts = nullptr,
                        const TrainCallback& on_epoch = {});
// Uses Adam with cfg.learning_rate.
FinetuneResult finetune(const FinetuneConfig& cfg, const std::vector<QapInstance>& batch,
                        HeatmapModel& model, const TrainCallback& on_epoch = {});

}  // namespace plma
