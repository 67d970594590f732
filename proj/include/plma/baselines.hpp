#pragma once

#include <vector>

#include "plma/training.hpp"

namespace plma {

// Minimum-cost assignment; among optimal permutations the lexicographically
// smallest image vector is returned.
Permutation lap_argmin(const Matrix& cost);

struct IpfpConfig {
  int max_iters = 100;  // K
  double tol = 1e-9;
  int restarts = 1;
  std::uint64_t seed = 0;
  int workers = 0;
};

struct IpfpResult {
  Permutation perm;           // best discrete B_k
  double cost = 0.0;
  std::vector<double> trace;  // best-so-far cost after each iteration
  int iterations = 0;
  bool converged = false;
};

// Integer projected fixed point from a doubly stochastic start.
IpfpResult ipfp(const QapInstance& inst, const Matrix& x0, const IpfpConfig& cfg);
IpfpResult ipfp(const QapInstance& inst, const Permutation& x0, const IpfpConfig& cfg);

// Positive random matrix scaled by Sinkhorn iterations until every row and
// column sums to 1 within 1e-12.
Matrix random_doubly_stochastic(int n, Rng& rng);

// cfg.restarts independent runs from random doubly stochastic starts; restart
// r draws from Rng(cfg.seed, tag).split(r). Returns the best run (lowest
// index on ties).
IpfpResult ipfp_restarts(const QapInstance& inst, const IpfpConfig& cfg);

struct ArSample {
  Permutation perm;
  double log_prob = 0.0;
};

// Row-by-row sampling from the softmax of phi(i, .) over unassigned columns.
ArSample ar_seq_sample(const Heatmap& h, Rng& rng);
double ar_seq_log_prob(const Heatmap& h, const Permutation& perm);
// d log q(perm) / d phi.
Matrix ar_seq_log_prob_grad(const Heatmap& h, const Permutation& perm);

// Active search with the auto-regressive sampler: each epoch draws K * M
// fresh samples per instance (no warm start), improves them with the same
// local search as finetuning and takes a REINFORCE step with a mean baseline.
FinetuneResult ar_seq_search(const FinetuneConfig& cfg, const std::vector<QapInstance>& batch,
                             HeatmapModel& model, Optimizer& optimizer,
                             const TrainCallback& on_epoch = {});

// The finetuning loop with phi frozen and the optimizer replaced by a no-op.
FinetuneResult gd_free(const FinetuneConfig& cfg, const QapInstance& inst, const Heatmap& phi);

}  // namespace plma
