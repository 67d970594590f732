#include "plma/training.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>

#include "plma/parallel.hpp"

namespace plma {

Matrix grad_wrt_heatmap(const std::vector<Permutation>& perms, const std::vector<double>& costs,
                        int n) {
  const std::size_t count = perms.size();
  if (count != costs.size()) throw std::invalid_argument("perms and costs differ in length");
  if (count < 2) throw std::invalid_argument("gradient estimator needs at least two samples");
  double total = 0.0;
  for (double c : costs) total += c;
  const double baseline = total / static_cast<double>(count);
  Matrix g = Matrix::Zero(n, n);
  for (std::size_t k = 0; k < count; ++k) {
    if (perms[k].size() != n) throw std::invalid_argument("sample has the wrong size");
    const double w = costs[k] - baseline;
    for (int i = 0; i < n; ++i) g(i, perms[k][i]) += w;
  }
  g /= static_cast<double>(count - 1);
  return g;
}

AdamState AdamState::for_params(const TensorSet& params) {
  AdamState s;
  s.m = params.zeros_like();
  s.v = params.zeros_like();
  return s;
}

void adam_step(AdamState& state, TensorSet& params, const TensorSet& grads, double lr) {
  if (!params.same_layout(grads) || !params.same_layout(state.m)) {
    throw std::invalid_argument("adam: parameter, gradient and moment layouts differ");
  }
  for (std::size_t i = 0; i < grads.size(); ++i) {
    if (!grads[i].allFinite()) {
      throw std::domain_error("non-finite gradient in tensor '" + grads.name(i) + "'");
    }
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t i = 0; i < grads.size(); ++i) {
    auto m = state.m[i].array();
    auto v = state.v[i].array();
    const auto g = grads[i].array();
    m = state.beta1 * m + (1.0 - state.beta1) * g;
    v = state.beta2 * v + (1.0 - state.beta2) * g.square();
    params[i].array() -= lr * (m / c1) / ((v / c2).sqrt() + state.eps);
  }
}

bool Incumbent::offer(const Permutation& p, double c) {
  if (best && !(c < cost)) return false;
  best = p;
  cost = c;
  return true;
}

std::size_t retention(const std::vector<ScoredSample>& group) {
  if (group.empty()) throw std::invalid_argument("retention needs a nonempty group");
  std::size_t best = 0;
  for (std::size_t m = 1; m < group.size(); ++m)
    if (group[m].cost < group[best].cost) best = m;
  return best;
}

InstanceSource uniform_source(int n) {
  return [n](Rng& rng) { return gen_uniform(n, rng()); };
}

InstanceSource geometric_source(int n) {
  return [n](Rng& rng) { return gen_geometric(n, rng()); };
}

InstanceSource fixed_source(QapInstance inst) {
  return [inst = std::move(inst)](Rng&) { return inst; };
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void clip_by_global_norm(TensorSet& grads, double max_norm) {
  if (max_norm <= 0.0) return;
  double sq = 0.0;
  for (std::size_t i = 0; i < grads.size(); ++i) sq += grads[i].squaredNorm();
  const double norm = std::sqrt(sq);
  if (norm > max_norm) {
    for (std::size_t i = 0; i < grads.size(); ++i) grads[i] *= max_norm / norm;
  }
}

struct Sample {
  Permutation drawn;     // MH terminal state; the estimator differentiates here
  Permutation improved;  // after local improvement
  double cost = 0.0;     // objective of `improved`
};

}  // namespace

void pretrain(const PretrainConfig& cfg, const InstanceSource& source, HeatmapModel& model,
              Optimizer& optimizer, const TrainCallback& on_step) {
  if (cfg.samples < 2) throw std::invalid_argument("pretraining needs at least two samples");
  if (cfg.batch_size < 1) throw std::invalid_argument("batch size must be positive");
  const auto t0 = Clock::now();
  const Rng root(cfg.seed, Rng::tag("pretrain"));
  const Rng instance_root = root.split(Rng::tag("instances"));
  const std::size_t b_count = static_cast<std::size_t>(cfg.batch_size);
  const std::size_t n_samples = static_cast<std::size_t>(cfg.samples);

  for (int s = 0; s < cfg.steps; ++s) {
    std::vector<QapInstance> batch(b_count);
    std::vector<std::unique_ptr<ModelTape>> tapes(b_count);
    parallel_for(b_count, cfg.workers, [&](std::size_t b) {
      Rng r = instance_root.split(static_cast<std::uint64_t>(s)).split(b);
      batch[b] = source(r);
      tapes[b] = model.forward(batch[b]);
    });

    std::vector<Sample> samples(b_count * n_samples);
    const Rng step_root = root.split(static_cast<std::uint64_t>(s));
    parallel_for(samples.size(), cfg.workers, [&](std::size_t u) {
      const std::size_t b = u / n_samples;
      const std::size_t k = u % n_samples;
      const QapInstance& inst = batch[b];
      const Heatmap& h = tapes[b]->heatmap;
      Rng r = step_root.split(b).split(k);
      ChainState st(h, Permutation::random(inst.n, r));
      run_chain(h, st, cfg.chain_length > 0 ? cfg.chain_length : inst.n, r);
      Sample& out = samples[u];
      out.drawn = st.perm;
      LocalSearchConfig ls = cfg.local_search;
      if (ls.candidates <= 0) ls.candidates = inst.n;
      out.improved = local_improve(inst, st.perm, ls, r);
      out.cost = evaluate(inst, out.improved);
    });

    TensorSet grads = model.params().zeros_like();
    double cost_sum = 0.0;
    double best_sum = 0.0;
    for (std::size_t b = 0; b < b_count; ++b) {
      std::vector<Permutation> perms;
      std::vector<double> costs;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < n_samples; ++k) {
        const Sample& smp = samples[b * n_samples + k];
        perms.push_back(smp.drawn);
        costs.push_back(smp.cost);
        cost_sum += smp.cost;
        best = std::min(best, smp.cost);
      }
      best_sum += best;
      const Matrix g = grad_wrt_heatmap(perms, costs, batch[b].n) / static_cast<double>(b_count);
      model.backward(*tapes[b], g, grads);
    }
    clip_by_global_norm(grads, cfg.clip_grad_norm);
    optimizer.step(model.params(), grads);

    if (on_step) {
      on_step(TrainRecord{s + 1, cost_sum / static_cast<double>(samples.size()),
                          best_sum / static_cast<double>(b_count), seconds_since(t0)});
    }
  }
}

void pretrain(const PretrainConfig& cfg, const InstanceSource& source, HeatmapModel& model,
              const TrainCallback& on_step) {
  AdamOptimizer adam(model.params(), cfg.learning_rate);
  pretrain(cfg, source, model, adam, on_step);
}

FinetuneResult finetune(const FinetuneConfig& cfg, const std::vector<QapInstance>& batch,
                        HeatmapModel& model, Optimizer& optimizer,
                        const std::vector<std::vector<Permutation>>* initial_starts,
                        const TrainCallback& on_epoch) {
  const std::size_t big_k = static_cast<std::size_t>(cfg.starts);
  const std::size_t big_m = static_cast<std::size_t>(cfg.chains);
  if (cfg.starts < 1 || cfg.chains < 1 || big_k * big_m < 2) {
    throw std::invalid_argument("finetuning needs K >= 1, M >= 1 and K * M >= 2");
  }
  if (!cfg.targets.empty() && cfg.targets.size() != batch.size()) {
    throw std::invalid_argument("one target per instance expected");
  }
  const auto t0 = Clock::now();
  const std::size_t b_count = batch.size();
  const Rng root(cfg.seed, Rng::tag("finetune"));

  FinetuneResult result;
  result.incumbents.resize(b_count);
  result.starts.resize(b_count);

  std::vector<std::unique_ptr<ModelTape>> tapes(b_count);
  auto run_forward = [&] {
    parallel_for(b_count, cfg.workers, [&](std::size_t i) { tapes[i] = model.forward(batch[i]); });
  };
  run_forward();

  if (initial_starts) {
    if (initial_starts->size() != b_count) {
      throw std::invalid_argument("initial start points must be given per instance");
    }
    for (std::size_t i = 0; i < b_count; ++i) {
      if ((*initial_starts)[i].size() != big_k) {
        throw std::invalid_argument("expected K initial start points per instance");
      }
      result.starts[i] = (*initial_starts)[i];
    }
  } else {
    const Rng init_root = root.split(Rng::tag("init"));
    for (std::size_t i = 0; i < b_count; ++i) {
      SamplerConfig sc;
      sc.workers = cfg.workers;
      result.starts[i] = sample_initial(tapes[i]->heatmap, cfg.starts,
                                        cfg.resolved_long_run(batch[i].n), init_root.split(i), sc);
    }
  }

  auto target_of = [&](std::size_t i) -> std::optional<double> {
    if (!cfg.targets.empty()) return cfg.targets[i];
    return batch[i].best_known;
  };
  auto all_at_target = [&] {
    for (std::size_t i = 0; i < b_count; ++i) {
      const auto tgt = target_of(i);
      if (!tgt || !result.incumbents[i].has_value()) return false;
      if (result.incumbents[i].cost > *tgt + 1e-9 * std::max(1.0, std::abs(*tgt))) return false;
    }
    return true;
  };

  const std::size_t per_instance = big_k * big_m;
  std::vector<Sample> samples(b_count * per_instance);
  for (int t = 1; t <= cfg.epochs; ++t) {
    if (t > 1) run_forward();
    const Rng epoch_root = root.split(static_cast<std::uint64_t>(t));

    parallel_for(samples.size(), cfg.workers, [&](std::size_t u) {
      const std::size_t i = u / per_instance;
      const std::size_t km = u % per_instance;
      const QapInstance& inst = batch[i];
      const Heatmap& h = tapes[i]->heatmap;
      Rng r = epoch_root.split(i).split(km);
      ChainState st(h, result.starts[i][km / big_m]);
      run_chain(h, st, cfg.resolved_chain_length(inst.n), r);
      Sample& out = samples[u];
      out.drawn = st.perm;
      out.improved = local_improve(inst, st.perm, cfg.resolved_local_search(inst.n), r);
      out.cost = evaluate(inst, out.improved);
    });

    // Gradient: batch mean of per-instance estimates, reduced in instance order.
    TensorSet grads = model.params().zeros_like();
    double cost_sum = 0.0;
    for (std::size_t i = 0; i < b_count; ++i) {
      std::vector<Permutation> perms;
      std::vector<double> costs;
      perms.reserve(per_instance);
      costs.reserve(per_instance);
      for (std::size_t km = 0; km < per_instance; ++km) {
        const Sample& s = samples[i * per_instance + km];
        perms.push_back(s.drawn);
        costs.push_back(s.cost);
        cost_sum += s.cost;
      }
      const Matrix g =
          grad_wrt_heatmap(perms, costs, batch[i].n) / static_cast<double>(b_count);
      model.backward(*tapes[i], g, grads);
    }
    clip_by_global_norm(grads, cfg.clip_grad_norm);
    optimizer.step(model.params(), grads);

    // Within-group best retention and incumbent bookkeeping.
    double best_sum = 0.0;
    for (std::size_t i = 0; i < b_count; ++i) {
      for (std::size_t k = 0; k < big_k; ++k) {
        std::vector<ScoredSample> group;
        group.reserve(big_m);
        for (std::size_t m = 0; m < big_m; ++m) {
          const Sample& s = samples[i * per_instance + k * big_m + m];
          group.push_back({s.improved, s.cost});
          result.incumbents[i].offer(s.improved, s.cost);
        }
        result.starts[i][k] = group[retention(group)].perm;
      }
      result.incumbents[i].trace.push_back(result.incumbents[i].cost);
      best_sum += result.incumbents[i].cost;
    }
    result.epochs_run = t;

    if (on_epoch) {
      on_epoch(TrainRecord{t, cost_sum / static_cast<double>(samples.size()),
                           best_sum / static_cast<double>(b_count), seconds_since(t0)});
    }
    if (cfg.stop_at_target && all_at_target()) break;
    if (cfg.time_limit > 0.0 && seconds_since(t0) >= cfg.time_limit) break;
  }
  result.wall_time = seconds_since(t0);
  return result;
}

FinetuneResult finetune(const FinetuneConfig& cfg, const std::vector<QapInstance>& batch,
                        HeatmapModel& model, const TrainCallback& on_epoch) {
  AdamOptimizer adam(model.params(), cfg.learning_rate);
  return finetune(cfg, batch, model, adam, nullptr, on_epoch);
}

}  // namespace plma
