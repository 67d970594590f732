#include "plma/baselines.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "plma/parallel.hpp"

namespace plma {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Shortest augmenting path Hungarian method on a dense matrix. Returns the
// row -> column assignment together with dual potentials satisfying
// u[i] + v[j] <= cost(i, j), with equality on assigned pairs.
struct LapSolution {
  std::vector<int> row_to_col;
  std::vector<double> u;
  std::vector<double> v;
};

LapSolution hungarian(const Matrix& a) {
  const int n = static_cast<int>(a.rows());
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), kInf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = kInf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = a(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  LapSolution s;
  s.row_to_col.assign(n, -1);
  for (int j = 1; j <= n; ++j) s.row_to_col[p[j] - 1] = j - 1;
  s.u.assign(u.begin() + 1, u.end());
  s.v.assign(v.begin() + 1, v.end());
  return s;
}

double frobenius_inner(const Matrix& a, const Matrix& b) { return (a.array() * b.array()).sum(); }

void check_doubly_stochastic(const Matrix& x, int n) {
  if (x.rows() != n || x.cols() != n) throw std::invalid_argument("ipfp: start has wrong shape");
  if (!x.allFinite() || (x.array() < 0.0).any()) {
    throw std::invalid_argument("ipfp: start must be finite and nonnegative");
  }
  const double row_err = (x.rowwise().sum().array() - 1.0).abs().maxCoeff();
  const double col_err = (x.colwise().sum().array() - 1.0).abs().maxCoeff();
  if (row_err > 1e-9 || col_err > 1e-9) {
    throw std::invalid_argument("ipfp: start is not doubly stochastic");
  }
}

}  // namespace

Permutation lap_argmin(const Matrix& cost) {
  if (cost.rows() != cost.cols()) throw std::invalid_argument("lap_argmin: matrix not square");
  if (!cost.allFinite()) throw std::invalid_argument("lap_argmin: non-finite cost");
  const int n = static_cast<int>(cost.rows());
  if (n == 0) return Permutation{};

  LapSolution s = hungarian(cost);
  const double tol = 1e-9 * std::max(1.0, cost.cwiseAbs().maxCoeff());
  auto tight = [&](int i, int j) { return cost(i, j) - s.u[i] - s.v[j] <= tol; };

  // Every optimal assignment uses only tight pairs, so the lexicographically
  // smallest one is built greedily row by row, rerouting the current perfect
  // matching of the tight graph along an alternating path when needed.
  std::vector<int> row_to_col = s.row_to_col;
  std::vector<int> col_to_row(n);
  for (int i = 0; i < n; ++i) col_to_row[row_to_col[i]] = i;
  std::vector<char> col_fixed(n, 0);
  std::vector<int> parent_col(n);
  std::vector<char> seen(n);

  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (col_fixed[j] || !tight(i, j)) continue;
      if (row_to_col[i] == j) break;
      // Row r loses column j; find a path from r to the column i releases.
      const int target = row_to_col[i];
      const int r = col_to_row[j];
      std::fill(seen.begin(), seen.end(), 0);
      std::vector<int> queue{r};
      std::vector<int> via(n, -1);  // via[row] = column through which it was reached
      int found = -1;
      for (std::size_t q = 0; q < queue.size() && found < 0; ++q) {
        const int x = queue[q];
        for (int c = 0; c < n; ++c) {
          if (c == j || col_fixed[c] || seen[c] || !tight(x, c)) continue;
          seen[c] = 1;
          parent_col[c] = x;
          if (c == target) {
            found = c;
            break;
          }
          const int y = col_to_row[c];
          via[y] = c;
          queue.push_back(y);
        }
      }
      if (found < 0) continue;
      int c = found;
      while (true) {
        const int x = parent_col[c];
        const int prev = x == r ? -1 : via[x];
        row_to_col[x] = c;
        col_to_row[c] = x;
        if (prev < 0) break;
        c = prev;
      }
      row_to_col[i] = j;
      col_to_row[j] = i;
      break;
    }
    col_fixed[row_to_col[i]] = 1;
  }
  return Permutation(std::move(row_to_col));
}

IpfpResult ipfp(const QapInstance& inst, const Matrix& x0, const IpfpConfig& cfg) {
  if (cfg.max_iters < 1) throw std::invalid_argument("ipfp: max_iters must be >= 1");
  if (!(cfg.tol > 0.0)) throw std::invalid_argument("ipfp: tol must be positive");
  inst.validate();
  check_doubly_stochastic(x0, inst.n);
  const Matrix& f = inst.flow;
  const Matrix& d = inst.dist;

  IpfpResult res;
  res.cost = kInf;
  Matrix x = x0;
  for (int k = 0; k < cfg.max_iters; ++k) {
    const Matrix grad = f * x * d.transpose() + f.transpose() * x * d;
    Permutation bk = lap_argmin(grad);
    const double cost = evaluate(inst, bk);
    if (cost < res.cost) {
      res.cost = cost;
      res.perm = bk;
    }
    res.trace.push_back(res.cost);
    res.iterations = k + 1;

    const Matrix delta = bk.matrix() - x;
    const double a = frobenius_inner(f, delta * d * delta.transpose());
    const double b =
        frobenius_inner(f, delta * d * x.transpose() + x * d * delta.transpose());
    const double t = a > 0.0 ? std::min(-b / (2.0 * a), 1.0) : 1.0;
    const Matrix step = t * delta;
    x += step;
    if (step.norm() <= cfg.tol) {
      res.converged = true;
      break;
    }
  }
  return res;
}

IpfpResult ipfp(const QapInstance& inst, const Permutation& x0, const IpfpConfig& cfg) {
  if (x0.size() != inst.n) throw std::invalid_argument("ipfp: start has wrong size");
  return ipfp(inst, x0.matrix(), cfg);
}

Matrix random_doubly_stochastic(int n, Rng& rng) {
  if (n < 1) throw std::invalid_argument("random_doubly_stochastic: n must be positive");
  Matrix x(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) x(i, j) = 1.0 - rng.uniform();
  for (int it = 0; it < 100000; ++it) {
    x.array().colwise() /= x.rowwise().sum().array();
    x.array().rowwise() /= x.colwise().sum().array();
    const double err = (x.rowwise().sum().array() - 1.0).abs().maxCoeff();
    if (err <= 1e-12) break;
  }
  return x;
}

IpfpResult ipfp_restarts(const QapInstance& inst, const IpfpConfig& cfg) {
  if (cfg.restarts < 1) throw std::invalid_argument("ipfp: restarts must be >= 1");
  const Rng root(cfg.seed, Rng::tag("ipfp"));
  std::vector<IpfpResult> runs(static_cast<std::size_t>(cfg.restarts));
  parallel_for(runs.size(), cfg.workers, [&](std::size_t r) {
    Rng rng = root.split(r);
    runs[r] = ipfp(inst, random_doubly_stochastic(inst.n, rng), cfg);
  });
  std::size_t best = 0;
  for (std::size_t r = 1; r < runs.size(); ++r)
    if (runs[r].cost < runs[best].cost) best = r;
  return runs[best];
}

ArSample ar_seq_sample(const Heatmap& h, Rng& rng) {
  const int n = h.n();
  std::vector<int> free_cols(n);
  for (int j = 0; j < n; ++j) free_cols[j] = j;
  std::vector<int> images(n);
  std::vector<double> w;
  double log_prob = 0.0;
  for (int i = 0; i < n; ++i) {
    double mx = -kInf;
    for (int c : free_cols) mx = std::max(mx, h.phi(i, c));
    w.resize(free_cols.size());
    double z = 0.0;
    for (std::size_t k = 0; k < free_cols.size(); ++k) {
      w[k] = std::exp(h.phi(i, free_cols[k]) - mx);
      z += w[k];
    }
    double target = rng.uniform() * z;
    std::size_t pick = free_cols.size() - 1;
    for (std::size_t k = 0; k < free_cols.size(); ++k) {
      target -= w[k];
      if (target < 0.0) {
        pick = k;
        break;
      }
    }
    images[i] = free_cols[pick];
    log_prob += h.phi(i, images[i]) - mx - std::log(z);
    free_cols.erase(free_cols.begin() + static_cast<std::ptrdiff_t>(pick));
  }
  return {Permutation(std::move(images)), log_prob};
}

double ar_seq_log_prob(const Heatmap& h, const Permutation& perm) {
  const int n = h.n();
  if (perm.size() != n) throw std::invalid_argument("ar_seq_log_prob: size mismatch");
  double lp = 0.0;
  for (int i = 0; i < n; ++i) {
    double mx = -kInf;
    for (int k = i; k < n; ++k) mx = std::max(mx, h.phi(i, perm[k]));
    double z = 0.0;
    for (int k = i; k < n; ++k) z += std::exp(h.phi(i, perm[k]) - mx);
    lp += h.phi(i, perm[i]) - mx - std::log(z);
  }
  return lp;
}

Matrix ar_seq_log_prob_grad(const Heatmap& h, const Permutation& perm) {
  const int n = h.n();
  if (perm.size() != n) throw std::invalid_argument("ar_seq_log_prob_grad: size mismatch");
  Matrix g = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    double mx = -kInf;
    for (int k = i; k < n; ++k) mx = std::max(mx, h.phi(i, perm[k]));
    double z = 0.0;
    for (int k = i; k < n; ++k) z += std::exp(h.phi(i, perm[k]) - mx);
    for (int k = i; k < n; ++k) g(i, perm[k]) -= std::exp(h.phi(i, perm[k]) - mx) / z;
    g(i, perm[i]) += 1.0;
  }
  return g;
}

FinetuneResult ar_seq_search(const FinetuneConfig& cfg, const std::vector<QapInstance>& batch,
                             HeatmapModel& model, Optimizer& optimizer,
                             const TrainCallback& on_epoch) {
  const std::size_t per_instance =
      static_cast<std::size_t>(cfg.starts) * static_cast<std::size_t>(cfg.chains);
  if (cfg.starts < 1 || cfg.chains < 1 || per_instance < 2) {
    throw std::invalid_argument("ar_seq_search needs K >= 1, M >= 1 and K * M >= 2");
  }
  using Clock = std::chrono::steady_clock;
  const auto t0 = Clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - t0).count(); };
  const std::size_t b_count = batch.size();
  const Rng root(cfg.seed, Rng::tag("ar_seq"));

  FinetuneResult result;
  result.incumbents.resize(b_count);
  result.starts.resize(b_count);

  struct Draw {
    Permutation drawn;
    Permutation improved;
    double cost = 0.0;
  };
  std::vector<Draw> draws(b_count * per_instance);
  std::vector<std::unique_ptr<ModelTape>> tapes(b_count);

  for (int t = 1; t <= cfg.epochs; ++t) {
    parallel_for(b_count, cfg.workers, [&](std::size_t i) { tapes[i] = model.forward(batch[i]); });
    const Rng epoch_root = root.split(static_cast<std::uint64_t>(t));
    parallel_for(draws.size(), cfg.workers, [&](std::size_t u) {
      const std::size_t i = u / per_instance;
      Rng r = epoch_root.split(i).split(u % per_instance);
      Draw& d = draws[u];
      d.drawn = ar_seq_sample(tapes[i]->heatmap, r).perm;
      d.improved = local_improve(batch[i], d.drawn, cfg.resolved_local_search(batch[i].n), r);
      d.cost = evaluate(batch[i], d.improved);
    });

    TensorSet grads = model.params().zeros_like();
    double cost_sum = 0.0;
    double best_sum = 0.0;
    for (std::size_t i = 0; i < b_count; ++i) {
      const int n = batch[i].n;
      double mean = 0.0;
      for (std::size_t k = 0; k < per_instance; ++k) mean += draws[i * per_instance + k].cost;
      cost_sum += mean;
      mean /= static_cast<double>(per_instance);
      Matrix g = Matrix::Zero(n, n);
      for (std::size_t k = 0; k < per_instance; ++k) {
        const Draw& d = draws[i * per_instance + k];
        g += (d.cost - mean) * ar_seq_log_prob_grad(tapes[i]->heatmap, d.drawn);
        result.incumbents[i].offer(d.improved, d.cost);
      }
      g /= static_cast<double>(per_instance - 1) * static_cast<double>(b_count);
      model.backward(*tapes[i], g, grads);
      result.incumbents[i].trace.push_back(result.incumbents[i].cost);
      best_sum += result.incumbents[i].cost;
    }
    optimizer.step(model.params(), grads);
    result.epochs_run = t;
    if (on_epoch) {
      on_epoch(TrainRecord{t, cost_sum / static_cast<double>(draws.size()),
                           best_sum / static_cast<double>(b_count), elapsed()});
    }
    if (cfg.time_limit > 0.0 && elapsed() >= cfg.time_limit) break;
  }
  result.wall_time = elapsed();
  return result;
}

FinetuneResult gd_free(const FinetuneConfig& cfg, const QapInstance& inst, const Heatmap& phi) {
  FixedModel model(phi);
  NoOpOptimizer none;
  return finetune(cfg, {inst}, model, none);
}

}  // namespace plma
