#include "plma/bandwidth.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <stdexcept>
#include <string>

namespace plma {

Matrix toeplitz_b(int n, int m) {
  if (n < 1) throw std::invalid_argument("toeplitz_b: n must be positive");
  if (m < 0 || m > n - 1) throw std::invalid_argument("toeplitz_b: m out of range");
  Matrix b(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) b(i, j) = std::max(std::abs(i - j) - m, 0);
  return b;
}

BmGraph path_graph(int n) {
  std::vector<std::pair<int, int>> e;
  for (int v = 0; v + 1 < n; ++v) e.emplace_back(v, v + 1);
  return BmGraph(n, std::move(e), "P" + std::to_string(n));
}

BmGraph cycle_graph(int n) {
  if (n < 3) throw std::invalid_argument("cycle_graph: need n >= 3");
  BmGraph p = path_graph(n);
  auto e = p.edges;
  e.emplace_back(0, n - 1);
  return BmGraph(n, std::move(e), "C" + std::to_string(n));
}

BmGraph complete_graph(int n) {
  std::vector<std::pair<int, int>> e;
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v) e.emplace_back(u, v);
  return BmGraph(n, std::move(e), "K" + std::to_string(n));
}

BmGraph star_graph(int leaves) {
  std::vector<std::pair<int, int>> e;
  for (int v = 1; v <= leaves; ++v) e.emplace_back(0, v);
  return BmGraph(leaves + 1, std::move(e), "K1_" + std::to_string(leaves));
}

BmGraph random_graph(int n, double p, std::uint64_t seed) {
  Rng rng(seed, Rng::tag("graph/random"));
  std::vector<std::pair<int, int>> e;
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v)
      if (rng.uniform() < p) e.emplace_back(u, v);
  return BmGraph(n, std::move(e), "G" + std::to_string(n) + "_" + std::to_string(seed));
}

BmGraph relabel(const BmGraph& g, const Permutation& perm) {
  if (perm.size() != g.n) throw std::invalid_argument("relabel: size mismatch");
  std::vector<std::pair<int, int>> e;
  e.reserve(g.edges.size());
  for (const auto& [u, v] : g.edges) e.emplace_back(perm[u], perm[v]);
  return BmGraph(g.n, std::move(e), g.name);
}

int bandwidth(const BmGraph& g, const Permutation& perm) {
  if (perm.size() != g.n) throw std::invalid_argument("bandwidth: size mismatch");
  int bw = 0;
  for (const auto& [u, v] : g.edges) bw = std::max(bw, std::abs(perm[u] - perm[v]));
  return bw;
}

Permutation rcm(const BmGraph& g) {
  if (g.n < 1) throw std::invalid_argument("rcm: empty graph");
  const auto adj = g.neighbors();
  std::vector<int> degree(g.n);
  for (int v = 0; v < g.n; ++v) degree[v] = static_cast<int>(adj[v].size());
  auto by_degree = [&](int a, int b) {
    return degree[a] != degree[b] ? degree[a] < degree[b] : a < b;
  };

  std::vector<int> vertices(g.n);
  std::iota(vertices.begin(), vertices.end(), 0);
  std::stable_sort(vertices.begin(), vertices.end(), by_degree);

  std::vector<int> order;
  order.reserve(g.n);
  std::vector<char> seen(g.n, 0);
  for (int root : vertices) {
    if (seen[root]) continue;
    seen[root] = 1;
    std::size_t head = order.size();
    order.push_back(root);
    while (head < order.size()) {
      const int u = order[head++];
      std::vector<int> next;
      for (int w : adj[u])
        if (!seen[w]) {
          seen[w] = 1;
          next.push_back(w);
        }
      std::sort(next.begin(), next.end(), by_degree);
      order.insert(order.end(), next.begin(), next.end());
    }
  }

  std::vector<int> images(g.n);
  for (int pos = 0; pos < g.n; ++pos) images[order[pos]] = g.n - 1 - pos;
  return Permutation(std::move(images));
}

QapInstance bandwidth_qap(const BmGraph& g, int m) {
  QapInstance inst(g.adjacency(), toeplitz_b(g.n, m), g.name);
  inst.best_known = 0.0;
  return inst;
}

double h_value(const BmGraph& g, int m, const Permutation& perm) {
  if (perm.size() != g.n) throw std::invalid_argument("h_value: size mismatch");
  if (m < 0 || m > std::max(g.n - 1, 0)) throw std::invalid_argument("h_value: m out of range");
  double h = 0.0;
  for (const auto& [u, v] : g.edges) h += 2.0 * std::max(std::abs(perm[u] - perm[v]) - m, 0);
  return h;
}

BiPlmaResult bi_plma(const BmGraph& g, const BiPlmaConfig& cfg) {
  if (g.n < 2) throw std::invalid_argument("bi_plma: need at least two vertices");
  BiPlmaResult out;
  BisectionState state{0, 0, rcm(g)};
  state.upper = bandwidth(g, state.witness);
  out.rcm_bound = state.upper;
  if (g.edges.empty()) {
    out.witness = state.witness;
    return out;
  }

  DirectModel model(g.n, cfg.clip, cfg.sinkhorn_iters);
  std::vector<std::vector<Permutation>> starts;
  int level = 0;
  while (state.upper - state.lower > 1) {
    const int m = (state.lower + state.upper + 1) / 2;
    const std::vector<QapInstance> batch{bandwidth_qap(g, m)};
    FinetuneConfig solver = cfg.solver;
    solver.seed = Rng::derive(cfg.solver.seed, static_cast<std::uint64_t>(level++));
    solver.targets = {0.0};

    const auto t0 = std::chrono::steady_clock::now();
    AdamOptimizer adam(model.params(), solver.learning_rate);
    FinetuneResult r =
        finetune(solver, batch, model, adam, starts.empty() ? nullptr : &starts);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    starts = r.starts;

    BisectionLevel rec{m, 0.0, false, r.epochs_run, seconds};
    const Incumbent& inc = r.incumbents[0];
    rec.h_best = inc.has_value() ? inc.cost : std::numeric_limits<double>::infinity();
    if (inc.has_value() && std::llround(inc.cost) == 0) {
      rec.feasible = true;
      state.witness = *inc.best;
      state.upper = bandwidth(g, state.witness);
      state.lower = std::min(state.lower, state.upper - 1);
    } else {
      state.lower = m;
    }
    out.levels.push_back(rec);
  }
  out.upper = state.upper;
  out.lower = state.lower;
  out.witness = state.witness;
  return out;
}

}  // namespace plma
