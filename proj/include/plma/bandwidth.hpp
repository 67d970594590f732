#pragma once

#include <vector>

#include "plma/training.hpp"

namespace plma {

// (B_m)_ij = max(|i - j| - m, 0). Requires 0 <= m <= n - 1.
Matrix toeplitz_b(int n, int m);

// Largest |perm(u) - perm(v)| over the edges; 0 for an edgeless graph.
int bandwidth(const BmGraph& g, const Permutation& perm);

// Standard graphs on vertices 0..n-1.
BmGraph path_graph(int n);
BmGraph cycle_graph(int n);
BmGraph complete_graph(int n);
BmGraph star_graph(int leaves);  // centre 0
// Erdos-Renyi G(n, p).
BmGraph random_graph(int n, double p, std::uint64_t seed);
// Vertex v of `g` becomes vertex perm(v).
BmGraph relabel(const BmGraph& g, const Permutation& perm);

// Reverse Cuthill-McKee labelling: perm(v) is the position of vertex v.
Permutation rcm(const BmGraph& g);

// QAP instance with flow = adjacency and dist = B_m, so that
// evaluate(bandwidth_qap(g, m), perm) == h_value(g, m, perm).
QapInstance bandwidth_qap(const BmGraph& g, int m);

// <B_m, X A X^T>; zero exactly when bandwidth(g, perm) <= m.
double h_value(const BmGraph& g, int m, const Permutation& perm);

struct BisectionState {
  int lower = 0;
  int upper = 0;
  Permutation witness;
};

struct BiPlmaConfig {
  FinetuneConfig solver = default_solver();
  double clip = 10.0;
  int sinkhorn_iters = 1;

  // Finetuning defaults with 50 epochs per level and an early stop at h = 0.
  static FinetuneConfig default_solver() {
    FinetuneConfig c;
    c.epochs = 50;
    c.stop_at_target = true;
    return c;
  }
};

struct BisectionLevel {
  int m = 0;
  double h_best = 0.0;
  bool feasible = false;
  int epochs = 0;
  double seconds = 0.0;
};

struct BiPlmaResult {
  int upper = 0;  // certified by `witness`
  int lower = 0;  // heuristic: only as good as the inner solver
  int rcm_bound = 0;
  Permutation witness;
  std::vector<BisectionLevel> levels;
};

// Bisection over m between 0 and the rCM bound. Each level approximately
// solves the (A, B_m) QAP with a directly parameterised heatmap; theta and the
// retained start points carry over between levels.
BiPlmaResult bi_plma(const BmGraph& g, const BiPlmaConfig& cfg = {});

}  // namespace plma
