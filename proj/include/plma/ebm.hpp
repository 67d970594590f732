#pragma once

#include <vector>

#include "plma/objective.hpp"

namespace plma {

// Log-domain score table. p(perm) is proportional to exp(sum_i phi(i, perm(i))).
struct Heatmap {
  Matrix phi;

  Heatmap() = default;
  explicit Heatmap(Matrix m);
  int n() const { return static_cast<int>(phi.rows()); }
};

struct ChainState {
  Permutation perm;
  double score = 0.0;  // cached sum_i phi(i, perm(i))

  ChainState() = default;
  ChainState(const Heatmap& h, Permutation p);
};

struct SamplerConfig {
  double score_scale = 1.0;  // multiplies every log-ratio; 1 is the plain model
  int workers = 0;           // <= 0: default_workers()
};

double score(const Heatmap& h, const Permutation& perm);

// One Metropolis-Hastings step with a uniform 2-swap proposal. Always consumes
// exactly two draws: the pair index, then the acceptance uniform.
// Returns true when the proposal was accepted.
bool mh_step(const Heatmap& h, ChainState& state, Rng& rng, double score_scale = 1.0);

// Runs `steps` MH steps in place and re-derives the cached score at the end.
void run_chain(const Heatmap& h, ChainState& state, int steps, Rng& rng,
               double score_scale = 1.0);

// One chain per start; chain c draws from rng.split(c).
std::vector<Permutation> run_chains(const Heatmap& h, const std::vector<Permutation>& starts,
                                    int steps, const Rng& rng, const SamplerConfig& cfg = {});

// K chains of `steps` from uniform random starts; chain k draws from rng.split(k).
std::vector<Permutation> sample_initial(const Heatmap& h, int count, int steps, const Rng& rng,
                                        const SamplerConfig& cfg = {});

struct ExactDistribution {
  std::vector<Permutation> perms;  // lexicographic order
  std::vector<double> prob;

  double at(const Permutation& p) const;
  std::size_t index_of(const Permutation& p) const;
};

// Enumerates the normalised Gibbs distribution. Rejects n > 8.
ExactDistribution exact_distribution(const Heatmap& h);

// Lexicographic rank of p among all permutations of its size.
std::size_t permutation_rank(const Permutation& p);

}  // namespace plma
