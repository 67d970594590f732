#include "plma/ebm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "plma/parallel.hpp"

namespace plma {

Heatmap::Heatmap(Matrix m) : phi(std::move(m)) {
  if (phi.rows() != phi.cols() || phi.rows() == 0) {
    throw std::invalid_argument("heatmap must be a nonempty square matrix");
  }
  if (!phi.allFinite()) throw std::invalid_argument("heatmap has non-finite entries");
}

ChainState::ChainState(const Heatmap& h, Permutation p)
    : perm(std::move(p)), score(plma::score(h, perm)) {}

double score(const Heatmap& h, const Permutation& perm) {
  if (perm.size() != h.n()) throw std::invalid_argument("heatmap/permutation size mismatch");
  double s = 0.0;
  for (int i = 0; i < perm.size(); ++i) s += h.phi(i, perm[i]);
  return s;
}

bool mh_step(const Heatmap& h, ChainState& state, Rng& rng, double score_scale) {
  const int n = h.n();
  if (n < 2) {
    rng();
    rng();
    return false;
  }
  const SwapAction a = SwapAction::random(n, rng);
  const double u = rng.uniform();
  const int pa = state.perm[a.r];
  const int pb = state.perm[a.s];
  const auto& phi = h.phi;
  const double diff = phi(a.r, pb) + phi(a.s, pa) - phi(a.r, pa) - phi(a.s, pb);
  // log u < log-ratio accepts with probability min(1, exp(log-ratio)); u = 0 gives -inf.
  if (std::log(u) < score_scale * diff) {
    state.perm.swap_positions(a.r, a.s);
    state.score += diff;
    return true;
  }
  return false;
}

void run_chain(const Heatmap& h, ChainState& state, int steps, Rng& rng, double score_scale) {
  constexpr int kRefresh = 1 << 16;
  for (int t = 0; t < steps; ++t) {
    mh_step(h, state, rng, score_scale);
    if ((t + 1) % kRefresh == 0) state.score = score(h, state.perm);
  }
  state.score = score(h, state.perm);
}

std::vector<Permutation> run_chains(const Heatmap& h, const std::vector<Permutation>& starts,
                                    int steps, const Rng& rng, const SamplerConfig& cfg) {
  if (steps < 0) throw std::invalid_argument("chain length must be nonnegative");
  std::vector<Permutation> out(starts.size());
  parallel_for(starts.size(), cfg.workers, [&](std::size_t c) {
    Rng r = rng.split(c);
    ChainState st(h, starts[c]);
    run_chain(h, st, steps, r, cfg.score_scale);
    out[c] = std::move(st.perm);
  });
  return out;
}

std::vector<Permutation> sample_initial(const Heatmap& h, int count, int steps, const Rng& rng,
                                        const SamplerConfig& cfg) {
  if (count < 1) throw std::invalid_argument("sample_initial needs at least one chain");
  std::vector<Permutation> out(count);
  parallel_for(static_cast<std::size_t>(count), cfg.workers, [&](std::size_t k) {
    Rng r = rng.split(k);
    ChainState st(h, Permutation::random(h.n(), r));
    run_chain(h, st, steps, r, cfg.score_scale);
    out[k] = std::move(st.perm);
  });
  return out;
}

std::size_t permutation_rank(const Permutation& p) {
  const int n = p.size();
  std::size_t rank = 0;
  std::vector<char> used(n, 0);
  std::size_t fact = 1;
  for (int i = 2; i < n; ++i) fact *= i;
  for (int i = 0; i < n; ++i) {
    int smaller = 0;
    for (int v = 0; v < p[i]; ++v)
      if (!used[v]) ++smaller;
    rank += smaller * fact;
    used[p[i]] = 1;
    if (n - 1 - i > 0) fact /= (n - 1 - i);
  }
  return rank;
}

std::size_t ExactDistribution::index_of(const Permutation& p) const { return permutation_rank(p); }

double ExactDistribution::at(const Permutation& p) const { return prob.at(index_of(p)); }

ExactDistribution exact_distribution(const Heatmap& h) {
  const int n = h.n();
  if (n > 8) throw std::invalid_argument("exact_distribution enumerates at most n = 8");
  ExactDistribution out;
  std::vector<int> img(n);
  std::iota(img.begin(), img.end(), 0);
  std::vector<double> scores;
  do {
    out.perms.emplace_back(img);
    scores.push_back(score(h, out.perms.back()));
  } while (std::next_permutation(img.begin(), img.end()));

  const double top = *std::max_element(scores.begin(), scores.end());
  out.prob.resize(scores.size());
  double z = 0.0;
  for (std::size_t k = 0; k < scores.size(); ++k) {
    out.prob[k] = std::exp(scores[k] - top);
    z += out.prob[k];
  }
  for (auto& p : out.prob) p /= z;
  return out;
}

}  // namespace plma
