#include "plma/objective.hpp"

#include <numeric>
#include <stdexcept>
#include <string>

namespace plma {

Permutation::Permutation(std::vector<int> images) : images_(std::move(images)) {
  const int n = size();
  std::vector<char> seen(n, 0);
  for (int v : images_) {
    if (v < 0 || v >= n) throw std::invalid_argument("permutation image out of range");
    if (seen[v]) throw std::invalid_argument("permutation repeats image " + std::to_string(v + 1));
    seen[v] = 1;
  }
}

Permutation Permutation::identity(int n) {
  std::vector<int> v(n);
  std::iota(v.begin(), v.end(), 0);
  return Permutation(std::move(v));
}

Permutation Permutation::random(int n, Rng& rng) {
  Permutation p = identity(n);
  for (int i = n - 1; i > 0; --i) {
    const int j = static_cast<int>(rng.below(static_cast<std::uint64_t>(i) + 1));
    std::swap(p.images_[i], p.images_[j]);
  }
  return p;
}

Permutation Permutation::from_one_based(std::span<const int> images) {
  std::vector<int> v(images.begin(), images.end());
  for (auto& x : v) --x;
  return Permutation(std::move(v));
}

std::vector<int> Permutation::one_based() const {
  std::vector<int> v = images_;
  for (auto& x : v) ++x;
  return v;
}

Permutation Permutation::inverse() const {
  std::vector<int> inv(images_.size());
  for (int i = 0; i < size(); ++i) inv[images_[i]] = i;
  Permutation p;
  p.images_ = std::move(inv);
  return p;
}

Matrix Permutation::matrix() const {
  Matrix x = Matrix::Zero(size(), size());
  for (int i = 0; i < size(); ++i) x(i, images_[i]) = 1.0;
  return x;
}

SwapAction::SwapAction(int a, int b) {
  if (a == b) throw std::invalid_argument("swap action needs two distinct positions");
  r = std::min(a, b);
  s = std::max(a, b);
}

SwapAction SwapAction::from_index(std::uint64_t k, int n) {
  // Row r holds n-1-r pairs (r, r+1..n-1).
  int r = 0;
  std::uint64_t row = static_cast<std::uint64_t>(n - 1);
  while (k >= row) {
    k -= row;
    --row;
    ++r;
  }
  SwapAction a;
  a.r = r;
  a.s = r + 1 + static_cast<int>(k);
  return a;
}

namespace {

void check_size(const QapInstance& inst, const Permutation& perm) {
  if (perm.size() != inst.n) {
    throw std::invalid_argument("permutation length " + std::to_string(perm.size()) +
                                " does not match instance size " + std::to_string(inst.n));
  }
}

double delta_unchecked(const QapInstance& inst, const Permutation& p, int r, int s) {
  const auto& F = inst.flow;
  const auto& D = inst.dist;
  const int pr = p[r];
  const int ps = p[s];
  double d = (F(r, r) - F(s, s)) * (D(ps, ps) - D(pr, pr)) +
             (F(r, s) - F(s, r)) * (D(ps, pr) - D(pr, ps));
  for (int k = 0; k < inst.n; ++k) {
    if (k == r || k == s) continue;
    const int pk = p[k];
    d += (F(r, k) - F(s, k)) * (D(ps, pk) - D(pr, pk)) +
         (F(k, r) - F(k, s)) * (D(pk, ps) - D(pk, pr));
  }
  return d;
}

}  // namespace

double evaluate(const QapInstance& inst, const Permutation& perm) {
  check_size(inst, perm);
  double total = 0.0;
  for (int i = 0; i < inst.n; ++i) {
    const int pi = perm[i];
    for (int j = 0; j < inst.n; ++j) total += inst.flow(i, j) * inst.dist(pi, perm[j]);
  }
  return total;
}

double swap_delta(const QapInstance& inst, const Permutation& perm, SwapAction a) {
  check_size(inst, perm);
  if (a.r == a.s) throw std::invalid_argument("swap action needs two distinct positions");
  if (a.r < 0 || a.s < 0 || a.r >= inst.n || a.s >= inst.n) {
    throw std::invalid_argument("swap action outside permutation");
  }
  return delta_unchecked(inst, perm, a.r, a.s);
}

Permutation apply_swap(const Permutation& perm, SwapAction a) {
  Permutation out = perm;
  out.swap_positions(a.r, a.s);
  return out;
}

Permutation local_improve(const QapInstance& inst, Permutation perm, const LocalSearchConfig& cfg,
                          Rng& rng, double& cost) {
  check_size(inst, perm);
  const int n = inst.n;
  if (n < 2) return perm;
  const int k = cfg.candidates > 0 ? cfg.candidates : n;
  const std::uint64_t pairs = static_cast<std::uint64_t>(n) * (n - 1) / 2;
  for (int t = 0; t < cfg.iterations; ++t) {
    SwapAction best;
    double best_delta = 0.0;
    for (int c = 0; c < k; ++c) {
      const SwapAction a = SwapAction::from_index(rng.below(pairs), n);
      const double d = delta_unchecked(inst, perm, a.r, a.s);
      // Strict comparison keeps the lowest candidate index on ties.
      if (c == 0 || d < best_delta) {
        best_delta = d;
        best = a;
      }
    }
    if (best_delta < 0.0) {
      perm.swap_positions(best.r, best.s);
      cost += best_delta;
    }
  }
  return perm;
}

Permutation local_improve(const QapInstance& inst, const Permutation& perm,
                          const LocalSearchConfig& cfg, Rng& rng) {
  double unused = 0.0;
  return local_improve(inst, perm, cfg, rng, unused);
}

}  // namespace plma
