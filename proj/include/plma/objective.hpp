#pragma once

#include <span>
#include <vector>

#include "plma/instances.hpp"
#include "plma/rng.hpp"

namespace plma {

// Bijection on {0..n-1}; image(i) is the location assigned to facility i.
// Text formats use 1-based images; see from_one_based / one_based.
class Permutation {
 public:
  Permutation() = default;
  // Throws std::invalid_argument unless `images` is a bijection on 0..n-1.
  explicit Permutation(std::vector<int> images);

  static Permutation identity(int n);
  static Permutation random(int n, Rng& rng);
  static Permutation from_one_based(std::span<const int> images);

  int size() const { return static_cast<int>(images_.size()); }
  int operator[](int i) const { return images_[i]; }
  const std::vector<int>& images() const { return images_; }
  std::vector<int> one_based() const;
  Permutation inverse() const;

  // In-place transposition of the images at positions r and s.
  void swap_positions(int r, int s) { std::swap(images_[r], images_[s]); }

  // Dense X with X(i, perm(i)) = 1.
  Matrix matrix() const;

  friend bool operator==(const Permutation&, const Permutation&) = default;
  friend auto operator<=>(const Permutation&, const Permutation&) = default;

 private:
  std::vector<int> images_;
};

// Unordered pair of positions, canonicalised to r < s.
struct SwapAction {
  int r = 0;
  int s = 1;

  SwapAction() = default;
  SwapAction(int a, int b);

  // Maps k in [0, n(n-1)/2) onto the k-th pair in row-major upper-triangle order.
  static SwapAction from_index(std::uint64_t k, int n);
  static SwapAction random(int n, Rng& rng) {
    return from_index(rng.below(static_cast<std::uint64_t>(n) * (n - 1) / 2), n);
  }
};

struct LocalSearchConfig {
  int iterations = 1;       // rounds
  int candidates = 0;       // swaps sampled per round; 0 means n
};

double evaluate(const QapInstance& inst, const Permutation& perm);
double swap_delta(const QapInstance& inst, const Permutation& perm, SwapAction a);
Permutation apply_swap(const Permutation& perm, SwapAction a);

// Batched best-of-K 2-swap descent. Consumes exactly iterations * K draws.
Permutation local_improve(const QapInstance& inst, const Permutation& perm,
                          const LocalSearchConfig& cfg, Rng& rng);

// Same as above but keeps the running cost, avoiding a fresh evaluation.
Permutation local_improve(const QapInstance& inst, Permutation perm, const LocalSearchConfig& cfg,
                          Rng& rng, double& cost);

}  // namespace plma
