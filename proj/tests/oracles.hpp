#pragma once

// Independent reference implementations used as test oracles. They share no
// code with the library beyond the plain data types.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "plma/instances.hpp"

namespace oracle {

using plma::Matrix;

inline double qap_cost(const Matrix& f, const Matrix& d, const std::vector<int>& p) {
  double c = 0.0;
  const int n = static_cast<int>(p.size());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) c += f(i, j) * d(p[i], p[j]);
  return c;
}

// Calls fn(perm) for every permutation of 0..n-1 in lexicographic order.
template <class Fn>
void for_each_perm(int n, Fn&& fn) {
  std::vector<int> p(n);
  std::iota(p.begin(), p.end(), 0);
  do {
    fn(p);
  } while (std::next_permutation(p.begin(), p.end()));
}

struct QapOptimum {
  double cost = std::numeric_limits<double>::infinity();
  std::vector<int> perm;
};

inline QapOptimum brute_force_qap(const Matrix& f, const Matrix& d) {
  QapOptimum best;
  for_each_perm(static_cast<int>(f.rows()), [&](const std::vector<int>& p) {
    const double c = qap_cost(f, d, p);
    if (c < best.cost) {
      best.cost = c;
      best.perm = p;
    }
  });
  return best;
}

// Lexicographically first minimiser of sum_i c(i, p(i)).
inline std::vector<int> brute_force_lap(const Matrix& c, double* value = nullptr) {
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> arg;
  for_each_perm(static_cast<int>(c.rows()), [&](const std::vector<int>& p) {
    double v = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) v += c(static_cast<int>(i), p[i]);
    if (v < best) {
      best = v;
      arg = p;
    }
  });
  if (value) *value = best;
  return arg;
}

// Normalised Gibbs weights exp(sum_i phi(i, p(i))) in lexicographic order.
inline std::vector<double> gibbs(const Matrix& phi) {
  std::vector<double> logw;
  for_each_perm(static_cast<int>(phi.rows()), [&](const std::vector<int>& p) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) s += phi(static_cast<int>(i), p[i]);
    logw.push_back(s);
  });
  const double mx = *std::max_element(logw.begin(), logw.end());
  double z = 0.0;
  for (double& w : logw) z += (w = std::exp(w - mx));
  for (double& w : logw) w /= z;
  return logw;
}

inline int lex_rank(const std::vector<int>& p) {
  int rank = 0;
  int idx = 0;
  for_each_perm(static_cast<int>(p.size()), [&](const std::vector<int>& q) {
    if (q == p) rank = idx;
    ++idx;
  });
  return rank;
}

inline int bandwidth(const std::vector<std::pair<int, int>>& edges, const std::vector<int>& p) {
  int bw = 0;
  for (auto [u, v] : edges) bw = std::max(bw, std::abs(p[u] - p[v]));
  return bw;
}

}  // namespace oracle
