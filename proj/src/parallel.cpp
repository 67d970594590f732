#include "plma/parallel.hpp"

#include <atomic>

namespace plma {

namespace {
std::atomic<int> g_workers{0};
}

int default_workers() {
  const int w = g_workers.load();
  if (w > 0) return w;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void set_default_workers(int workers) { g_workers.store(workers > 0 ? workers : 0); }

}  // namespace plma
