#include "rqwalk/parallel.hpp"

#include "rqwalk/errors.hpp"

namespace rqwalk {

namespace {
std::atomic<int> g_threads{1};
}

void set_worker_threads(int n) {
  if (n < 1) throw ConfigError("worker thread count must be >= 1");
  g_threads.store(n);
}

int worker_threads() { return g_threads.load(); }

}  // namespace rqwalk
