#include "lambda_asg/parallel.hpp"

namespace lambda_asg {

namespace {
std::atomic<int> g_threads{1};
}

int default_threads() noexcept { return g_threads.load(std::memory_order_relaxed); }

void set_default_threads(int threads) noexcept {
  if (threads <= 0) {
    threads = static_cast<int>(std::thread::hardware_concurrency());
    if (threads <= 0) threads = 1;
  }
  g_threads.store(threads, std::memory_order_relaxed);
}

}  // namespace lambda_asg
