#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace qrc {

/// Persistent pool of worker threads for data-parallel loops.
///
/// Work items are static contiguous index ranges, so any partition performs
/// the same per-element arithmetic as a serial run and results are
/// bit-identical for every worker count. Workers spin briefly before blocking
/// so the pool can be invoked inside an integrator substep without the wakeup
/// latency dominating.
class WorkerPool {
 public:
  explicit WorkerPool(int threads = 0) {
    int hw = static_cast<int>(std::thread::hardware_concurrency());
    if (hw <= 0) hw = 1;
    n_threads_ = threads > 0 ? threads : hw;
    for (int t = 1; t < n_threads_; ++t) {
      workers_.emplace_back([this, t] { worker_loop(t); });
    }
  }

  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  ~WorkerPool() {
    stop_.store(true, std::memory_order_release);
    bump_epoch();
    for (auto& w : workers_) w.join();
  }

  int size() const { return n_threads_; }

  /// Runs fn(begin, end) over [0, n) split into one contiguous chunk per
  /// thread. Blocks until all chunks finish. Safe to call with n == 0.
  void parallel_for(std::int64_t n,
                    const std::function<void(std::int64_t, std::int64_t)>& fn) {
    if (n <= 0) return;
    if (n_threads_ == 1 || n == 1) {
      fn(0, n);
      return;
    }
    task_ = &fn;
    total_ = n;
    pending_.store(n_threads_ - 1, std::memory_order_release);
    bump_epoch();
    run_chunk(0);
    while (pending_.load(std::memory_order_acquire) != 0) {
      // Chunks are balanced; the imbalance window is short.
    }
    task_ = nullptr;
  }

 private:
  void bump_epoch() {
    {
      std::lock_guard<std::mutex> lk(mutex_);
      epoch_.fetch_add(1, std::memory_order_release);
    }
    cv_.notify_all();
  }

  void run_chunk(int idx) {
    std::int64_t chunk = (total_ + n_threads_ - 1) / n_threads_;
    std::int64_t begin = idx * chunk;
    std::int64_t end = std::min<std::int64_t>(total_, begin + chunk);
    if (begin < end) (*task_)(begin, end);
  }

  void worker_loop(int idx) {
    std::uint64_t seen = 0;
    while (true) {
      // Spin briefly for the next epoch, then block on the condition variable.
      int spins = 0;
      while (epoch_.load(std::memory_order_acquire) == seen) {
        if (++spins > 20000) {
          std::unique_lock<std::mutex> lk(mutex_);
          cv_.wait(lk, [&] {
            return epoch_.load(std::memory_order_acquire) != seen;
          });
          break;
        }
      }
      seen = epoch_.load(std::memory_order_acquire);
      if (stop_.load(std::memory_order_acquire)) return;
      run_chunk(idx);
      pending_.fetch_sub(1, std::memory_order_acq_rel);
    }
  }

  int n_threads_ = 1;
  std::vector<std::thread> workers_;
  std::mutex mutex_;
  std::condition_variable cv_;
  std::atomic<std::uint64_t> epoch_{0};
  std::atomic<bool> stop_{false};
  const std::function<void(std::int64_t, std::int64_t)>* task_ = nullptr;
  std::int64_t total_ = 0;
  std::atomic<int> pending_{0};
};

}  // namespace qrc
