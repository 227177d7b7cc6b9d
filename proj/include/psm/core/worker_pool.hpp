#pragma once

#include <algorithm>
#include <condition_variable>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace psm {

/// Fixed-size pool that executes one range-partitioned job at a time.
///
/// `parallel_for(n, fn)` splits [0, n) into `size()` contiguous chunks and
/// calls `fn(begin, end)` once per chunk; the calling thread takes chunk 0.
/// The call returns after every chunk has finished (a barrier). Exceptions
/// thrown by a chunk are rethrown on the calling thread.
class WorkerPool {
 public:
  explicit WorkerPool(std::size_t workers = 1) : size_(std::max<std::size_t>(1, workers)) {
    for (std::size_t w = 1; w < size_; ++w) threads_.emplace_back([this, w] { run(w); });
  }

  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  ~WorkerPool() {
    {
      std::lock_guard lock(mutex_);
      stop_ = true;
      ++generation_;
    }
    wake_.notify_all();
    for (auto& t : threads_) t.join();
  }

  [[nodiscard]] std::size_t size() const noexcept { return size_; }

  /// Half-open chunk owned by worker `w` out of `parts` over [0, n).
  static std::pair<std::size_t, std::size_t> chunk(std::size_t n, std::size_t parts, std::size_t w) noexcept {
    const std::size_t base = n / parts, rem = n % parts;
    const std::size_t begin = w * base + std::min(w, rem);
    return {begin, begin + base + (w < rem ? 1 : 0)};
  }

  void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn) {
    if (size_ == 1 || n < 2) {
      if (n > 0) fn(0, n);
      return;
    }
    {
      std::lock_guard lock(mutex_);
      job_ = &fn;
      job_n_ = n;
      pending_ = size_ - 1;
      error_ = nullptr;
      ++generation_;
    }
    wake_.notify_all();
    std::exception_ptr local;
    try {
      const auto [b, e] = chunk(n, size_, 0);
      if (b < e) fn(b, e);
    } catch (...) {
      local = std::current_exception();
    }
    std::unique_lock lock(mutex_);
    done_.wait(lock, [this] { return pending_ == 0; });
    job_ = nullptr;
    if (local) std::rethrow_exception(local);
    if (error_) std::rethrow_exception(error_);
  }

 private:
  void run(std::size_t w) {
    std::size_t seen = 0;
    for (;;) {
      const std::function<void(std::size_t, std::size_t)>* job = nullptr;
      std::size_t n = 0;
      {
        std::unique_lock lock(mutex_);
        wake_.wait(lock, [&] { return generation_ != seen; });
        seen = generation_;
        if (stop_) return;
        job = job_;
        n = job_n_;
      }
      std::exception_ptr err;
      try {
        const auto [b, e] = chunk(n, size_, w);
        if (b < e) (*job)(b, e);
      } catch (...) {
        err = std::current_exception();
      }
      {
        std::lock_guard lock(mutex_);
        if (err && !error_) error_ = err;
        if (--pending_ == 0) done_.notify_one();
      }
    }
  }

  std::size_t size_;
  std::vector<std::thread> threads_;
  std::mutex mutex_;
  std::condition_variable wake_, done_;
  const std::function<void(std::size_t, std::size_t)>* job_ = nullptr;
  std::size_t job_n_ = 0;
  std::size_t pending_ = 0;
  std::size_t generation_ = 0;
  std::exception_ptr error_;
  bool stop_ = false;
};

}  // namespace psm
