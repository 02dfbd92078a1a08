#pragma once

// Launch/backend abstraction. A Launch is a stride-loop kernel: iteration i
// belongs to worker (i mod W) for a backend with W workers, and a launch
// completes fully (barrier) before the next one starts. Iterations of one
// launch must write disjoint storage locations, except when the launch is
// marked as a sequential chain.

#include <condition_variable>
#include <cstdint>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <unordered_set>
#include <vector>

namespace parascan {

struct Launch {
  std::size_t count = 0;
  std::function<void(std::size_t)> body;

  // Iterations with equal cost class have identical flop cost; used by the
  // PRAM simulator. Leave null for a uniform launch (single class 0).
  std::function<unsigned(std::size_t)> cost_class;
  unsigned num_classes = 1;
  // First iteration index of each class, for cost probing.
  std::function<std::size_t(unsigned)> representative;

  // Dependent iterations (a sequential loop expressed as one launch): runs
  // on a single worker and the simulator charges it to one thread.
  bool sequential_chain = false;

  // Optional destination-slot listing for write-disjointness checks.
  std::function<void(std::size_t, std::vector<std::uint64_t>&)> write_slots;
};

class Backend {
 public:
  virtual ~Backend() = default;
  virtual void run(const Launch& launch) = 0;
  virtual unsigned workers() const { return 1; }
};

class SerialBackend final : public Backend {
 public:
  void run(const Launch& launch) override {
    for (std::size_t i = 0; i < launch.count; ++i) launch.body(i);
  }
};

// Fixed-size worker pool; iteration i runs on worker (i mod W), with a full
// barrier at the end of each launch. Deterministic: the work partition does
// not depend on scheduling.
class PoolBackend final : public Backend {
 public:
  explicit PoolBackend(unsigned n_workers)
      : n_(n_workers == 0 ? 1 : n_workers) {
    for (unsigned w = 0; w < n_; ++w)
      threads_.emplace_back([this, w] { worker_loop(w); });
  }
  ~PoolBackend() override {
    {
      std::lock_guard lk(m_);
      stop_ = true;
    }
    cv_.notify_all();
    for (auto& t : threads_) t.join();
  }
  PoolBackend(const PoolBackend&) = delete;
  PoolBackend& operator=(const PoolBackend&) = delete;

  unsigned workers() const override { return n_; }

  void run(const Launch& launch) override {
    if (launch.count == 0) return;
    if (launch.sequential_chain || n_ == 1 || launch.count == 1) {
      for (std::size_t i = 0; i < launch.count; ++i) launch.body(i);
      return;
    }
    std::unique_lock lk(m_);
    current_ = &launch;
    pending_ = n_;
    ++epoch_;
    cv_.notify_all();
    done_cv_.wait(lk, [this] { return pending_ == 0; });
    current_ = nullptr;
    if (error_) {
      auto e = error_;
      error_ = nullptr;
      std::rethrow_exception(e);
    }
  }

 private:
  void worker_loop(unsigned w) {
    std::uint64_t seen = 0;
    for (;;) {
      const Launch* launch = nullptr;
      {
        std::unique_lock lk(m_);
        cv_.wait(lk, [&] { return stop_ || epoch_ != seen; });
        if (stop_) return;
        seen = epoch_;
        launch = current_;
      }
      try {
        for (std::size_t i = w; i < launch->count; i += n_) launch->body(i);
      } catch (...) {
        std::lock_guard lk(m_);
        if (!error_) error_ = std::current_exception();
      }
      {
        std::lock_guard lk(m_);
        if (--pending_ == 0) done_cv_.notify_all();
      }
    }
  }

  unsigned n_;
  std::vector<std::thread> threads_;
  std::mutex m_;
  std::condition_variable cv_, done_cv_;
  const Launch* current_ = nullptr;
  unsigned pending_ = 0;
  std::uint64_t epoch_ = 0;
  bool stop_ = false;
  std::exception_ptr error_ = nullptr;
};

// Test backend: executes serially and verifies that distinct iterations of a
// launch write disjoint slots (when the launch declares them).
class WriteSetRecorderBackend final : public Backend {
 public:
  void run(const Launch& launch) override {
    if (launch.write_slots && !launch.sequential_chain) {
      std::unordered_set<std::uint64_t> seen;
      std::vector<std::uint64_t> slots;
      for (std::size_t i = 0; i < launch.count; ++i) {
        slots.clear();
        launch.write_slots(i, slots);
        for (auto s : slots) {
          if (!seen.insert(s).second)
            throw std::logic_error("overlapping writes within one launch");
        }
      }
    }
    for (std::size_t i = 0; i < launch.count; ++i) launch.body(i);
  }
};

}  // namespace parascan
