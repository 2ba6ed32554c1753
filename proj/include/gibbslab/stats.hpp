#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <span>
#include <stdexcept>
#include <thread>
#include <vector>

#include "gibbslab/rng.hpp"

namespace gibbslab {

// Point estimate with a standard error from per-trial sample variance.
struct McEstimate {
  double estimate = 0.0;
  double std_err = 0.0;
  std::int64_t count = 0;
};

inline double combined_std_err(double a, double b) { return std::hypot(a, b); }

class MeanAccumulator {
 public:
  void add(double x) {
    sum_ += x;
    sum_sq_ += x * x;
    ++count_;
  }

  void merge(const MeanAccumulator& other) {
    sum_ += other.sum_;
    sum_sq_ += other.sum_sq_;
    count_ += other.count_;
  }

  McEstimate finish() const {
    if (count_ < 2) throw std::invalid_argument("need at least 2 samples");
    double mean = sum_ / static_cast<double>(count_);
    double var =
        (sum_sq_ - static_cast<double>(count_) * mean * mean) /
        static_cast<double>(count_ - 1);
    if (var < 0.0) var = 0.0;
    return {mean, std::sqrt(var / static_cast<double>(count_)), count_};
  }

 private:
  double sum_ = 0.0;
  double sum_sq_ = 0.0;
  std::int64_t count_ = 0;
};

// Worker cap: SSL_GIBBS_THREADS, else hardware concurrency.
inline int worker_count() {
  if (const char* env = std::getenv("SSL_GIBBS_THREADS")) {
    int v = std::atoi(env);
    if (v >= 1) return v;
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

// Runs `fn(block_index, begin, end)` over [0, count) split into fixed-size
// blocks. Blocks are claimed by a small pool but the caller merges per-block
// results in index order, so the outcome is bit-identical for any worker
// count. The block size is a constant, never derived from the thread count.
inline constexpr std::int64_t kMcBlockSize = 8192;

template <class Fn>
void for_each_block(std::int64_t count, Fn&& fn) {
  if (count <= 0) return;
  std::int64_t num_blocks = (count + kMcBlockSize - 1) / kMcBlockSize;
  int workers = static_cast<int>(
      std::min<std::int64_t>(worker_count(), num_blocks));
  if (workers <= 1) {
    for (std::int64_t b = 0; b < num_blocks; ++b)
      fn(b, b * kMcBlockSize, std::min(count, (b + 1) * kMcBlockSize));
    return;
  }
  std::atomic<std::int64_t> next{0};
  auto body = [&] {
    for (;;) {
      std::int64_t b = next.fetch_add(1);
      if (b >= num_blocks) break;
      fn(b, b * kMcBlockSize, std::min(count, (b + 1) * kMcBlockSize));
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (int i = 1; i < workers; ++i) pool.emplace_back(body);
  body();
  for (auto& t : pool) t.join();
}

// Mean and std-err of a per-trial contribution. Trial t draws from
// base.substream(t); per-block partial sums are merged in block order.
template <class PerTrial>
McEstimate mc_mean(std::int64_t trials, const RngStream& base,
                   PerTrial&& per_trial) {
  if (trials < 2) throw std::invalid_argument("mc_mean: trials must be >= 2");
  std::int64_t num_blocks = (trials + kMcBlockSize - 1) / kMcBlockSize;
  std::vector<MeanAccumulator> partial(num_blocks);
  for_each_block(trials, [&](std::int64_t b, std::int64_t begin,
                             std::int64_t end) {
    MeanAccumulator acc;
    for (std::int64_t t = begin; t < end; ++t) {
      RngStream rs = base.substream(static_cast<std::uint64_t>(t));
      acc.add(per_trial(t, rs));
    }
    partial[b] = acc;
  });
  MeanAccumulator total;
  for (const auto& acc : partial) total.merge(acc);
  return total.finish();
}

// Batch-means standard error of the mean of a correlated series.
inline double batch_means_std_err(std::span<const double> series,
                                  int num_batches = 30) {
  if (num_batches < 2) throw std::invalid_argument("need >= 2 batches");
  std::int64_t len = static_cast<std::int64_t>(series.size());
  std::int64_t batch = len / num_batches;
  if (batch < 1) throw std::invalid_argument("series too short for batching");
  double grand = 0.0;
  std::vector<double> means(num_batches, 0.0);
  for (int b = 0; b < num_batches; ++b) {
    double s = 0.0;
    for (std::int64_t i = b * batch; i < (b + 1) * batch; ++i) s += series[i];
    means[b] = s / static_cast<double>(batch);
    grand += means[b];
  }
  grand /= num_batches;
  double var = 0.0;
  for (double m : means) var += (m - grand) * (m - grand);
  var /= (num_batches - 1);
  return std::sqrt(var / num_batches);
}

}  // namespace gibbslab
