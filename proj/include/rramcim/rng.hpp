#pragma once

// Seed-stream derivation and a block-parallel Monte Carlo driver.
//
// Every Monte Carlo loop is cut into fixed-size blocks. Block b draws from a
// generator seeded by (master_seed, domain, b) only, and partial results are
// reduced in block order, so the outcome is bit-identical for any --jobs.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <random>
#include <thread>
#include <vector>

namespace rramcim {

using Rng = std::mt19937_64;

// Domain tags keep streams of different experiments disjoint.
enum class StreamDomain : std::uint32_t {
  Generic = 0,
  Deploy = 1,
  Readout = 2,
  Ber = 3,
  Margin = 4,
  RRatio = 5,
  Protocol = 6,
  Instance = 7,
  Calibration = 8,
};

inline Rng make_stream(std::uint64_t master_seed, StreamDomain domain, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(domain), static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  return Rng(seq);
}

inline constexpr std::uint64_t kDefaultBlockSize = 8192;

inline unsigned resolve_jobs(unsigned jobs) {
  if (jobs > 0) return jobs;
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs fn(block_index, begin, end) over [0, items) in blocks and returns the
/// per-block results in block order. fn must be safe to call concurrently.
template <class Partial, class Fn>
std::vector<Partial> run_blocks(std::uint64_t items, std::uint64_t block_size, unsigned jobs, Fn&& fn) {
  block_size = std::max<std::uint64_t>(block_size, 1);
  const std::uint64_t blocks = (items + block_size - 1) / block_size;
  std::vector<Partial> partials(blocks);
  if (blocks == 0) return partials;

  std::atomic<std::uint64_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (;;) {
      const std::uint64_t b = next.fetch_add(1);
      if (b >= blocks) return;
      const std::uint64_t begin = b * block_size;
      const std::uint64_t end = std::min(items, begin + block_size);
      try {
        partials[b] = fn(b, begin, end);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(blocks);
      }
    }
  };

  const unsigned threads = static_cast<unsigned>(std::min<std::uint64_t>(resolve_jobs(jobs), blocks));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return partials;
}

} // namespace rramcim
