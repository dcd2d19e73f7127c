#pragma once

#include <cstddef>
#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

namespace eiprobe {

// Worker count: an explicit request wins, then EI_PROBE_THREADS (0 = auto),
// then the hardware concurrency.
std::size_t resolve_workers(std::size_t requested);

// Splits [begin, end) into `workers` contiguous shards and runs
// work(state, shard_begin, shard_end) for each on its own thread, with one
// state per shard built by make(). Returns the states in shard order.
//
// Callers merge the states; because shards are fixed contiguous ranges of a
// counter-based stream, results depend only on the index range.
template <typename Make, typename Work>
auto run_sharded(std::uint64_t begin, std::uint64_t end, std::size_t workers, Make make, Work work)
    -> std::vector<decltype(make())> {
  using State = decltype(make());
  const std::uint64_t n = end > begin ? end - begin : 0;
  if (workers == 0) {
    workers = 1;
  }
  if (static_cast<std::uint64_t>(workers) > n) {
    workers = n == 0 ? 1 : static_cast<std::size_t>(n);
  }
  std::vector<State> states;
  states.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    states.push_back(make());
  }
  auto bounds = [&](std::size_t w) {
    return begin + n * w / workers;
  };
  if (workers == 1) {
    work(states[0], begin, end);
    return states;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&, w] {
      try {
        work(states[w], bounds(w), bounds(w + 1));
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) {
    t.join();
  }
  for (auto& e : errors) {
    if (e) {
      std::rethrow_exception(e);
    }
  }
  return states;
}

} // namespace eiprobe
