#pragma once

#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace rsweep {

/// Thread budget for frequency sweeps: ROBUSTSWEEP_THREADS caps it, unset
/// means all cores.
inline unsigned sweep_thread_budget() {
    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("ROBUSTSWEEP_THREADS")) {
        long v = std::strtol(env, nullptr, 10);
        if (v >= 1 && v < static_cast<long>(hw)) return static_cast<unsigned>(v);
        if (v >= static_cast<long>(hw)) return hw;
    }
    return hw;
}

/// Runs fn(i) for i in [0, n). Each index is processed wholly by one thread,
/// so results are identical to a serial run.
inline void parallel_for_index(std::size_t n, const std::function<void(std::size_t)>& fn) {
    unsigned threads = sweep_thread_budget();
    if (threads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            fn(i);
        }
    };
    std::vector<std::thread> pool;
    unsigned count = std::min<std::size_t>(threads, n);
    pool.reserve(count);
    for (unsigned t = 0; t < count; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
}

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Deterministic per-(index, restart) seed derivation.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index, std::uint64_t restart) {
    return splitmix64(splitmix64(base ^ (index * 0x9E3779B97F4A7C15ull)) ^ restart);
}

}  // namespace rsweep
