#include "splatkit/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <thread>
#include <vector>

namespace splatkit {

namespace {
std::atomic<int> g_max_threads{0};
}

void set_max_threads(int n) { g_max_threads.store(n < 0 ? 0 : n); }

int max_threads() {
    const int configured = g_max_threads.load();
    if (configured > 0) return configured;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_for(size_t begin, size_t end, const std::function<void(size_t, size_t)>& fn,
                  size_t grain) {
    if (end <= begin) return;
    const size_t total = end - begin;
    const size_t workers = std::min<size_t>(max_threads(), std::max<size_t>(1, total / std::max<size_t>(grain, 1)));
    if (workers <= 1) {
        fn(begin, end);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const size_t chunk = (total + workers - 1) / workers;
    for (size_t w = 0; w < workers; ++w) {
        const size_t lo = begin + w * chunk;
        const size_t hi = std::min(end, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&fn, lo, hi] { fn(lo, hi); });
    }
    for (auto& t : pool) t.join();
}

} // namespace splatkit
