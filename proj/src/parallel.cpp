#include "metascreen/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace metascreen {

namespace {
std::atomic<int> g_threads{0};
// nested loops run serially inside a worker
thread_local bool t_in_worker = false;

int env_threads() {
    if (const char* s = std::getenv("METASCREEN_THREADS")) {
        const int n = std::atoi(s);
        if (n > 0) return n;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}
}  // namespace

void set_thread_count(int n) { g_threads = std::max(0, n); }

int thread_count() {
    const int n = g_threads.load();
    return n > 0 ? n : env_threads();
}

void parallel_for(int n, const std::function<void(int)>& f) {
    const int nt = t_in_worker ? 1 : std::min(thread_count(), n);
    if (nt <= 1) {
        for (int i = 0; i < n; ++i) f(i);
        return;
    }
    std::exception_ptr err;
    std::mutex m;
    std::vector<std::thread> pool;
    for (int w = 0; w < nt; ++w) {
        const int lo = static_cast<int>(static_cast<long>(n) * w / nt);
        const int hi = static_cast<int>(static_cast<long>(n) * (w + 1) / nt);
        pool.emplace_back([&, lo, hi] {
            t_in_worker = true;
            try {
                for (int i = lo; i < hi; ++i) f(i);
            } catch (...) {
                std::lock_guard<std::mutex> lk(m);
                if (!err) err = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
}

}  // namespace metascreen
