#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace rzp {

// Error taxonomy mirrored by the C API status codes and the CLI exit
// contract: parse/precondition/hypothesis -> exit 2, internal -> exit 1.
struct parse_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct precondition_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct hypothesis_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline std::atomic<int>& thread_count_slot() {
    static std::atomic<int> n{0};  // 0 = hardware default
    return n;
}

inline void set_thread_count(int n) { thread_count_slot().store(n < 0 ? 0 : n); }

inline int thread_count() {
    int n = thread_count_slot().load();
    if (n > 0) return n;
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

// Fork-join map over [0, n). Chunking depends only on n and the worker
// count, and workers write disjoint slots, so results do not depend on
// scheduling. Reductions are done by the caller in index order.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body) {
    std::size_t workers = static_cast<std::size_t>(thread_count());
    if (workers <= 1 || n < 2 * workers) {
        body(0, n);
        return;
    }
    if (workers > n) workers = n;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        std::size_t lo = w * chunk;
        std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&body, lo, hi] { body(lo, hi); });
    }
    for (auto& t : pool) t.join();
}

// Neumaier-compensated accumulator; fixed accumulation order makes the
// O(N^2) kernel sums reproducible across thread counts.
class KahanSum {
  public:
    void add(double x) {
        double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

  private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline double kahan_total(const std::vector<double>& v) {
    KahanSum s;
    for (double x : v) s.add(x);
    return s.value();
}

// splitmix64; used to derive independent streams from (seed, tags).
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// xoshiro-free minimal generator: a splitmix64 stream. Hand-rolled so the
// byte stream is identical across standard libraries.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}
    Rng(std::uint64_t seed, std::uint64_t tag1, std::uint64_t tag2 = 0)
        : state_(mix64(mix64(seed ^ mix64(tag1)) ^ mix64(tag2))) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        return mix64(state_);
    }
    // uniform in [0, 1)
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
    // uniform in [a, b)
    double uniform(double a, double b) { return a + (b - a) * next_double(); }
    // uniform integer in [0, n)
    std::size_t index(std::size_t n) { return static_cast<std::size_t>(next_double() * static_cast<double>(n)) % n; }

  private:
    std::uint64_t state_;
};

inline bool approx_eq(double a, double b, double rel = 1e-12) {
    double scale = std::max({1.0, std::abs(a), std::abs(b)});
    return std::abs(a - b) <= rel * scale;
}

}  // namespace rzp
