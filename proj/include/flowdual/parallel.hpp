#pragma once

// Path-parallel evaluation with results stored by path index and reduced by
// a fixed pairwise tree, so totals do not depend on the worker count.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <span>
#include <thread>
#include <vector>

namespace flowdual {

inline unsigned resolve_workers(unsigned requested) {
    if (requested > 0) return requested;
    return std::max(1u, std::thread::hardware_concurrency());
}

/// out[i] = f(i) for i in [0, n), computed on `workers` threads in contiguous chunks.
template <class F>
auto parallel_map(std::size_t n, unsigned workers, F&& f) -> std::vector<decltype(f(std::size_t{0}))> {
    using T = decltype(f(std::size_t{0}));
    std::vector<T> out(n);
    const unsigned w = static_cast<unsigned>(std::min<std::size_t>(resolve_workers(workers), std::max<std::size_t>(n, 1)));
    if (w <= 1) {
        for (std::size_t i = 0; i < n; ++i) out[i] = f(i);
        return out;
    }
    std::vector<std::exception_ptr> errors(w);
    std::vector<std::thread> pool;
    pool.reserve(w);
    const std::size_t chunk = (n + w - 1) / w;
    for (unsigned t = 0; t < w; ++t) {
        pool.emplace_back([&, t] {
            try {
                const std::size_t lo = t * chunk, hi = std::min(n, lo + chunk);
                for (std::size_t i = lo; i < hi; ++i) out[i] = f(i);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return out;
}

/// Pairwise (tree) summation in a fixed order.
inline double pairwise_sum(std::span<const double> v) {
    if (v.size() <= 8) {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    }
    const std::size_t half = v.size() / 2;
    return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

struct SampleStats {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t count = 0;
};

inline SampleStats sample_stats(std::span<const double> v) {
    SampleStats s;
    s.count = v.size();
    if (v.empty()) return s;
    s.mean = pairwise_sum(v) / static_cast<double>(v.size());
    if (v.size() > 1) {
        std::vector<double> sq(v.size());
        std::transform(v.begin(), v.end(), sq.begin(),
                       [m = s.mean](double x) { return (x - m) * (x - m); });
        const double var = pairwise_sum(sq) / static_cast<double>(v.size() - 1);
        s.std_error = std::sqrt(var / static_cast<double>(v.size()));
    }
    return s;
}

}  // namespace flowdual
