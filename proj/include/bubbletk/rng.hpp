#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <thread>
#include <vector>

#include "bubbletk/core.hpp"

namespace bubbletk {

inline constexpr std::uint64_t default_seed = 0x5EED5EEDULL;

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Derives a sub-seed from a parent seed and a stream tag.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
    return splitmix64(seed ^ splitmix64(tag + 0x632BE59BD9B4E019ULL));
}

/// Counter-based generator: the stream for sample `index` under `seed` is a
/// pure function of (seed, index), so any partition of the index range into
/// parallel blocks reproduces the same draws.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t index)
        : state_(splitmix64(seed) ^ splitmix64(index * 0xD1B54A32D192ED03ULL + 1)) {}

    std::uint64_t next() {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform in (0, 1).
    double uniform() { return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53; }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * M_PI * u2);
        has_spare_ = true;
        return r * std::cos(2.0 * M_PI * u2);
    }

    Vector gaussian(int dim) {
        Vector g(dim);
        for (int i = 0; i < dim; ++i) g[i] = normal();
        return g;
    }

    /// Uniform point on the unit sphere S^{dim-1} in R^dim.
    Vector on_sphere(int dim) {
        for (;;) {
            Vector g = gaussian(dim);
            const double nrm = g.norm();
            if (nrm > 1e-300) return g / nrm;
        }
    }

    /// Uniform point in the unit ball of R^dim.
    Vector in_ball(int dim) {
        Vector u = on_sphere(dim);
        return u * std::pow(uniform(), 1.0 / dim);
    }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Worker count; BUBBLETK_THREADS caps it. Never affects results.
inline unsigned worker_count() {
    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("BUBBLETK_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) hw = std::min<unsigned>(hw, static_cast<unsigned>(v));
    }
    return hw;
}

inline constexpr std::size_t sample_block = 8192;

/// Runs `f(begin, end)` over fixed-size index blocks and returns the per-block
/// results in block order. Block boundaries do not depend on the thread count.
template <class F>
auto map_blocks(std::size_t count, F&& f) -> std::vector<decltype(f(std::size_t{}, std::size_t{}))> {
    using R = decltype(f(std::size_t{}, std::size_t{}));
    const std::size_t nblocks = (count + sample_block - 1) / sample_block;
    std::vector<R> out(nblocks);
    const unsigned workers = std::min<std::size_t>(worker_count(), std::max<std::size_t>(nblocks, 1));
    auto run = [&](unsigned w) {
        for (std::size_t b = w; b < nblocks; b += workers) {
            const std::size_t lo = b * sample_block;
            out[b] = f(lo, std::min(count, lo + sample_block));
        }
    };
    if (workers <= 1) {
        run(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run, w);
        for (auto& t : pool) t.join();
    }
    return out;
}

}  // namespace bubbletk
