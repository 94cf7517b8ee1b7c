#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace weakbench {

// Seeded RNG with fully specified draw algorithms. std::uniform_int_distribution
// is implementation-defined, so bounded draws use rejection sampling on the raw
// mt19937_64 stream to keep run artifacts byte-identical across platforms.
class SeededRng {
public:
    explicit SeededRng(uint64_t seed) : engine_(seed) {}

    uint64_t next() { return engine_(); }

    /// Uniform draw in [0, n).
    uint64_t bounded(uint64_t n) {
        if (n == 0) return 0;
        const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

    /// Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(bounded(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    /// Seeded uniform sample of k indices out of n, without replacement.
    std::vector<size_t> sample_indices(size_t n, size_t k) {
        std::vector<size_t> idx(n);
        for (size_t i = 0; i < n; ++i) idx[i] = i;
        shuffle(idx);
        idx.resize(k < n ? k : n);
        return idx;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace weakbench
