#pragma once

#include <cstdint>
#include <initializer_list>

namespace medivista {

// Counter-based splittable RNG. A stream is a (key, counter) pair; the key is
// derived by folding lane identifiers (seed, epoch, sample, ...), so any
// worker can rebuild the exact same stream without shared state.
class RngStream {
public:
    explicit RngStream(uint64_t key) : key_(key) {}

    static uint64_t mix(uint64_t x) {
        // splitmix64 finalizer
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    // Fold lane ids into a stream key, e.g. keyed({seed, epoch, sample}).
    static RngStream keyed(std::initializer_list<uint64_t> lanes) {
        uint64_t k = 0x2545f4914f6cdd1dULL;
        for (uint64_t v : lanes) k = mix(k ^ mix(v));
        return RngStream(k);
    }

    uint64_t next_u64() { return mix(key_ ^ counter_++); }

    // uniform in [0, 1)
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // integer in [0, n)
    int uniform_int(int n) {
        return static_cast<int>(next_u64() % static_cast<uint64_t>(n));
    }

    // standard normal via Box-Muller; one spare is cached per stream
    double normal();

private:
    uint64_t key_;
    uint64_t counter_ = 0;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace medivista
