#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace darkchain {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) {
    return splitmix64(a ^ splitmix64(b + 0x632be59bd9b4e019ULL));
}

// Counter-based generator: output k is a pure function of (key, k), so any
// stream can be split or replayed without shared state.
class CounterRng {
public:
    using result_type = std::uint64_t;

    explicit CounterRng(std::uint64_t key) : key_(splitmix64(key)) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type at(std::uint64_t counter) const { return splitmix64(key_ ^ splitmix64(counter)); }
    result_type operator()() { return at(counter_++); }

    // Uniform on the open interval (0, 1) with 53 bits.
    double uniform_at(std::uint64_t counter) const {
        return (static_cast<double>(at(counter) >> 11) + 0.5) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller from the counter pair (2k, 2k+1).
    double normal_at(std::uint64_t k) const {
        const double u1 = uniform_at(2 * k);
        const double u2 = uniform_at(2 * k + 1);
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace darkchain
