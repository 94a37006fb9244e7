#ifndef BFL_RNG_HPP
#define BFL_RNG_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

namespace bfl {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

} // namespace detail

/**
 * Seeded pseudo-random stream.
 *
 * A stream is identified by (seed, stream_id). The pair is mixed through
 * splitmix64 and fed to std::seed_seq, whose algorithm is fixed by the
 * standard, so sequences are reproducible across standard libraries. The
 * uniform and normal transforms are implemented here rather than taken from
 * <random> distributions, whose algorithms are implementation-defined.
 *
 * Satisfies UniformRandomBitGenerator.
 */
class RngStream {
public:
    using result_type = std::uint64_t;

    RngStream(std::uint64_t seed, std::uint64_t stream_id) : seed_(seed), stream_id_(stream_id) {
        const std::uint64_t a = detail::splitmix64(seed);
        const std::uint64_t b = detail::splitmix64(a ^ detail::splitmix64(stream_id + 0x632BE59BD9B4E019ULL));
        std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                          static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
        engine_.seed(seq);
    }

    static constexpr result_type min() { return std::mt19937_64::min(); }
    static constexpr result_type max() { return std::mt19937_64::max(); }
    result_type operator()() { return engine_(); }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_id_; }

    /// Uniform on the open interval (0, 1); 53 bits of resolution.
    double uniform() {
        return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Standard normal via the Marsaglia polar method.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        has_spare_ = true;
        return u * f;
    }

    /// Unit-rate exponential.
    double exponential() { return -std::log(uniform()); }

    bool operator==(const RngStream&) const = default;

private:
    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace bfl

#endif
