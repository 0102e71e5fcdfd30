#pragma once

// Counter-based generator (Philox4x32-10). A draw is a pure function of
// (seed, sample, domain, index), so results never depend on how samples are scheduled.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace thinlevy {

class Philox4x32 {
public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter apply(Counter c, Key k) {
        for (int r = 0; r < 10; ++r) {
            if (r > 0) {
                k[0] += 0x9E3779B9u;
                k[1] += 0xBB67AE85u;
            }
            std::uint64_t p0 = std::uint64_t{0xD2511F53u} * c[0];
            std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * c[2];
            auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
            auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
            c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
        }
        return c;
    }
};

enum class StreamDomain : std::uint32_t { indicators = 0, normals = 1, bootstrap = 2 };

// One sample's private stream within a domain. Each Philox block gives two 53-bit uniforms.
class Substream {
public:
    Substream(std::uint64_t seed, std::uint64_t sample, StreamDomain d)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          sample_(sample), domain_(static_cast<std::uint32_t>(d)) {}

    // uniform in (0,1), never 0 or 1
    double uniform(std::uint64_t index) {
        std::uint64_t b = index >> 1;
        if (b != block_ || !valid_) refill(b);
        const std::uint32_t* w = &out_[(index & 1) * 2];
        std::uint64_t m = (std::uint64_t{w[0] >> 5} << 26) | (w[1] >> 6);
        return (static_cast<double>(m) + 0.5) * 0x1p-53;
    }

    // standard normals by Box-Muller on uniform pairs (2j, 2j+1)
    double normal(std::uint64_t index) {
        std::uint64_t j = index >> 1;
        double u1 = uniform(2 * j), u2 = uniform(2 * j + 1);
        double rad = std::sqrt(-2.0 * std::log(u1));
        double ang = 2.0 * std::numbers::pi * u2;
        return (index & 1) ? rad * std::sin(ang) : rad * std::cos(ang);
    }

private:
    void refill(std::uint64_t b) {
        // counter: block (64 bit) | domain | sample (low 32 bits mixed with high)
        Philox4x32::Counter c{static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32) ^ (domain_ << 28),
                              static_cast<std::uint32_t>(sample_), static_cast<std::uint32_t>(sample_ >> 32)};
        out_ = Philox4x32::apply(c, key_);
        block_ = b;
        valid_ = true;
    }

    Philox4x32::Key key_;
    std::uint64_t sample_;
    std::uint32_t domain_;
    std::uint64_t block_ = 0;
    bool valid_ = false;
    Philox4x32::Counter out_{};
};

} // namespace thinlevy
