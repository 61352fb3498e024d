#pragma once

#include <cstdint>
#include <cmath>
#include <string_view>
#include <array>

namespace lqg {

// Counter-based generator (Philox-4x32-10). A stream is identified by a
// 64-bit key; draws consume the 128-bit counter. Streams derived from the
// same root seed but different names are independent, and batch index i can
// be baked into the counter so parallel sample i is reproducible regardless
// of scheduling.
class Rng {
public:
    explicit Rng(std::uint64_t key, std::uint64_t block = 0)
        : key0_(static_cast<std::uint32_t>(key)),
          key1_(static_cast<std::uint32_t>(key >> 32)),
          c2_(static_cast<std::uint32_t>(block)),
          c3_(static_cast<std::uint32_t>(block >> 32)) {}

    std::uint32_t next_u32();
    std::uint64_t next_u64();

    // uniform on (0,1), never exactly 0 or 1
    double uniform();
    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    // standard normal via Box-Muller (deterministic draw count)
    double gauss();

    // Exp(rate)
    double exponential(double rate) { return -std::log(uniform()) / rate; }

    std::uint64_t poisson(double mean);

private:
    std::array<std::uint32_t, 4> block_at(std::uint64_t n) const;

    std::uint32_t key0_, key1_;
    std::uint32_t c2_, c3_;       // upper counter half: block id
    std::uint64_t n_ = 0;         // lower counter half: draw index
    std::array<std::uint32_t, 4> buf_{};
    int buf_pos_ = 4;
    double gauss_spare_ = 0.0;
    bool has_spare_ = false;
};

// 64-bit FNV-1a, used to hash stream names
std::uint64_t hash_name(std::string_view s);

// Named substream: all randomness flows from one root seed through
// (module:purpose:index) streams.
Rng make_stream(std::uint64_t root_seed, std::string_view module,
                std::string_view purpose, std::uint64_t index = 0);

} // namespace lqg
