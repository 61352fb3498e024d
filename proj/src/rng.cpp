#include "lqg/rng.hpp"

#include <numbers>

namespace lqg {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void philox_round(std::array<std::uint32_t, 4>& c, std::uint32_t k0,
                         std::uint32_t k1) {
    std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM0) * c[0];
    std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM1) * c[2];
    std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
    std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
    std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
    std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
    c = {hi1 ^ c[1] ^ k0, lo1, hi0 ^ c[3] ^ k1, lo0};
}

} // namespace

std::array<std::uint32_t, 4> Rng::block_at(std::uint64_t n) const {
    std::array<std::uint32_t, 4> c = {static_cast<std::uint32_t>(n),
                                      static_cast<std::uint32_t>(n >> 32), c2_,
                                      c3_};
    std::uint32_t k0 = key0_, k1 = key1_;
    for (int r = 0; r < 10; ++r) {
        philox_round(c, k0, k1);
        k0 += kPhiloxW0;
        k1 += kPhiloxW1;
    }
    return c;
}

std::uint32_t Rng::next_u32() {
    if (buf_pos_ == 4) {
        buf_ = block_at(n_++);
        buf_pos_ = 0;
    }
    return buf_[buf_pos_++];
}

std::uint64_t Rng::next_u64() {
    std::uint64_t lo = next_u32();
    std::uint64_t hi = next_u32();
    return (hi << 32) | lo;
}

double Rng::uniform() {
    // 53-bit mantissa, shifted into (0,1)
    std::uint64_t u = next_u64() >> 11;
    return (static_cast<double>(u) + 0.5) * (1.0 / 9007199254740992.0);
}

double Rng::gauss() {
    if (has_spare_) {
        has_spare_ = false;
        return gauss_spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * std::numbers::pi * u2;
    gauss_spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
}

std::uint64_t Rng::poisson(double mean) {
    if (mean <= 0.0) return 0;
    if (mean < 30.0) {
        double L = std::exp(-mean);
        std::uint64_t k = 0;
        double p = 1.0;
        do {
            ++k;
            p *= uniform();
        } while (p > L);
        return k - 1;
    }
    // normal approximation for large means, adequate for bead counts
    double x = mean + std::sqrt(mean) * gauss();
    return x < 0.0 ? 0 : static_cast<std::uint64_t>(x + 0.5);
}

std::uint64_t hash_name(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

Rng make_stream(std::uint64_t root_seed, std::string_view module,
                std::string_view purpose, std::uint64_t index) {
    std::uint64_t h = hash_name(module);
    h ^= hash_name(purpose) + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2);
    h ^= root_seed + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2);
    return Rng(h, index);
}

} // namespace lqg
