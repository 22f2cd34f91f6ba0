#include "viab/rng.hpp"

#include <cmath>
#include <numbers>

namespace viab {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key) {
    constexpr std::uint32_t kM0 = 0xD2511F53u;
    constexpr std::uint32_t kM1 = 0xCD9E8D57u;
    constexpr std::uint32_t kW0 = 0x9E3779B9u;
    constexpr std::uint32_t kW1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * ctr[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * ctr[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const auto lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
        const auto lo1 = static_cast<std::uint32_t>(p1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kW0;
        key[1] += kW1;
    }
    return ctr;
}

RngStream::RngStream(std::uint64_t seed, StreamDomain domain, std::uint64_t stream, std::uint64_t substream) {
    const std::uint64_t k = splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(domain)));
    key_ = {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
    // ctr[0] counts blocks; the remaining words address the substream.
    const std::uint64_t s = splitmix64(stream);
    ctr_ = {0u, static_cast<std::uint32_t>(substream), static_cast<std::uint32_t>(s ^ (substream >> 32)),
            static_cast<std::uint32_t>(s >> 32)};
}

void RngStream::refill() {
    buf_ = philox4x32(ctr_, key_);
    ++ctr_[0];
    pos_ = 0;
}

double RngStream::uniform() {
    if (pos_ >= 3) refill();
    const std::uint64_t hi = buf_[pos_];
    const std::uint64_t lo = buf_[pos_ + 1];
    pos_ += 2;
    const std::uint64_t bits = ((hi << 32) | lo) >> 11;  // 53 bits
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

double RngStream::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
}

void RngStream::fill_normal(Eigen::Ref<Vec> out) {
    for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = normal();
}

}  // namespace viab
