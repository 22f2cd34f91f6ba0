#pragma once

#include <array>
#include <cstdint>

#include "viab/types.hpp"

namespace viab {

/// Purposes that get independent key spaces under one experiment seed.
enum class StreamDomain : std::uint64_t {
    integrate = 1,
    residual = 2,
    builder = 3,
    boundary = 4,
    probe = 5,
    closed_loop = 6,
};

std::uint64_t splitmix64(std::uint64_t x);

/// Philox4x32-10 block function.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key);

/// Counter-based substream addressed by (seed, domain, stream, substream).
/// Two objects built from the same address produce the same sequence, so
/// results never depend on scheduling.
class RngStream {
public:
    RngStream(std::uint64_t seed, StreamDomain domain, std::uint64_t stream, std::uint64_t substream);

    /// Uniform on the open interval (0,1).
    double uniform();
    double normal();
    void fill_normal(Eigen::Ref<Vec> out);

private:
    void refill();

    std::array<std::uint32_t, 2> key_{};
    std::array<std::uint32_t, 4> ctr_{};
    std::array<std::uint32_t, 4> buf_{};
    int pos_ = 4;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace viab
