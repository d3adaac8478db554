// SPDX-License-Identifier: MIT
/**
 * @file rng.hpp
 * @brief Counter-based random streams (Philox4x32-10).
 *
 * A stream is identified by (seed, stream id). Draw k of a stream is a pure
 * function of (seed, id, k), so results never depend on which worker thread
 * evaluates which stream.
 */
#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace mfstop {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

/// Ten-round Philox 4x32 bijection.
PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key) noexcept;

class Stream {
public:
    using result_type = std::uint64_t;

    Stream(std::uint64_t seed, std::uint64_t stream_id) noexcept;

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept {
        return std::numeric_limits<result_type>::max();
    }
    result_type operator()() noexcept { return next_u64(); }

    std::uint64_t next_u64() noexcept;
    /// Uniform on the open interval (0, 1) with 53 bits of resolution.
    double uniform() noexcept;
    /// Standard normal by Box-Muller; consumes exactly two uniforms.
    double normal() noexcept;

private:
    PhiloxKey key_;
    std::uint64_t stream_id_;
    std::uint64_t block_ = 0;
    PhiloxCounter buffer_{};
    int next_word_ = 4;
};

/// Stream id for one (replication, agent) pair.
constexpr std::uint64_t agent_stream(std::uint32_t replication, std::uint32_t agent) noexcept {
    return (static_cast<std::uint64_t>(replication) << 32) | agent;
}

}  // namespace mfstop
