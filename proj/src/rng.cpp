// SPDX-License-Identifier: MIT
#include "mfstop/rng.hpp"

#include <cmath>
#include <numbers>

namespace mfstop {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(product >> 32);
    lo = static_cast<std::uint32_t>(product);
}

inline PhiloxCounter round(const PhiloxCounter& c, const PhiloxKey& k) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, c[0], hi0, lo0);
    mulhilo(kMul1, c[2], hi1, lo1);
    return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

}  // namespace

PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key) noexcept {
    for (int r = 0; r < 10; ++r) {
        if (r > 0) {
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        ctr = round(ctr, key);
    }
    return ctr;
}

Stream::Stream(std::uint64_t seed, std::uint64_t stream_id) noexcept
    : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
      stream_id_(stream_id) {}

std::uint64_t Stream::next_u64() noexcept {
    if (next_word_ >= 4) {
        // counter words 0-1: position in the stream, words 2-3: stream id
        const PhiloxCounter ctr{static_cast<std::uint32_t>(block_),
                                static_cast<std::uint32_t>(block_ >> 32),
                                static_cast<std::uint32_t>(stream_id_),
                                static_cast<std::uint32_t>(stream_id_ >> 32)};
        buffer_ = philox4x32_10(ctr, key_);
        ++block_;
        next_word_ = 0;
    }
    const std::uint64_t lo = buffer_[next_word_];
    const std::uint64_t hi = buffer_[next_word_ + 1];
    next_word_ += 2;
    return (hi << 32) | lo;
}

double Stream::uniform() noexcept {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double Stream::normal() noexcept {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace mfstop
