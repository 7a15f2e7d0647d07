#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace wbea {

// Philox4x32-10 counter-based generator. Streams are addressed, not
// seeked: a draw is a pure function of (seed, replica, step, channel,
// block), which makes replicas and channels independent by construction
// and any work split bit-reproducible.
struct Philox4x32 {
    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

    struct Block {
        std::uint32_t v[4];
    };

    static Block generate(std::uint64_t key, std::uint32_t c0, std::uint32_t c1, std::uint32_t c2,
                          std::uint32_t c3) {
        std::uint32_t k0 = static_cast<std::uint32_t>(key);
        std::uint32_t k1 = static_cast<std::uint32_t>(key >> 32);
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * c0;
            const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * c2;
            const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
            const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
            const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
            const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
            const std::uint32_t n0 = hi1 ^ c1 ^ k0;
            const std::uint32_t n1 = lo1;
            const std::uint32_t n2 = hi0 ^ c3 ^ k1;
            const std::uint32_t n3 = lo0;
            c0 = n0;
            c1 = n1;
            c2 = n2;
            c3 = n3;
            k0 += kWeyl0;
            k1 += kWeyl1;
        }
        return Block{{c0, c1, c2, c3}};
    }
};

// Stream channels: Gaussian noise and minibatch index draws never share
// counter space.
enum class RngChannel : std::uint32_t { kNoise = 0, kMinibatch = 1, kDataset = 2 };

inline double uniform_from_words(std::uint32_t hi, std::uint32_t lo) {
    // 53 random bits into (0, 1).
    const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 32) | lo;
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

struct GaussianPair {
    double z0, z1;
};

inline GaussianPair gaussian_pair(std::uint64_t seed, std::uint32_t replica, std::uint32_t step,
                                  std::uint32_t block) {
    const auto b = Philox4x32::generate(seed, replica, step,
                                        static_cast<std::uint32_t>(RngChannel::kNoise), block);
    const double u1 = uniform_from_words(b.v[0], b.v[1]);
    const double u2 = uniform_from_words(b.v[2], b.v[3]);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    return GaussianPair{r * std::cos(a), r * std::sin(a)};
}

// Two bounded uniform indices in [0, n) per call (Lemire multiply-shift).
inline void index_pair(std::uint64_t seed, std::uint32_t replica, std::uint32_t step, std::uint32_t block,
                       std::uint32_t n, std::uint32_t& i0, std::uint32_t& i1) {
    const auto b = Philox4x32::generate(seed, replica, step,
                                        static_cast<std::uint32_t>(RngChannel::kMinibatch), block);
    const std::uint64_t x0 = (static_cast<std::uint64_t>(b.v[0]) << 32) | b.v[1];
    const std::uint64_t x1 = (static_cast<std::uint64_t>(b.v[2]) << 32) | b.v[3];
    i0 = static_cast<std::uint32_t>((static_cast<unsigned __int128>(x0) * n) >> 64);
    i1 = static_cast<std::uint32_t>((static_cast<unsigned __int128>(x1) * n) >> 64);
}

}  // namespace wbea
