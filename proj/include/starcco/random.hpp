#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

#include "starcco/common.hpp"

namespace starcco {

using Rng = std::mt19937_64;

// Independent stream derived from a master seed and a tag path, e.g.
// make_stream(seed, {kStreamChannel, episode, actor}).
inline Rng make_stream(std::uint64_t master, std::initializer_list<std::uint64_t> tags) {
    std::vector<std::uint32_t> words;
    words.reserve(2 + 2 * tags.size());
    auto push = [&](std::uint64_t v) {
        words.push_back(static_cast<std::uint32_t>(v & 0xffffffffu));
        words.push_back(static_cast<std::uint32_t>(v >> 32));
    };
    push(master);
    for (auto t : tags) push(t);
    std::seed_seq seq(words.begin(), words.end());
    return Rng(seq);
}

/// Circularly-symmetric complex normal with unit variance.
inline cplx complex_normal(Rng& rng) {
    std::normal_distribution<double> n(0.0, std::sqrt(0.5));
    const double re = n(rng);
    const double im = n(rng);
    return {re, im};
}

inline double uniform01(Rng& rng) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

// Stream tags.
enum StreamTag : std::uint64_t {
    kStreamChannel = 0x43484e4cULL,
    kStreamTraffic = 0x54524146ULL,
    kStreamInitialState = 0x494e4954ULL,
    kStreamPolicy = 0x504f4c49ULL,
    kStreamPreference = 0x50524546ULL,
    kStreamMinibatch = 0x4d494e49ULL,
    kStreamNetInit = 0x4e455449ULL,
    kStreamEpisode = 0x45504953ULL,
    kStreamEval = 0x4556414cULL,
};

} // namespace starcco
