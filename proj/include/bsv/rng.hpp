#pragma once

#include <cstdint>
#include <random>

namespace bsv {

/// SplitMix64 step; also the avalanche used to derive substream seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Deterministic substream seed for a (master seed, frame, entry) triple.
/// The construction is counter-based: the sampled stream depends only on the
/// triple, never on scheduling or worker count.
inline std::uint64_t substream_seed(std::uint64_t master, std::uint64_t frame,
                                    std::uint64_t entry_key) {
    std::uint64_t s = master;
    std::uint64_t a = splitmix64(s);
    s ^= frame + 0x632be59bd9b4e019ULL;
    std::uint64_t b = splitmix64(s);
    s ^= entry_key + 0x9e6c63d0876a9a47ULL;
    std::uint64_t c = splitmix64(s);
    std::uint64_t mixed = a ^ (b + 0x165667b19e3779f9ULL + (a << 6)) ^ (c >> 3);
    return splitmix64(mixed);
}

using Rng = std::mt19937_64;

inline Rng make_substream(std::uint64_t master, std::uint64_t frame,
                          std::uint64_t entry_key) {
    return Rng(substream_seed(master, frame, entry_key));
}

}  // namespace bsv
