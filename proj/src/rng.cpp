#include "kac/rng.hpp"

namespace kac {

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_key(std::uint64_t seed, std::uint64_t tag, std::uint64_t index)
{
    std::uint64_t k = splitmix64(seed);
    k = splitmix64(k ^ tag);
    k = splitmix64(k ^ (index * 0xd1b54a32d192ed03ULL));
    return k;
}

Rng make_stream(std::uint64_t seed, std::uint64_t tag, std::uint64_t index)
{
    const std::uint64_t key = derive_key(seed, tag, index);
    std::seed_seq seq{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32),
                      static_cast<std::uint32_t>(tag), static_cast<std::uint32_t>(index)};
    return Rng(seq);
}

} // namespace kac
