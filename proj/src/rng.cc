#include "tschsim/rng.h"

#include <limits>
#include <stdexcept>

namespace tschsim {

namespace {

std::mt19937_64 keyedEngine(std::uint64_t seed, StreamId id)
{
    std::seed_seq seq{
        static_cast<std::uint32_t>(seed),
        static_cast<std::uint32_t>(seed >> 32),
        static_cast<std::uint32_t>(id.tag),
        static_cast<std::uint32_t>(id.node),
    };
    return std::mt19937_64(seq);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, StreamId id)
    : seed_(seed), id_(id), engine_(keyedEngine(seed, id))
{
}

std::uint64_t RngStream::uniformChoice(std::uint64_t n)
{
    if (n == 0)
        throw std::invalid_argument("uniformChoice: n must be >= 1");
    if (n == 1)
        return 0;
    constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
    // Largest multiple of n that fits; draws above it would bias low indices.
    const std::uint64_t limit = kMax - (kMax % n + 1) % n;
    std::uint64_t x;
    do {
        x = engine_();
    } while (x > limit);
    return x % n;
}

double RngStream::uniform01()
{
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

}  // namespace tschsim
