#pragma once

#include <cstdint>
#include <random>

#include "tschsim/types.h"

namespace tschsim {

enum class StreamTag : std::uint32_t {
    Mobility = 1,
    Mac = 2,
    Msf = 3,
    Link = 4,
    Test = 99,
};

/// Identifies one substream of a run seed. Substreams are keyed by
/// (tag, node), so adding a node never shifts another node's draws.
struct StreamId {
    StreamTag tag;
    NodeId node;
};

/// Seeded random stream. The engine is std::mt19937_64 keyed through a
/// seed_seq over (seed, tag, node); bounded draws use rejection sampling so
/// results do not depend on the standard library's distribution classes.
class RngStream {
public:
    RngStream(std::uint64_t seed, StreamId id);

    std::uint64_t next() { return engine_(); }

    /// Uniform index in [0, n). Throws std::invalid_argument when n == 0.
    std::uint64_t uniformChoice(std::uint64_t n);

    /// Uniform double in [0, 1) with 53 bits of resolution.
    double uniform01();

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    std::uint64_t seed() const { return seed_; }
    StreamId id() const { return id_; }

private:
    std::uint64_t seed_;
    StreamId id_;
    std::mt19937_64 engine_;
};

}  // namespace tschsim
