#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tschsim/frame.h"
#include "tschsim/mobility.h"
#include "tschsim/types.h"

namespace tschsim {

using Channel = int;

/// Frequency hopping sequence of IEEE 802.15.4 channels (11..26).
class Fhs {
public:
    Fhs();  // {16, 17, 23, 18}
    explicit Fhs(std::vector<Channel> channels);

    const std::vector<Channel>& channels() const { return channels_; }
    std::size_t size() const { return channels_.size(); }
    Channel operator[](std::size_t i) const { return channels_[i]; }

    friend bool operator==(const Fhs&, const Fhs&) = default;

private:
    std::vector<Channel> channels_;
};

/// Physical channel for a cell: FHS[(asn + channelOffset) mod |FHS|].
Channel channelFor(Asn asn, std::uint32_t channelOffset, const Fhs& fhs);

/// Unit-disk connectivity, inclusive at the boundary.
bool inRange(Position a, Position b, double range);

struct TxAttempt {
    NodeId sender;
    Channel channel;
    const Frame* frame;
};

struct Listener {
    NodeId node;
    Channel channel;
};

enum class RxResult : std::uint8_t { Idle, Delivered, Collision };

struct RxOutcome {
    NodeId receiver;
    RxResult result = RxResult::Idle;
    const TxAttempt* delivered = nullptr;  // set when result == Delivered
};

/// Per-listener slot outcome: with S the in-range co-channel senders,
/// |S| = 0 is idle, |S| = 1 delivers that frame, |S| >= 2 collides.
/// `positions` is indexed by node id. Throws std::invalid_argument when a
/// node both transmits and listens.
std::vector<RxOutcome> arbitrateSlot(std::span<const TxAttempt> attempts,
                                     std::span<const Listener> listeners,
                                     std::span<const Position> positions, double range);

/// Allocation-free variant used by the engine; `out` is cleared first.
void arbitrateSlot(std::span<const TxAttempt> attempts, std::span<const Listener> listeners,
                   std::span<const Position> positions, double range,
                   std::vector<RxOutcome>& out);

}  // namespace tschsim
