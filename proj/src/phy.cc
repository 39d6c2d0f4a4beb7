#include "tschsim/phy.h"

#include <stdexcept>

namespace tschsim {

std::string_view toString(FrameKind kind)
{
    switch (kind) {
    case FrameKind::Eb: return "EB";
    case FrameKind::Data: return "DATA";
    case FrameKind::Ack: return "ACK";
    case FrameKind::Keepalive: return "KA";
    }
    return "?";
}

Fhs::Fhs() : channels_{16, 17, 23, 18} {}

Fhs::Fhs(std::vector<Channel> channels) : channels_(std::move(channels))
{
    if (channels_.empty())
        throw std::invalid_argument("hopping sequence is empty");
    for (Channel c : channels_)
        if (c < 11 || c > 26)
            throw std::invalid_argument("channel " + std::to_string(c) + " outside 11..26");
}

Channel channelFor(Asn asn, std::uint32_t channelOffset, const Fhs& fhs)
{
    return fhs[(asn + channelOffset) % fhs.size()];
}

bool inRange(Position a, Position b, double range)
{
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    return dx * dx + dy * dy <= range * range;
}

void arbitrateSlot(std::span<const TxAttempt> attempts, std::span<const Listener> listeners,
                   std::span<const Position> positions, double range, std::vector<RxOutcome>& out)
{
    out.clear();
    for (const auto& l : listeners)
        for (const auto& a : attempts)
            if (a.sender == l.node)
                throw std::invalid_argument("node " + std::to_string(l.node) +
                                            " both transmits and listens");

    for (const auto& l : listeners) {
        RxOutcome o{l.node};
        int heard = 0;
        for (const auto& a : attempts) {
            if (a.channel != l.channel || !inRange(positions[a.sender], positions[l.node], range))
                continue;
            if (++heard == 1)
                o.delivered = &a;
        }
        if (heard == 1) {
            o.result = RxResult::Delivered;
        } else {
            o.delivered = nullptr;
            o.result = heard == 0 ? RxResult::Idle : RxResult::Collision;
        }
        out.push_back(o);
    }
}

std::vector<RxOutcome> arbitrateSlot(std::span<const TxAttempt> attempts,
                                     std::span<const Listener> listeners,
                                     std::span<const Position> positions, double range)
{
    std::vector<RxOutcome> out;
    arbitrateSlot(attempts, listeners, positions, range, out);
    return out;
}

}  // namespace tschsim
