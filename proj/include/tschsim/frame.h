#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include "tschsim/types.h"

namespace tschsim {

enum class FrameKind : std::uint8_t { Eb, Data, Ack, Keepalive };

std::string_view toString(FrameKind kind);

struct AppPacketId {
    NodeId origin = 0;
    std::uint32_t seq = 0;

    friend bool operator==(const AppPacketId&, const AppPacketId&) = default;
};

struct Frame {
    FrameKind kind = FrameKind::Data;
    NodeId src = 0;
    NodeId dst = kBroadcast;
    Asn asnStamp = 0;  // EB only
    int rank = 0;      // EB only
    std::optional<AppPacketId> payload;
    int hops = 0;      // forwarding hops taken so far

    bool isBroadcast() const { return dst == kBroadcast; }
    bool needsAck() const { return !isBroadcast() && (kind == FrameKind::Data || kind == FrameKind::Keepalive); }
};

}  // namespace tschsim
