#pragma once

#include <cstdint>
#include <limits>

namespace tschsim {

using NodeId = std::uint32_t;
using Asn = std::uint64_t;

inline constexpr NodeId kBroadcast = std::numeric_limits<NodeId>::max();
inline constexpr NodeId kAnyPeer = kBroadcast - 1;
inline constexpr NodeId kNoNode = kBroadcast - 2;
inline constexpr NodeId kCoordinator = 0;

}  // namespace tschsim
