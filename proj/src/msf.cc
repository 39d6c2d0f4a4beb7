#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "tschsim/schedule.h"

namespace tschsim {

MsfScheduler::MsfScheduler(SchedulerParams params, std::uint64_t seed)
    : params_(params), seed_(seed)
{
    if (params_.msfLength < 2 || params_.channelOffsets == 0 || params_.msfWindow == 0)
        throw std::invalid_argument("invalid MSF parameters");
    slotframes_ = {{"msf", params_.msfLength, 0}};
}

// Slot 0 belongs to the minimal shared cell, so autonomous cells hash into
// [1, length).
std::uint32_t MsfScheduler::autonomousSlot(NodeId id) const
{
    return 1 + id % (params_.msfLength - 1);
}

std::uint32_t MsfScheduler::autonomousChannelOffset(NodeId id) const
{
    return id % params_.channelOffsets;
}

void MsfScheduler::activeCells(const NodeContext& ctx, Asn asn, std::vector<Cell>& out)
{
    out.clear();
    const auto slot = static_cast<std::uint32_t>(asn % params_.msfLength);
    Cell rxOnly{};
    bool haveRx = false;

    if (slot == 0)
        out.push_back({0, 0, 0, kCellTx | kCellRx | kCellShared | kCellEb, kAnyPeer});
    if (ctx.parent != kNoNode && slot == autonomousSlot(ctx.parent))
        out.push_back({0, slot, autonomousChannelOffset(ctx.parent), kCellTx | kCellShared, ctx.parent});
    for (const auto& c : negotiated_) {
        if (c.slotOffset != slot)
            continue;
        if (c.owner == ctx.self)
            out.push_back({0, slot, c.channelOffset, kCellTx, c.peer});
        else if (c.peer == ctx.self && !haveRx) {
            rxOnly = {0, slot, c.channelOffset, kCellRx, c.owner};
            haveRx = true;
        }
    }
    if (haveRx)
        out.push_back(rxOnly);
    if (slot == autonomousSlot(ctx.self))
        out.push_back({0, slot, autonomousChannelOffset(ctx.self), kCellRx, kAnyPeer});
}

std::uint32_t MsfScheduler::txCellCount(NodeId self, NodeId peer) const
{
    std::uint32_t n = 1;  // autonomous cell toward the parent
    for (const auto& c : negotiated_)
        if (c.owner == self && c.peer == peer)
            ++n;
    return n;
}

MsfScheduler::Monitor& MsfScheduler::monitor(NodeId self, NodeId peer)
{
    for (auto& m : monitors_)
        if (m.self == self && m.peer == peer)
            return m;
    monitors_.push_back({self, peer});
    return monitors_.back();
}

RngStream& MsfScheduler::rng(NodeId self)
{
    for (auto& [id, r] : rngs_)
        if (id == self)
            return r;
    rngs_.emplace_back(self, RngStream(seed_, {StreamTag::Msf, self}));
    return rngs_.back().second;
}

void MsfScheduler::txCellElapsed(NodeId self, NodeId peer, bool used)
{
    Monitor& m = monitor(self, peer);
    ++m.elapsed;
    if (used)
        ++m.used;
    if (m.elapsed < params_.msfWindow)
        return;
    const std::uint32_t elapsed = m.elapsed;
    const std::uint32_t usedCount = m.used;
    m.elapsed = 0;
    m.used = 0;
    adapt(self, peer, usedCount, elapsed);
}

int MsfScheduler::adapt(NodeId self, NodeId peer, std::uint32_t used, std::uint32_t elapsed)
{
    if (elapsed == 0)
        return 0;
    const double usage = static_cast<double>(used) / elapsed;
    if (usage >= params_.msfHighUsage)
        return addCell(self, peer) ? 1 : 0;
    if (usage <= params_.msfLowUsage && txCellCount(self, peer) > 1)
        return deleteCell(self, peer) ? -1 : 0;
    return 0;
}

bool MsfScheduler::addCell(NodeId self, NodeId peer)
{
    if (txCellCount(self, peer) >= params_.msfMaxCells) {
        ++counters_.addRejected;
        return false;
    }
    std::vector<bool> busy(params_.msfLength, false);
    busy[0] = true;
    busy[autonomousSlot(self)] = true;
    busy[autonomousSlot(peer)] = true;
    for (const auto& c : negotiated_)
        if (c.owner == self || c.peer == self || c.owner == peer || c.peer == peer)
            busy[c.slotOffset] = true;
    std::vector<std::uint32_t> free;
    for (std::uint32_t s = 0; s < params_.msfLength; ++s)
        if (!busy[s])
            free.push_back(s);
    if (free.empty()) {
        ++counters_.addRejected;
        return false;
    }
    RngStream& r = rng(self);
    const std::uint32_t slot = free[r.uniformChoice(free.size())];
    const auto ch = static_cast<std::uint32_t>(r.uniformChoice(params_.channelOffsets));
    negotiated_.push_back({self, peer, slot, ch});
    ++counters_.added;
    return true;
}

bool MsfScheduler::deleteCell(NodeId self, NodeId peer)
{
    // Most recently added cell goes first.
    for (auto it = negotiated_.rbegin(); it != negotiated_.rend(); ++it) {
        if (it->owner == self && it->peer == peer) {
            negotiated_.erase(std::next(it).base());
            ++counters_.deleted;
            return true;
        }
    }
    return false;
}

void MsfScheduler::removeLinkCells(NodeId a, NodeId b)
{
    std::erase_if(negotiated_, [&](const MsfCell& c) { return c.owner == a && c.peer == b; });
}

void MsfScheduler::parentChanged(NodeId self, NodeId oldParent, NodeId newParent)
{
    if (oldParent == newParent)
        return;
    if (oldParent != kNoNode) {
        removeLinkCells(self, oldParent);
        std::erase_if(monitors_, [&](const Monitor& m) { return m.self == self && m.peer == oldParent; });
    }
}

}  // namespace tschsim
