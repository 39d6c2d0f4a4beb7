#include <stdexcept>

#include "tschsim/schedule.h"

namespace tschsim {

namespace {

constexpr std::uint8_t kEbFrame = 0;
constexpr std::uint8_t kBroadcastFrame = 1;
constexpr std::uint8_t kUnicastFrame = 2;

constexpr std::uint32_t kEbChannelOffset = 0;
constexpr std::uint32_t kBroadcastChannelOffset = 1;

}  // namespace

OrchestraScheduler::OrchestraScheduler(SchedulerParams params) : params_(params)
{
    if (params_.ebLength == 0 || params_.broadcastLength == 0 || params_.unicastLength == 0 ||
        params_.channelOffsets == 0)
        throw std::invalid_argument("slotframe lengths and channel offsets must be positive");
    slotframes_ = {
        {"eb", params_.ebLength, 0},
        {"broadcast", params_.broadcastLength, 1},
        {"unicast", params_.unicastLength, 2},
    };
}

void OrchestraScheduler::commonCells(const NodeContext& ctx, Asn asn, std::vector<Cell>& out) const
{
    const auto ebSlot = static_cast<std::uint32_t>(asn % params_.ebLength);
    if (ebSlot == nodeHash(ctx.self, params_.ebLength))
        out.push_back({kEbFrame, ebSlot, kEbChannelOffset, kCellTx | kCellEb, kBroadcast});
    if (ctx.timeSource != kNoNode && ctx.timeSource != ctx.self &&
        ebSlot == nodeHash(ctx.timeSource, params_.ebLength))
        out.push_back({kEbFrame, ebSlot, kEbChannelOffset, kCellRx, ctx.timeSource});

    const auto bcSlot = static_cast<std::uint32_t>(asn % params_.broadcastLength);
    if (bcSlot == nodeHash(ctx.self, params_.broadcastLength))
        out.push_back({kBroadcastFrame, bcSlot, kBroadcastChannelOffset % params_.channelOffsets,
                       kCellTx | kCellRx | kCellShared, kBroadcast});
}

std::vector<Cell> OrchestraScheduler::unicastCells(const NodeContext& ctx) const
{
    std::vector<Cell> cells;
    const std::uint32_t len = params_.unicastLength;
    if (ctx.parent != kNoNode)
        cells.push_back({kUnicastFrame, nodeHash(ctx.parent, len), ctx.parent % params_.channelOffsets,
                         kCellTx | kCellShared, ctx.parent});
    cells.push_back({kUnicastFrame, nodeHash(ctx.self, len), ctx.self % params_.channelOffsets, kCellRx,
                     kAnyPeer});
    return cells;
}

void OrchestraScheduler::activeCells(const NodeContext& ctx, Asn asn, std::vector<Cell>& out)
{
    out.clear();
    commonCells(ctx, asn, out);
    const std::uint32_t len = params_.unicastLength;
    const auto slot = static_cast<std::uint32_t>(asn % len);
    if (ctx.parent != kNoNode && slot == nodeHash(ctx.parent, len))
        out.push_back({kUnicastFrame, slot, ctx.parent % params_.channelOffsets,
                       kCellTx | kCellShared, ctx.parent});
    if (slot == nodeHash(ctx.self, len))
        out.push_back({kUnicastFrame, slot, ctx.self % params_.channelOffsets, kCellRx, kAnyPeer});
}

AliceScheduler::AliceScheduler(SchedulerParams params) : OrchestraScheduler(params) {}

std::uint32_t AliceScheduler::linkSlot(NodeId from, NodeId to, std::uint64_t asfn) const
{
    return static_cast<std::uint32_t>(linkHash(from, to, asfn, 0) % params_.unicastLength);
}

std::uint32_t AliceScheduler::linkChannelOffset(NodeId from, NodeId to, std::uint64_t asfn) const
{
    return static_cast<std::uint32_t>(linkHash(from, to, asfn, 1) % params_.channelOffsets);
}

std::vector<Cell> AliceScheduler::linkCells(const NodeContext& ctx, std::uint64_t asfn) const
{
    std::vector<Cell> tx, rx;
    auto link = [&](NodeId from, NodeId to) {
        Cell c{kUnicastFrame, linkSlot(from, to, asfn), linkChannelOffset(from, to, asfn), 0,
               from == ctx.self ? to : from};
        if (from == ctx.self) {
            c.options = kCellTx;
            tx.push_back(c);
        } else {
            c.options = kCellRx;
            rx.push_back(c);
        }
    };
    if (ctx.parent != kNoNode) {
        link(ctx.self, ctx.parent);
        link(ctx.parent, ctx.self);
    }
    for (NodeId child : ctx.children) {
        link(child, ctx.self);
        link(ctx.self, child);
    }
    tx.insert(tx.end(), rx.begin(), rx.end());
    return tx;
}

void AliceScheduler::activeCells(const NodeContext& ctx, Asn asn, std::vector<Cell>& out)
{
    out.clear();
    commonCells(ctx, asn, out);
    const std::uint32_t len = params_.unicastLength;
    const std::uint64_t asfn = asn / len;
    const auto slot = static_cast<std::uint32_t>(asn % len);

    auto link = [&](NodeId from, NodeId to) {
        if (linkSlot(from, to, asfn) != slot)
            return;
        const bool outgoing = from == ctx.self;
        out.push_back({kUnicastFrame, slot, linkChannelOffset(from, to, asfn),
                       static_cast<std::uint8_t>(outgoing ? kCellTx : kCellRx), outgoing ? to : from});
    };
    if (ctx.parent != kNoNode)
        link(ctx.self, ctx.parent);
    for (NodeId child : ctx.children)
        link(ctx.self, child);
    if (ctx.parent != kNoNode)
        link(ctx.parent, ctx.self);
    for (NodeId child : ctx.children)
        link(child, ctx.self);
}

}  // namespace tschsim
