#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tschsim/rng.h"
#include "tschsim/types.h"

namespace tschsim {

enum CellOption : std::uint8_t {
    kCellTx = 1,
    kCellRx = 2,
    kCellShared = 4,
    kCellEb = 8,  // may carry enhanced beacons
};

std::string cellOptionString(std::uint8_t options);

struct Cell {
    std::uint8_t slotframe = 0;  // index into the scheduler's slotframe list
    std::uint32_t slotOffset = 0;
    std::uint32_t channelOffset = 0;
    std::uint8_t options = 0;
    NodeId peer = kAnyPeer;  // node id, kBroadcast or kAnyPeer

    bool tx() const { return options & kCellTx; }
    bool rx() const { return options & kCellRx; }
    bool shared() const { return options & kCellShared; }
    bool ebCapable() const { return options & kCellEb; }

    friend bool operator==(const Cell&, const Cell&) = default;
};

struct SlotframeSpec {
    std::string name;
    std::uint32_t length;
    int priority;  // lower number wins when slotframes overlap
};

/// What a scheduler may know about a node: its identity and routing links.
struct NodeContext {
    NodeId self = 0;
    NodeId timeSource = kNoNode;
    NodeId parent = kNoNode;
    std::span<const NodeId> children;
};

enum class SchedulerKind { Orchestra, Alice, Msf };

std::string_view toString(SchedulerKind kind);
std::optional<SchedulerKind> parseSchedulerKind(std::string_view name);

struct SchedulerParams {
    std::uint32_t ebLength = 397;
    std::uint32_t broadcastLength = 31;
    std::uint32_t unicastLength = 17;
    std::uint32_t channelOffsets = 4;
    // MSF-lite
    std::uint32_t msfLength = 101;
    std::uint32_t msfWindow = 64;
    double msfHighUsage = 0.75;
    double msfLowUsage = 0.25;
    std::uint32_t msfMaxCells = 8;
};

class Scheduler {
public:
    virtual ~Scheduler() = default;

    virtual SchedulerKind kind() const = 0;
    virtual const std::vector<SlotframeSpec>& slotframes() const = 0;

    /// Cells active for `ctx.self` in slot `asn`, highest priority first.
    /// Within one slotframe, transmit-capable cells precede receive-only ones.
    virtual void activeCells(const NodeContext& ctx, Asn asn, std::vector<Cell>& out) = 0;

    std::vector<Cell> activeCells(const NodeContext& ctx, Asn asn)
    {
        std::vector<Cell> out;
        activeCells(ctx, asn, out);
        return out;
    }

    /// One scheduled Tx-cell instance toward `peer` elapsed; `used` when a
    /// frame went out in it.
    virtual void txCellElapsed(NodeId /*self*/, NodeId /*peer*/, bool /*used*/) {}

    /// Routing parent changed (kNoNode when the node lost it).
    virtual void parentChanged(NodeId /*self*/, NodeId /*oldParent*/, NodeId /*newParent*/) {}
};

/// Orchestra's node hash: H(x) = x mod length.
inline std::uint32_t nodeHash(NodeId id, std::uint32_t length) { return id % length; }

/// 64-bit avalanche mix (SplitMix64 finalizer).
std::uint64_t mix64(std::uint64_t z);

/// ALICE's link hash for directed link (from -> to) at slotframe number
/// `asfn`; `salt` separates the slot hash (0) from the channel hash (1).
std::uint64_t linkHash(NodeId from, NodeId to, std::uint64_t asfn, std::uint64_t salt);

/// Receiver-based Orchestra: EB, broadcast and unicast slotframes.
class OrchestraScheduler : public Scheduler {
public:
    explicit OrchestraScheduler(SchedulerParams params = {});

    SchedulerKind kind() const override { return SchedulerKind::Orchestra; }
    const std::vector<SlotframeSpec>& slotframes() const override { return slotframes_; }
    void activeCells(const NodeContext& ctx, Asn asn, std::vector<Cell>& out) override;
    using Scheduler::activeCells;

    /// Unicast-slotframe cells of a node, independent of ASN.
    std::vector<Cell> unicastCells(const NodeContext& ctx) const;

protected:
    /// EB and broadcast cells shared with ALICE.
    void commonCells(const NodeContext& ctx, Asn asn, std::vector<Cell>& out) const;

    SchedulerParams params_;
    std::vector<SlotframeSpec> slotframes_;
};

/// ALICE: Orchestra's EB/broadcast slotframes plus per-directed-link unicast
/// cells re-hashed every unicast slotframe.
class AliceScheduler : public OrchestraScheduler {
public:
    explicit AliceScheduler(SchedulerParams params = {});

    SchedulerKind kind() const override { return SchedulerKind::Alice; }
    void activeCells(const NodeContext& ctx, Asn asn, std::vector<Cell>& out) override;
    using Scheduler::activeCells;

    /// Link cells of the node for slotframe number `asfn`.
    std::vector<Cell> linkCells(const NodeContext& ctx, std::uint64_t asfn) const;

    std::uint32_t linkSlot(NodeId from, NodeId to, std::uint64_t asfn) const;
    std::uint32_t linkChannelOffset(NodeId from, NodeId to, std::uint64_t asfn) const;
};

/// Negotiated MSF cell, installed on both ends at once (no 6P on air).
struct MsfCell {
    NodeId owner;  // transmitting side
    NodeId peer;   // receiving side
    std::uint32_t slotOffset;
    std::uint32_t channelOffset;
};

struct MsfCounters {
    std::uint64_t added = 0;
    std::uint64_t deleted = 0;
    std::uint64_t addRejected = 0;  // no free slot or at the cell cap
};

/// MSF-lite: one slotframe with a shared minimal cell at slot 0, an
/// autonomous Rx cell per node, an autonomous Tx cell toward the parent and
/// usage-driven negotiated Tx cells.
class MsfScheduler : public Scheduler {
public:
    MsfScheduler(SchedulerParams params, std::uint64_t seed);

    SchedulerKind kind() const override { return SchedulerKind::Msf; }
    const std::vector<SlotframeSpec>& slotframes() const override { return slotframes_; }
    void activeCells(const NodeContext& ctx, Asn asn, std::vector<Cell>& out) override;
    using Scheduler::activeCells;
    void txCellElapsed(NodeId self, NodeId peer, bool used) override;
    void parentChanged(NodeId self, NodeId oldParent, NodeId newParent) override;

    std::uint32_t autonomousSlot(NodeId id) const;
    std::uint32_t autonomousChannelOffset(NodeId id) const;

    /// Tx cells (autonomous + negotiated) `self` holds toward `peer`, given
    /// that `peer` is its parent.
    std::uint32_t txCellCount(NodeId self, NodeId peer) const;
    const std::vector<MsfCell>& negotiatedCells() const { return negotiated_; }
    const MsfCounters& counters() const { return counters_; }

    /// Applies the window decision for (self -> peer) immediately: add when
    /// usage >= high threshold, delete when <= low threshold with > 1 cell.
    /// Returns +1, -1 or 0.
    int adapt(NodeId self, NodeId peer, std::uint32_t used, std::uint32_t elapsed);

private:
    struct Monitor {
        NodeId self;
        NodeId peer;
        std::uint32_t elapsed = 0;
        std::uint32_t used = 0;
    };

    Monitor& monitor(NodeId self, NodeId peer);
    RngStream& rng(NodeId self);
    bool addCell(NodeId self, NodeId peer);
    bool deleteCell(NodeId self, NodeId peer);
    void removeLinkCells(NodeId a, NodeId b);

    SchedulerParams params_;
    std::uint64_t seed_;
    std::vector<SlotframeSpec> slotframes_;
    std::vector<MsfCell> negotiated_;
    std::vector<Monitor> monitors_;
    std::vector<std::pair<NodeId, RngStream>> rngs_;
    MsfCounters counters_;
};

std::unique_ptr<Scheduler> makeScheduler(SchedulerKind kind, const SchedulerParams& params,
                                         std::uint64_t seed);

/// Index of the cell the MAC executes: the first Tx cell for which
/// `canTransmit(cell)` holds, or the first Rx cell reached before that.
/// nullopt means sleep.
template <typename Pred>
std::optional<std::size_t> selectCell(std::span<const Cell> cells, Pred&& canTransmit)
{
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (cells[i].tx() && canTransmit(cells[i]))
            return i;
        if (cells[i].rx())
            return i;
    }
    return std::nullopt;
}

}  // namespace tschsim
