#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "tschsim/frame.h"
#include "tschsim/phy.h"
#include "tschsim/rng.h"
#include "tschsim/schedule.h"
#include "tschsim/types.h"

namespace tschsim {

enum class Phase : std::uint8_t { Unjoined, Scanning, Joined };

std::string_view toString(Phase phase);

struct SyncPolicy {
    double keepalivePeriodS = 12.0;
    double desyncTimeoutS = 36.0;
    int maxRetx = 8;
    int minBackoffExponent = 1;
    int maxBackoffExponent = 7;
};

/// How a scanning node picks its next channel after each dwell.
enum class ScanOrder : std::uint8_t { Random, Cycle };

struct MacParams {
    SyncPolicy sync;
    double slotS = 0.010;
    double ebPeriodS = 4.0;
    double ebJitter = 0.10;  // relative, uniform in [-j, +j]
    double scanDwellS = 1.0;
    ScanOrder scanOrder = ScanOrder::Random;
    std::size_t queueCapacity = 16;
};

enum class DropReason : std::uint8_t {
    NotJoined,      // generated while the origin was not associated
    Flushed,        // queued when the node left the network
    QueueOverflow,
    RetryExhausted,
    NoParent,
    LoopGuard,
};

std::string_view toString(DropReason reason);

/// Hooks from the MAC into the routing layer above it.
class MacUpper {
public:
    virtual ~MacUpper() = default;
    /// Whether an EB advertising `ebRank` may be used to join.
    virtual bool macJoinAllowed(int /*ebRank*/) const { return true; }
    virtual void macJoined(NodeId ebSource, int ebRank, Asn asn) = 0;
    virtual void macLeft(Asn asn) = 0;
    /// A neighbor was heard: an EB (with its rank) or an ACK (no rank).
    virtual void macNeighborHeard(NodeId neighbor, std::optional<int> rank, Asn asn) = 0;
    /// Unicast DATA addressed to this node arrived and was ACKed.
    virtual void macDataReceived(const Frame& frame, Asn asn) = 0;
    virtual void macFrameDropped(const Frame& frame, DropReason reason) = 0;
};

struct QueuedFrame {
    Frame frame;
    int attempts = 0;  // transmissions so far
};

/// Per-neighbor FIFO with its CSMA backoff state for shared cells.
struct TxQueue {
    NodeId peer = kNoNode;
    std::deque<QueuedFrame> frames;
    int backoffExponent = 1;
    std::uint32_t backoffWindow = 0;  // shared-cell opportunities still to skip
};

struct NodeState {
    NodeId id = 0;
    bool coordinator = false;
    Phase phase = Phase::Unjoined;
    NodeId timeSource = kNoNode;
    Asn lastSyncAsn = 0;
    int rank = -1;
    std::vector<TxQueue> txQueues;  // unicast, one per neighbor
    TxQueue ebQueue;                // broadcast EBs
    std::optional<Asn> joinAsn;     // first join only
    double bootTime = 0.0;
    Asn scanStartAsn = 0;
    Asn scanSwitchAsn = 0;        // next dwell boundary
    std::size_t scanIndex = 0;    // FHS index being scanned
    Asn nextEbAsn = 0;
    Asn lastKeepaliveAsn = 0;
};

struct MacStats {
    std::uint64_t dataTx = 0;       // DATA transmissions incl. retries
    std::uint64_t keepalivesSent = 0;
    std::uint64_t ebsSent = 0;
    std::uint64_t leaves = 0;
    std::uint64_t joins = 0;
    std::uint64_t controlOverflow = 0;  // KA/EB frames refused by a full queue
};

/// What a node does in one slot.
struct SlotPlan {
    enum class Kind : std::uint8_t { Sleep, Transmit, Listen } kind = Kind::Sleep;
    Channel channel = 0;
    const Frame* frame = nullptr;  // Transmit only
    bool scanning = false;         // Listen only: accept EBs only
    Cell cell{};                   // executed cell when joined
};

/// TSCH MAC of one node: scanning/joining, slot execution, retransmission,
/// keep-alives and desynchronization.
class TschMac {
public:
    TschMac(NodeId id, const MacParams& params, const Fhs& fhs, Scheduler& scheduler, RngStream& rng,
            MacUpper& upper);

    /// Powers the node on. The coordinator is JOINED with rank 0 at once.
    void boot(Asn asn, bool coordinator, double bootTime = 0.0);

    /// Keep-alive and desync bookkeeping plus EB generation; run at the top
    /// of every slot before planning.
    void housekeeping(Asn asn);
    void syncMaintenance(Asn asn);
    void generateEb(Asn asn);

    /// Chooses the slot action. `ctx` supplies routing links for the
    /// scheduler; ignored while scanning.
    SlotPlan planSlot(Asn asn, const NodeContext& ctx);

    /// Result of this slot's transmission: `acked` for unicast frames.
    void transmitDone(Asn asn, bool acked);

    /// A frame was delivered to this node while it listened.
    /// Returns true when the frame is a unicast addressed here and is ACKed.
    bool receive(const Frame& frame, Asn asn, bool scanning);

    /// Queues `frame` toward `nextHop`; false if the queue is full.
    bool enqueue(const Frame& frame, NodeId nextHop);

    /// Makes `ts` the time source and moves queued DATA from `oldPeer` to it.
    void setTimeSource(NodeId ts, NodeId oldPeer);
    void setRank(int rank) { state_.rank = rank; }
    /// Counts a frame heard from the time source at `asn` as a sync point.
    void refreshSync(Asn asn) { state_.lastSyncAsn = std::max(state_.lastSyncAsn, asn); }

    /// Drops synchronization: back to SCANNING, queues flushed.
    void leave(Asn asn);

    const NodeState& state() const { return state_; }
    const MacStats& stats() const { return stats_; }
    Phase phase() const { return state_.phase; }
    bool joined() const { return state_.phase == Phase::Joined; }
    std::size_t queuedFrames() const;
    /// Frames currently queued, for end-of-run accounting.
    std::vector<Frame> pendingFrames() const;

    /// Channel a scanning node listens on; moves to a new channel at each
    /// dwell boundary.
    Channel scanChannel(Asn asn);

    /// Retry bookkeeping after a missing ACK. Returns true if the frame was
    /// dropped (retry limit reached).
    bool ackMissing(TxQueue& queue, bool sharedCell);

private:
    TxQueue* queueFor(NodeId peer);
    TxQueue& queueForInsert(NodeId peer);
    Asn jitteredEbPeriod();

    NodeState state_;
    MacParams params_;
    const Fhs& fhs_;
    Scheduler& scheduler_;
    RngStream& rng_;
    MacUpper& upper_;
    MacStats stats_;

    Asn keepaliveSlots_;
    Asn desyncSlots_;
    Asn dwellSlots_;

    std::vector<Cell> cells_;
    bool pendingTx_ = false;
    NodeId pendingPeer_ = kNoNode;  // kBroadcast for the EB queue
    bool pendingShared_ = false;
};

}  // namespace tschsim
