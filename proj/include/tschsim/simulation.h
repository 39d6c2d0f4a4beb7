#pragma once

#include <cstdint>
#include <memory>
#include <ostream>
#include <vector>

#include "tschsim/clock.h"
#include "tschsim/mac.h"
#include "tschsim/metrics.h"
#include "tschsim/mobility.h"
#include "tschsim/netstack.h"
#include "tschsim/phy.h"
#include "tschsim/rng.h"
#include "tschsim/schedule.h"

namespace tschsim {

/// Everything one run needs besides the mobility traces.
struct SimConfig {
    double slotS = 0.010;
    double durationS = 4 * 3600.0;
    double rangeM = 450.0;
    double linkLoss = 0.0;  // per-delivery loss probability inside range
    Fhs fhs;
    MacParams mac;
    NetParams net;
    SchedulerKind scheduler = SchedulerKind::Orchestra;
    SchedulerParams schedulerParams;
    std::uint64_t seed = 1;
};

/// Slot-synchronous engine. Node i follows traces[i]; node 0 is the
/// coordinator. Within a slot every phase walks the nodes in id order.
class Simulation {
public:
    Simulation(const SimConfig& config, std::vector<MobilityTrace> traces);
    ~Simulation();

    Simulation(const Simulation&) = delete;
    Simulation& operator=(const Simulation&) = delete;

    /// Per-slot event lines `asn,node,event,detail`; nullptr disables.
    void setEventLog(std::ostream* log) { log_ = log; }

    void step();
    void run();
    bool finished() const { return clock_.finished(); }

    /// Closes the packet books (frames still queued) and builds per-node
    /// results. Call once, after the run.
    std::vector<NodeResult> finish();

    std::size_t size() const { return nodes_.size(); }
    Asn asn() const { return clock_.asn(); }
    const SimClock& clock() const { return clock_; }
    const TschMac& mac(NodeId id) const { return *nodes_.at(id).mac; }
    const Netstack& net(NodeId id) const { return *nodes_.at(id).net; }
    Scheduler& scheduler() { return *scheduler_; }
    const PacketLedger& ledger() const { return ledger_; }
    std::uint64_t downSlots(NodeId id) const { return nodes_.at(id).downSlots; }
    /// Running hash of every transmission, reception, join and leave.
    std::uint64_t eventDigest() const { return digest_; }
    /// Counts a node that transmitted while not joined; must stay zero.
    std::uint64_t unjoinedTransmissions() const { return unjoinedTx_; }

private:
    struct Node {
        std::unique_ptr<RngStream> macRng;
        std::unique_ptr<RngStream> linkRng;
        std::unique_ptr<Netstack> net;
        std::unique_ptr<TschMac> mac;
        TraceCursor cursor{nullptr};
        std::vector<NodeId> children;
        std::uint64_t downSlots = 0;
        Phase lastPhase = Phase::Unjoined;
        SlotPlan plan;
    };

    void refreshChildren();
    void event(Asn asn, NodeId node, const char* what, std::uint64_t a, std::uint64_t b);

    SimConfig config_;
    SimClock clock_;
    std::vector<MobilityTrace> traces_;
    std::unique_ptr<Scheduler> scheduler_;
    PacketLedger ledger_;
    std::vector<Node> nodes_;
    std::uint64_t routingVersion_ = ~0ULL;

    std::vector<TxAttempt> attempts_;
    std::vector<Frame> frames_;
    std::vector<Listener> listeners_;
    std::vector<RxOutcome> outcomes_;
    std::vector<Position> positions_;
    std::vector<char> acked_;

    std::ostream* log_ = nullptr;
    std::uint64_t digest_ = 0xcbf29ce484222325ULL;
    std::uint64_t unjoinedTx_ = 0;
    bool finished_ = false;
};

}  // namespace tschsim
