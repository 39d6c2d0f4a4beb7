#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "tschsim/mac.h"
#include "tschsim/metrics.h"
#include "tschsim/schedule.h"

namespace tschsim {

struct NetParams {
    double slotS = 0.010;
    double trafficPeriodS = 6.0;
    double trafficPhaseStepS = 0.1;  // node i first sends at i * step
    double parentFreshnessS = 30.0;
    int hopLimit = 16;
    int maxRank = 16;  // a node whose rank would exceed this detaches
};

struct NeighborEntry {
    NodeId id = kNoNode;
    Asn lastHeard = 0;
    std::optional<int> rank;
};

struct RoutingState {
    NodeId parent = kNoNode;
    int rank = -1;
    std::vector<NeighborEntry> neighbors;
};

/// Convergecast layer of one node: rank-based parent choice from overheard
/// EBs, periodic application traffic and hop-by-hop forwarding to the sink.
class Netstack : public MacUpper {
public:
    Netstack(NodeId id, bool coordinator, const NetParams& params, PacketLedger& ledger, Scheduler& scheduler);

    void attach(TschMac& mac) { mac_ = &mac; }

    /// Per-slot work: traffic generation and a once-per-second parent check.
    void tick(Asn asn);

    /// Emits the application packet due this slot, if any. Returns true when
    /// a packet was generated.
    bool generateTraffic(Asn asn);
    void selectParent(Asn asn);
    /// Sends `frame` one hop closer to the coordinator.
    void forward(Frame frame, Asn asn);

    const RoutingState& routing() const { return routing_; }
    /// Bumped on every parent change; lets the engine refresh child lists.
    std::uint64_t routingVersion() const { return version_; }
    std::uint32_t nextSeq() const { return seq_; }
    Asn nextTrafficAsn() const { return nextTrafficAsn_; }
    bool coordinator() const { return coordinator_; }

    // MacUpper
    bool macJoinAllowed(int ebRank) const override;
    void macJoined(NodeId ebSource, int ebRank, Asn asn) override;
    void macLeft(Asn asn) override;
    void macNeighborHeard(NodeId neighbor, std::optional<int> rank, Asn asn) override;
    void macDataReceived(const Frame& frame, Asn asn) override;
    void macFrameDropped(const Frame& frame, DropReason reason) override;

private:
    NeighborEntry* neighbor(NodeId id);
    void setParent(NodeId parent, int parentRank, Asn asn);
    void detach(Asn asn);

    NodeId id_;
    bool coordinator_;
    NetParams params_;
    PacketLedger& ledger_;
    Scheduler& scheduler_;
    TschMac* mac_ = nullptr;
    RoutingState routing_;
    std::uint64_t version_ = 0;
    std::uint32_t seq_ = 0;
    Asn trafficPeriod_;
    Asn nextTrafficAsn_;
    Asn freshnessSlots_;
    Asn secondSlots_;
};

}  // namespace tschsim
