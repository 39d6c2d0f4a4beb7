#include "tschsim/netstack.h"

#include <cmath>
#include <limits>

namespace tschsim {

namespace {

Asn toSlots(double seconds, double slotS)
{
    return static_cast<Asn>(std::llround(seconds / slotS));
}

}  // namespace

Netstack::Netstack(NodeId id, bool coordinator, const NetParams& params, PacketLedger& ledger,
                   Scheduler& scheduler)
    : id_(id), coordinator_(coordinator), params_(params), ledger_(ledger), scheduler_(scheduler)
{
    trafficPeriod_ = std::max<Asn>(1, toSlots(params.trafficPeriodS, params.slotS));
    nextTrafficAsn_ = coordinator ? std::numeric_limits<Asn>::max()
                                  : toSlots(params.trafficPhaseStepS * id, params.slotS);
    freshnessSlots_ = toSlots(params.parentFreshnessS, params.slotS);
    secondSlots_ = std::max<Asn>(1, toSlots(1.0, params.slotS));
    if (coordinator)
        routing_.rank = 0;
}

void Netstack::tick(Asn asn)
{
    generateTraffic(asn);
    if (!coordinator_ && asn % secondSlots_ == id_ % secondSlots_)
        selectParent(asn);
}

bool Netstack::generateTraffic(Asn asn)
{
    if (asn < nextTrafficAsn_)
        return false;
    nextTrafficAsn_ += trafficPeriod_;
    const AppPacketId pkt{id_, seq_++};
    ledger_.generated(id_);
    if (!mac_->joined()) {
        ledger_.dropped(id_, DropReason::NotJoined);
        return true;
    }
    if (routing_.parent == kNoNode) {
        ledger_.dropped(id_, DropReason::NoParent);
        return true;
    }
    Frame f{FrameKind::Data, id_, routing_.parent};
    f.payload = pkt;
    if (!mac_->enqueue(f, routing_.parent))
        ledger_.dropped(id_, DropReason::QueueOverflow);
    return true;
}

void Netstack::forward(Frame frame, Asn /*asn*/)
{
    if (frame.hops + 1 > params_.hopLimit) {
        ledger_.dropped(frame, DropReason::LoopGuard);
        return;
    }
    if (routing_.parent == kNoNode) {
        ledger_.dropped(frame, DropReason::NoParent);
        return;
    }
    ++frame.hops;
    frame.src = id_;
    if (!mac_->enqueue(frame, routing_.parent))
        ledger_.dropped(frame, DropReason::QueueOverflow);
}

NeighborEntry* Netstack::neighbor(NodeId id)
{
    for (auto& n : routing_.neighbors)
        if (n.id == id)
            return &n;
    return nullptr;
}

void Netstack::setParent(NodeId parent, int parentRank, Asn /*asn*/)
{
    const NodeId old = routing_.parent;
    routing_.parent = parent;
    routing_.rank = parentRank + 1;
    mac_->setRank(routing_.rank);
    if (old != parent) {
        mac_->setTimeSource(parent, old);
        if (const NeighborEntry* n = neighbor(parent))
            mac_->refreshSync(n->lastHeard);
        scheduler_.parentChanged(id_, old, parent);
        ++version_;
    }
}

void Netstack::detach(Asn asn)
{
    // macLeft() resets the routing state.
    if (mac_->joined())
        mac_->leave(asn);
}

void Netstack::selectParent(Asn asn)
{
    if (coordinator_ || !mac_->joined())
        return;
    const NeighborEntry* best = nullptr;
    for (const auto& n : routing_.neighbors) {
        if (!n.rank || asn - n.lastHeard > freshnessSlots_)
            continue;
        if (!best || *n.rank < *best->rank || (*n.rank == *best->rank && n.id < best->id))
            best = &n;
    }
    // Nothing fresh: keep the current parent and let desync decide.
    if (!best)
        return;
    if (*best->rank + 1 > params_.maxRank) {
        detach(asn);
        return;
    }
    if (best->id != routing_.parent || *best->rank + 1 != routing_.rank)
        setParent(best->id, *best->rank, asn);
}

bool Netstack::macJoinAllowed(int ebRank) const
{
    return ebRank >= 0 && ebRank + 1 <= params_.maxRank;
}

void Netstack::macJoined(NodeId ebSource, int ebRank, Asn asn)
{
    routing_.neighbors.clear();
    routing_.neighbors.push_back({ebSource, asn, ebRank});
    setParent(ebSource, ebRank, asn);
}

void Netstack::macLeft(Asn /*asn*/)
{
    const NodeId old = routing_.parent;
    routing_.parent = kNoNode;
    routing_.rank = -1;
    routing_.neighbors.clear();
    if (old != kNoNode) {
        scheduler_.parentChanged(id_, old, kNoNode);
        ++version_;
    }
}

void Netstack::macNeighborHeard(NodeId id, std::optional<int> rank, Asn asn)
{
    NeighborEntry* n = neighbor(id);
    if (!n) {
        routing_.neighbors.push_back({id, asn, rank});
        n = &routing_.neighbors.back();
    }
    n->lastHeard = asn;
    if (rank)
        n->rank = rank;
    if (rank && !coordinator_)
        selectParent(asn);
}

void Netstack::macDataReceived(const Frame& frame, Asn asn)
{
    if (coordinator_) {
        if (frame.payload)
            ledger_.delivered(*frame.payload);
        return;
    }
    forward(frame, asn);
}

void Netstack::macFrameDropped(const Frame& frame, DropReason reason)
{
    ledger_.dropped(frame, reason);
}

}  // namespace tschsim
