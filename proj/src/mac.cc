#include "tschsim/mac.h"

#include <algorithm>
#include <cmath>

namespace tschsim {

std::string_view toString(Phase phase)
{
    switch (phase) {
    case Phase::Unjoined: return "UNJOINED";
    case Phase::Scanning: return "SCANNING";
    case Phase::Joined: return "JOINED";
    }
    return "?";
}

std::string_view toString(DropReason reason)
{
    switch (reason) {
    case DropReason::NotJoined: return "not_joined";
    case DropReason::Flushed: return "flushed";
    case DropReason::QueueOverflow: return "queue_overflow";
    case DropReason::RetryExhausted: return "retry_exhausted";
    case DropReason::NoParent: return "no_parent";
    case DropReason::LoopGuard: return "loop_guard";
    }
    return "?";
}

namespace {

Asn toSlots(double seconds, double slotS)
{
    return static_cast<Asn>(std::llround(seconds / slotS));
}

}  // namespace

TschMac::TschMac(NodeId id, const MacParams& params, const Fhs& fhs, Scheduler& scheduler,
                 RngStream& rng, MacUpper& upper)
    : params_(params), fhs_(fhs), scheduler_(scheduler), rng_(rng), upper_(upper)
{
    if (!(params.sync.desyncTimeoutS > params.sync.keepalivePeriodS))
        throw std::invalid_argument("desync timeout must exceed the keep-alive period");
    state_.id = id;
    state_.ebQueue.peer = kBroadcast;
    keepaliveSlots_ = toSlots(params.sync.keepalivePeriodS, params.slotS);
    desyncSlots_ = toSlots(params.sync.desyncTimeoutS, params.slotS);
    dwellSlots_ = std::max<Asn>(1, toSlots(params.scanDwellS, params.slotS));
    cells_.reserve(16);
}

void TschMac::boot(Asn asn, bool coordinator, double bootTime)
{
    state_.coordinator = coordinator;
    state_.bootTime = bootTime;
    if (coordinator) {
        state_.phase = Phase::Joined;
        state_.rank = 0;
        state_.joinAsn = asn;
        state_.lastSyncAsn = asn;
        state_.nextEbAsn = asn;
        ++stats_.joins;
    } else {
        state_.phase = Phase::Scanning;
        state_.scanStartAsn = asn;
        state_.scanSwitchAsn = asn;
    }
}

Asn TschMac::jitteredEbPeriod()
{
    const double j = params_.ebJitter;
    const double period = params_.ebPeriodS * (1.0 + rng_.uniform(-j, j));
    return std::max<Asn>(1, toSlots(period, params_.slotS));
}

void TschMac::housekeeping(Asn asn)
{
    syncMaintenance(asn);
    generateEb(asn);
}

void TschMac::syncMaintenance(Asn asn)
{
    if (!joined() || state_.coordinator)
        return;
    const Asn since = asn - state_.lastSyncAsn;
    if (since >= desyncSlots_) {
        leave(asn);
        return;
    }
    if (since >= keepaliveSlots_ && asn - state_.lastKeepaliveAsn >= keepaliveSlots_ &&
        state_.timeSource != kNoNode) {
        TxQueue* q = queueFor(state_.timeSource);
        const bool pending = q && std::any_of(q->frames.begin(), q->frames.end(), [](const QueuedFrame& f) {
                                 return f.frame.kind == FrameKind::Keepalive;
                             });
        if (!pending) {
            Frame ka{FrameKind::Keepalive, state_.id, state_.timeSource};
            if (enqueue(ka, state_.timeSource))
                ++stats_.keepalivesSent;
            else
                ++stats_.controlOverflow;
        }
        state_.lastKeepaliveAsn = asn;
    }
}

void TschMac::generateEb(Asn asn)
{
    if (!joined() || asn < state_.nextEbAsn)
        return;
    if (state_.ebQueue.frames.empty())
        state_.ebQueue.frames.push_back({Frame{FrameKind::Eb, state_.id, kBroadcast, asn, state_.rank}});
    state_.nextEbAsn = asn + jitteredEbPeriod();
}

Channel TschMac::scanChannel(Asn asn)
{
    if (asn >= state_.scanSwitchAsn) {
        if (params_.scanOrder == ScanOrder::Cycle) {
            const Asn step = (asn - state_.scanStartAsn) / dwellSlots_;
            state_.scanIndex = (state_.id + step) % fhs_.size();
            state_.scanSwitchAsn = state_.scanStartAsn + (step + 1) * dwellSlots_;
        } else {
            // A fixed cycle aliases with slotframes close to the dwell
            // length (101 vs 100 slots), so pick the next channel at random.
            state_.scanIndex = rng_.uniformChoice(fhs_.size());
            state_.scanSwitchAsn = asn + dwellSlots_;
        }
    }
    return fhs_[state_.scanIndex];
}

TxQueue* TschMac::queueFor(NodeId peer)
{
    if (peer == kBroadcast)
        return &state_.ebQueue;
    for (auto& q : state_.txQueues)
        if (q.peer == peer)
            return &q;
    return nullptr;
}

TxQueue& TschMac::queueForInsert(NodeId peer)
{
    if (TxQueue* q = queueFor(peer))
        return *q;
    TxQueue q;
    q.peer = peer;
    q.backoffExponent = params_.sync.minBackoffExponent;
    state_.txQueues.push_back(std::move(q));
    return state_.txQueues.back();
}

bool TschMac::enqueue(const Frame& frame, NodeId nextHop)
{
    TxQueue& q = queueForInsert(frame.isBroadcast() ? kBroadcast : nextHop);
    if (q.frames.size() >= params_.queueCapacity)
        return false;
    Frame f = frame;
    if (!f.isBroadcast())
        f.dst = nextHop;
    q.frames.push_back({f, 0});
    return true;
}

SlotPlan TschMac::planSlot(Asn asn, const NodeContext& ctx)
{
    SlotPlan plan;
    pendingTx_ = false;
    if (state_.phase == Phase::Unjoined)
        return plan;
    if (state_.phase == Phase::Scanning) {
        plan.kind = SlotPlan::Kind::Listen;
        plan.channel = scanChannel(asn);
        plan.scanning = true;
        return plan;
    }

    scheduler_.activeCells(ctx, asn, cells_);
    std::optional<std::size_t> txIndex;
    auto canTransmit = [&](const Cell& cell) {
        const std::size_t i = static_cast<std::size_t>(&cell - cells_.data());
        if (cell.peer == kBroadcast || cell.peer == kAnyPeer) {
            if (cell.ebCapable() && !state_.ebQueue.frames.empty()) {
                txIndex = i;
                return true;
            }
            return false;
        }
        TxQueue* q = queueFor(cell.peer);
        if (!q || q->frames.empty())
            return false;
        if (cell.shared() && q->backoffWindow > 0) {
            --q->backoffWindow;
            return false;
        }
        txIndex = i;
        return true;
    };
    const auto chosen = selectCell(std::span<const Cell>(cells_), canTransmit);
    const bool transmit = chosen && txIndex == chosen;

    for (std::size_t i = 0; i < cells_.size(); ++i) {
        const Cell& c = cells_[i];
        if (c.tx() && c.peer != kBroadcast && c.peer != kAnyPeer)
            scheduler_.txCellElapsed(state_.id, c.peer, transmit && i == *chosen);
    }
    if (!chosen)
        return plan;

    const Cell& cell = cells_[*chosen];
    plan.cell = cell;
    plan.channel = channelFor(asn, cell.channelOffset, fhs_);
    if (!transmit) {
        plan.kind = SlotPlan::Kind::Listen;
        return plan;
    }

    const bool broadcast = cell.peer == kBroadcast || cell.peer == kAnyPeer;
    TxQueue& q = broadcast ? state_.ebQueue : *queueFor(cell.peer);
    QueuedFrame& head = q.frames.front();
    if (head.frame.kind == FrameKind::Eb) {
        head.frame.asnStamp = asn;
        head.frame.rank = state_.rank;
    }
    ++head.attempts;
    if (head.frame.kind == FrameKind::Data)
        ++stats_.dataTx;
    plan.kind = SlotPlan::Kind::Transmit;
    plan.frame = &head.frame;
    pendingTx_ = true;
    pendingPeer_ = broadcast ? kBroadcast : cell.peer;
    pendingShared_ = cell.shared();
    return plan;
}

bool TschMac::ackMissing(TxQueue& queue, bool sharedCell)
{
    QueuedFrame& head = queue.frames.front();
    if (head.attempts > params_.sync.maxRetx) {
        const Frame dropped = head.frame;
        queue.frames.pop_front();
        queue.backoffExponent = params_.sync.minBackoffExponent;
        queue.backoffWindow = 0;
        if (dropped.kind == FrameKind::Data)
            upper_.macFrameDropped(dropped, DropReason::RetryExhausted);
        return true;
    }
    if (sharedCell) {
        queue.backoffWindow = static_cast<std::uint32_t>(rng_.uniformChoice(1ULL << queue.backoffExponent));
        queue.backoffExponent = std::min(queue.backoffExponent + 1, params_.sync.maxBackoffExponent);
    }
    return false;
}

void TschMac::transmitDone(Asn asn, bool acked)
{
    if (!pendingTx_)
        return;
    pendingTx_ = false;
    if (pendingPeer_ == kBroadcast) {
        state_.ebQueue.frames.pop_front();
        ++stats_.ebsSent;
        return;
    }
    TxQueue* q = queueFor(pendingPeer_);
    if (!q || q->frames.empty())
        return;
    if (!acked) {
        ackMissing(*q, pendingShared_);
        return;
    }
    q->frames.pop_front();
    q->backoffExponent = params_.sync.minBackoffExponent;
    q->backoffWindow = 0;
    if (pendingPeer_ == state_.timeSource)
        state_.lastSyncAsn = asn;
    upper_.macNeighborHeard(pendingPeer_, std::nullopt, asn);
}

bool TschMac::receive(const Frame& frame, Asn asn, bool scanning)
{
    if (scanning) {
        if (frame.kind != FrameKind::Eb || state_.phase != Phase::Scanning ||
            !upper_.macJoinAllowed(frame.rank))
            return false;
        state_.phase = Phase::Joined;
        state_.timeSource = frame.src;
        state_.rank = frame.rank + 1;
        state_.lastSyncAsn = asn;
        state_.lastKeepaliveAsn = asn;
        state_.nextEbAsn = asn + jitteredEbPeriod();
        if (!state_.joinAsn)
            state_.joinAsn = asn;
        ++stats_.joins;
        upper_.macJoined(frame.src, frame.rank, asn);
        return false;
    }
    if (!joined())
        return false;
    if (frame.kind == FrameKind::Eb) {
        if (frame.src == state_.timeSource)
            state_.lastSyncAsn = asn;
        upper_.macNeighborHeard(frame.src, frame.rank, asn);
        return false;
    }
    if (!frame.needsAck() || frame.dst != state_.id)
        return false;
    if (frame.kind == FrameKind::Data)
        upper_.macDataReceived(frame, asn);
    return true;
}

void TschMac::setTimeSource(NodeId ts, NodeId oldPeer)
{
    state_.timeSource = ts;
    if (oldPeer == kNoNode || oldPeer == ts)
        return;
    auto it = std::find_if(state_.txQueues.begin(), state_.txQueues.end(),
                           [&](const TxQueue& q) { return q.peer == oldPeer; });
    if (it == state_.txQueues.end())
        return;
    std::deque<QueuedFrame> moved = std::move(it->frames);
    state_.txQueues.erase(it);
    for (const auto& qf : moved) {
        if (qf.frame.kind != FrameKind::Data)
            continue;
        if (ts == kNoNode) {
            upper_.macFrameDropped(qf.frame, DropReason::NoParent);
        } else if (!enqueue(qf.frame, ts)) {
            upper_.macFrameDropped(qf.frame, DropReason::QueueOverflow);
        }
    }
}

void TschMac::leave(Asn asn)
{
    std::vector<Frame> flushed;
    for (auto& q : state_.txQueues)
        for (auto& qf : q.frames)
            if (qf.frame.kind == FrameKind::Data)
                flushed.push_back(qf.frame);
    state_.txQueues.clear();
    state_.ebQueue.frames.clear();
    state_.ebQueue.backoffWindow = 0;
    state_.phase = Phase::Scanning;
    state_.scanStartAsn = asn;
    state_.scanSwitchAsn = asn;
    state_.timeSource = kNoNode;
    state_.rank = -1;
    pendingTx_ = false;
    ++stats_.leaves;
    for (const auto& f : flushed)
        upper_.macFrameDropped(f, DropReason::Flushed);
    upper_.macLeft(asn);
}

std::size_t TschMac::queuedFrames() const
{
    std::size_t n = state_.ebQueue.frames.size();
    for (const auto& q : state_.txQueues)
        n += q.frames.size();
    return n;
}

std::vector<Frame> TschMac::pendingFrames() const
{
    std::vector<Frame> out;
    for (const auto& q : state_.txQueues)
        for (const auto& qf : q.frames)
            out.push_back(qf.frame);
    for (const auto& qf : state_.ebQueue.frames)
        out.push_back(qf.frame);
    return out;
}

}  // namespace tschsim
