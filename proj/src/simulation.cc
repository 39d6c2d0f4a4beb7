#include "tschsim/simulation.h"

#include <stdexcept>
#include <string>

namespace tschsim {

namespace {

std::string peerName(NodeId id)
{
    if (id == kBroadcast)
        return "bcast";
    if (id == kNoNode)
        return "none";
    return std::to_string(id);
}

}  // namespace

Simulation::Simulation(const SimConfig& config, std::vector<MobilityTrace> traces)
    : config_(config),
      clock_(config.slotS, config.durationS),
      traces_(std::move(traces)),
      scheduler_(makeScheduler(config.scheduler, config.schedulerParams, config.seed)),
      ledger_(traces_.size())
{
    if (traces_.empty())
        throw std::invalid_argument("a run needs at least the coordinator");
    for (std::size_t i = 0; i < traces_.size(); ++i) {
        if (traces_[i].waypoints.empty())
            throw std::invalid_argument("empty mobility trace for node " + std::to_string(i));
        if (traces_[i].duration() + 1e-9 < config.durationS)
            throw std::invalid_argument("mobility trace of node " + std::to_string(i) +
                                        " ends before the run");
    }

    config_.mac.slotS = config.slotS;
    config_.net.slotS = config.slotS;
    nodes_.resize(traces_.size());
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const auto id = static_cast<NodeId>(i);
        Node& n = nodes_[i];
        n.macRng = std::make_unique<RngStream>(config.seed, StreamId{StreamTag::Mac, id});
        n.linkRng = std::make_unique<RngStream>(config.seed, StreamId{StreamTag::Link, id});
        n.net = std::make_unique<Netstack>(id, id == kCoordinator, config_.net, ledger_, *scheduler_);
        n.mac = std::make_unique<TschMac>(id, config_.mac, config_.fhs, *scheduler_, *n.macRng, *n.net);
        n.net->attach(*n.mac);
        n.cursor = TraceCursor(&traces_[i]);
    }
    for (std::size_t i = 0; i < nodes_.size(); ++i)
        nodes_[i].mac->boot(0, i == kCoordinator);

    attempts_.reserve(nodes_.size());
    frames_.reserve(nodes_.size());
    listeners_.reserve(nodes_.size());
    positions_.resize(nodes_.size());
    acked_.resize(nodes_.size());
}

Simulation::~Simulation() = default;

void Simulation::event(Asn asn, NodeId node, const char* what, std::uint64_t a, std::uint64_t b)
{
    // FNV-1a over the event tuple, one 64-bit word at a time.
    for (std::uint64_t w : {asn, std::uint64_t{node}, std::uint64_t(what[0]) << 8 | std::uint64_t(what[1]), a, b}) {
        for (int i = 0; i < 8; ++i) {
            digest_ ^= (w >> (8 * i)) & 0xff;
            digest_ *= 0x100000001b3ULL;
        }
    }
}

void Simulation::refreshChildren()
{
    std::uint64_t version = 0;
    for (const auto& n : nodes_)
        version = version * 1000003ULL + n.net->routingVersion();
    if (version == routingVersion_)
        return;
    routingVersion_ = version;
    for (auto& n : nodes_)
        n.children.clear();
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const NodeId p = nodes_[i].net->routing().parent;
        if (p < nodes_.size())
            nodes_[p].children.push_back(static_cast<NodeId>(i));
    }
}

void Simulation::step()
{
    if (finished_)
        throw std::logic_error("simulation already finished");
    const Asn asn = clock_.asn();
    const std::size_t count = nodes_.size();

    for (auto& n : nodes_) {
        n.net->tick(asn);
        n.mac->housekeeping(asn);
    }
    for (std::size_t i = 0; i < count; ++i) {
        Node& n = nodes_[i];
        const Phase phase = n.mac->phase();
        if (phase != Phase::Joined)
            ++n.downSlots;
        if (phase != n.lastPhase && n.lastPhase == Phase::Joined) {
            event(asn, static_cast<NodeId>(i), "leave", 0, 0);
            if (log_)
                *log_ << asn << ',' << i << ",leave,\n";
        }
        n.lastPhase = phase;
    }

    refreshChildren();
    attempts_.clear();
    frames_.clear();
    listeners_.clear();
    for (std::size_t i = 0; i < count; ++i) {
        Node& n = nodes_[i];
        const auto id = static_cast<NodeId>(i);
        const RoutingState& r = n.net->routing();
        const NodeContext ctx{id, n.mac->state().timeSource, r.parent, n.children};
        n.plan = n.mac->planSlot(asn, ctx);
        acked_[i] = 0;
        if (n.plan.kind == SlotPlan::Kind::Transmit) {
            if (!n.mac->joined())
                ++unjoinedTx_;
            frames_.push_back(*n.plan.frame);
            attempts_.push_back({id, n.plan.channel, &frames_.back()});
            const Frame& f = frames_.back();
            event(asn, id, "tx", static_cast<std::uint64_t>(f.kind), f.dst);
            if (log_)
                *log_ << asn << ',' << id << ",tx," << toString(f.kind) << " dst=" << peerName(f.dst)
                      << " ch=" << n.plan.channel << '\n';
        } else if (n.plan.kind == SlotPlan::Kind::Listen) {
            listeners_.push_back({id, n.plan.channel});
        }
    }

    if (!attempts_.empty() && !listeners_.empty()) {
        const double t = clock_.timeOf(asn);
        for (const auto& a : attempts_)
            positions_[a.sender] = nodes_[a.sender].cursor.at(t);
        for (const auto& l : listeners_)
            positions_[l.node] = nodes_[l.node].cursor.at(t);
        arbitrateSlot(attempts_, listeners_, positions_, config_.rangeM, outcomes_);

        for (const auto& o : outcomes_) {
            if (o.result == RxResult::Idle)
                continue;
            Node& n = nodes_[o.receiver];
            if (o.result == RxResult::Collision) {
                event(asn, o.receiver, "collision", static_cast<std::uint64_t>(n.plan.channel), 0);
                if (log_)
                    *log_ << asn << ',' << o.receiver << ",collision,ch=" << n.plan.channel << '\n';
                continue;
            }
            if (config_.linkLoss > 0.0 && n.linkRng->uniform01() < config_.linkLoss)
                continue;
            const Frame frame = *o.delivered->frame;
            const bool wasJoined = n.mac->joined();
            event(asn, o.receiver, "rx", static_cast<std::uint64_t>(frame.kind), frame.src);
            if (log_)
                *log_ << asn << ',' << o.receiver << ",rx," << toString(frame.kind) << " src=" << frame.src << '\n';
            const bool ack = n.mac->receive(frame, asn, n.plan.scanning);
            if (ack)
                acked_[o.delivered->sender] = 1;
            if (!wasJoined && n.mac->joined()) {
                event(asn, o.receiver, "join", frame.src, static_cast<std::uint64_t>(frame.rank));
                if (log_)
                    *log_ << asn << ',' << o.receiver << ",join,ts=" << frame.src
                          << " rank=" << n.mac->state().rank << '\n';
                n.lastPhase = Phase::Joined;
            }
        }
    }

    for (const auto& a : attempts_)
        nodes_[a.sender].mac->transmitDone(asn, acked_[a.sender] != 0);

    clock_.advance();
}

void Simulation::run()
{
    while (!clock_.finished())
        step();
}

std::vector<NodeResult> Simulation::finish()
{
    if (finished_)
        throw std::logic_error("simulation already finished");
    finished_ = true;
    for (const auto& n : nodes_)
        for (const Frame& f : n.mac->pendingFrames())
            ledger_.stillQueued(f);

    const Asn total = clock_.asn();
    std::vector<NodeResult> out;
    out.reserve(nodes_.size());
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const Node& n = nodes_[i];
        NodeResult r;
        r.node = static_cast<NodeId>(i);
        r.coordinator = i == kCoordinator;
        r.packets = ledger_.origin(r.node);
        r.generated = r.packets.generated;
        r.delivered = r.packets.delivered;
        r.txAttempts = n.mac->stats().dataTx;
        r.prr = prr(r.generated, r.delivered);
        r.prrUndefined = r.generated == 0;
        r.downtimeFraction = downtimeFraction(n.downSlots, total);
        r.joinTimeS = initialJoinTime(n.mac->state().joinAsn, config_.slotS, n.mac->state().bootTime);
        r.mac = n.mac->stats();
        out.push_back(r);
    }
    return out;
}

}  // namespace tschsim
