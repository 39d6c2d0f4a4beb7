#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <vector>

#include "tschsim/netstack.h"

using namespace tschsim;

namespace {

class NullScheduler : public Scheduler {
public:
    SchedulerKind kind() const override { return SchedulerKind::Orchestra; }
    const std::vector<SlotframeSpec>& slotframes() const override { return frames_; }
    void activeCells(const NodeContext&, Asn, std::vector<Cell>& out) override { out.clear(); }
    using Scheduler::activeCells;
    void parentChanged(NodeId self, NodeId oldParent, NodeId newParent) override
    {
        changes.push_back({self, oldParent, newParent});
    }

    struct Change {
        NodeId self, oldParent, newParent;
    };
    std::vector<Change> changes;
    std::vector<SlotframeSpec> frames_{{"none", 1, 0}};
};

// Node `id` with its own MAC, stack and a 6-node ledger.
struct Node {
    explicit Node(NodeId id, NetParams params = {})
        : ledger(6),
          rng(1, {StreamTag::Mac, id}),
          net(id, id == 0, params, ledger, sched),
          mac(id, MacParams{}, fhs, sched, rng, net)
    {
        net.attach(mac);
        mac.boot(0, id == 0);
    }

    void joinVia(NodeId src, int rank, Asn asn)
    {
        mac.receive(Frame{FrameKind::Eb, src, kBroadcast, asn, rank}, asn, true);
    }

    Fhs fhs;
    NullScheduler sched;
    PacketLedger ledger;
    RngStream rng;
    Netstack net;
    TschMac mac;
};

Frame dataFrom(NodeId origin, std::uint32_t seq, int hops)
{
    Frame f{FrameKind::Data, origin, 1};
    f.payload = AppPacketId{origin, seq};
    f.hops = hops;
    return f;
}

}  // namespace

TEST_CASE("a 4 h run generates exactly 2400 packets per node")
{
    for (NodeId id : {1u, 2u, 4u}) {
        Node n(id);
        std::vector<Asn> when;
        for (Asn asn = 0; asn < 1'440'000; ++asn)
            if (n.net.generateTraffic(asn))
                when.push_back(asn);
        CHECK(when.size() == 2400);
        CHECK(n.ledger.origin(id).generated == 2400);
        CHECK(when.front() == id * 10);  // phase offset id x 100 ms
        CHECK(when[1] - when[0] == 600);
    }
}

TEST_CASE("the coordinator generates nothing")
{
    Node n(0);
    for (Asn asn = 0; asn < 100'000; ++asn)
        CHECK_FALSE(n.net.generateTraffic(asn));
}

TEST_CASE("a packet generated while not joined is counted and dropped")
{
    Node n(1);
    CHECK(n.net.generateTraffic(10));
    CHECK(n.ledger.origin(1).generated == 1);
    CHECK(n.ledger.origin(1).droppedFor(DropReason::NotJoined) == 1);
    CHECK(n.mac.queuedFrames() == 0);
    CHECK(n.ledger.balanced(1));
}

TEST_CASE("a joined node queues its packet toward the parent")
{
    Node n(1);
    n.joinVia(0, 0, 5);
    CHECK(n.net.routing().parent == 0);
    CHECK(n.net.routing().rank == 1);
    n.net.generateTraffic(10);
    const auto pending = n.mac.pendingFrames();
    REQUIRE(pending.size() == 1);
    CHECK(pending[0].dst == 0);
    CHECK(pending[0].payload->origin == 1);
}

TEST_CASE("parent is the minimum-rank fresh neighbor, ties to the lower id")
{
    Node n(5);
    n.joinVia(3, 2, 100);
    CHECK(n.net.routing().parent == 3);
    CHECK(n.net.routing().rank == 3);
    n.net.macNeighborHeard(4, 1, 200);
    CHECK(n.net.routing().parent == 4);
    CHECK(n.net.routing().rank == 2);
    n.net.macNeighborHeard(2, 1, 300);
    CHECK(n.net.routing().parent == 2);  // same rank, lower id
    n.net.macNeighborHeard(1, 3, 400);
    CHECK(n.net.routing().parent == 2);
    CHECK(n.mac.state().timeSource == 2);
    CHECK(n.mac.state().rank == 2);
}

TEST_CASE("neighbors silent for more than 30 s are not eligible")
{
    Node n(5);
    n.joinVia(1, 1, 0);
    n.net.macNeighborHeard(2, 2, 3000);
    CHECK(n.net.routing().parent == 1);  // parent heard 3000 slots ago, still fresh
    n.net.macNeighborHeard(2, 2, 3001);
    CHECK(n.net.routing().parent == 2);  // 30.01 s since node 1
    CHECK(n.net.routing().rank == 3);
}

TEST_CASE("nothing fresh keeps the current parent")
{
    Node n(5);
    n.joinVia(1, 1, 0);
    n.net.selectParent(10'000);
    CHECK(n.net.routing().parent == 1);
}

TEST_CASE("a parent switch counts the new parent's last frame as a sync point")
{
    Node n(5);
    n.joinVia(1, 1, 0);
    n.net.macNeighborHeard(2, 0, 2500);
    CHECK(n.net.routing().parent == 2);
    CHECK(n.mac.state().lastSyncAsn == 2500);
}

TEST_CASE("parent changes reach the scheduler and bump the routing version")
{
    Node n(5);
    const auto v0 = n.net.routingVersion();
    n.joinVia(1, 1, 0);
    n.net.macNeighborHeard(2, 0, 10);
    REQUIRE(n.sched.changes.size() == 2);
    CHECK(n.sched.changes[1].oldParent == 1);
    CHECK(n.sched.changes[1].newParent == 2);
    CHECK(n.net.routingVersion() == v0 + 2);
    n.mac.leave(20);
    CHECK(n.net.routing().parent == kNoNode);
    CHECK(n.sched.changes.back().newParent == kNoNode);
}

TEST_CASE("forwarding enqueues toward the parent and counts the hop")
{
    Node n(2);
    n.joinVia(1, 1, 0);
    n.net.forward(dataFrom(4, 0, 1), 5);
    const auto pending = n.mac.pendingFrames();
    REQUIRE(pending.size() == 1);
    CHECK(pending[0].dst == 1);
    CHECK(pending[0].src == 2);
    CHECK(pending[0].hops == 2);
    CHECK(pending[0].payload->origin == 4);
}

TEST_CASE("the loop guard drops a frame at hop 17")
{
    Node n(2);
    n.joinVia(1, 1, 0);
    n.net.forward(dataFrom(4, 0, 15), 5);
    CHECK(n.mac.queuedFrames() == 1);
    n.net.forward(dataFrom(4, 1, 16), 6);
    CHECK(n.mac.queuedFrames() == 1);
    CHECK(n.ledger.origin(4).droppedFor(DropReason::LoopGuard) == 1);
}

TEST_CASE("forwarding without a parent drops the frame")
{
    Node n(2);
    n.net.forward(dataFrom(4, 0, 1), 5);
    CHECK(n.ledger.origin(4).droppedFor(DropReason::NoParent) == 1);
}

TEST_CASE("an EB whose rank would exceed the maximum cannot be joined")
{
    Node n(2);
    CHECK(n.net.macJoinAllowed(15));
    CHECK_FALSE(n.net.macJoinAllowed(16));
    n.joinVia(1, 16, 0);
    CHECK_FALSE(n.mac.joined());
}

TEST_CASE("a node detaches when its best rank would exceed the maximum")
{
    NetParams p;
    p.maxRank = 4;
    Node n(2, p);
    n.joinVia(1, 3, 0);
    REQUIRE(n.mac.joined());
    // The parent's rank rises past the limit and nothing better is heard.
    n.net.macNeighborHeard(1, 4, 100);
    CHECK_FALSE(n.mac.joined());
    CHECK(n.net.routing().parent == kNoNode);
}

TEST_CASE("the coordinator delivers each packet to the sink once")
{
    Node sink(0);
    Frame f = dataFrom(3, 9, 2);
    f.dst = 0;
    sink.net.macDataReceived(f, 10);
    sink.net.macDataReceived(f, 20);
    CHECK(sink.ledger.origin(3).delivered == 1);
    CHECK(sink.ledger.origin(3).duplicates == 1);
}

TEST_CASE("the coordinator never selects a parent")
{
    Node sink(0);
    sink.net.macNeighborHeard(1, 1, 10);
    CHECK(sink.net.routing().parent == kNoNode);
    CHECK(sink.net.routing().rank == 0);
}
