#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>
#include <vector>

#include "tschsim/mac.h"

using namespace tschsim;

namespace {

// Scheduler that returns the same cells in every slot.
class FixedScheduler : public Scheduler {
public:
    explicit FixedScheduler(std::vector<Cell> cells) : cells_(std::move(cells)) {}
    SchedulerKind kind() const override { return SchedulerKind::Orchestra; }
    const std::vector<SlotframeSpec>& slotframes() const override { return frames_; }
    void activeCells(const NodeContext&, Asn, std::vector<Cell>& out) override { out = cells_; }
    using Scheduler::activeCells;
    void txCellElapsed(NodeId, NodeId, bool used) override { usedCells += used; }

    std::vector<Cell> cells_;
    std::vector<SlotframeSpec> frames_{{"test", 1, 0}};
    int usedCells = 0;
};

struct Recorder : MacUpper {
    void macJoined(NodeId src, int rank, Asn) override { joins.push_back({src, rank}); }
    void macLeft(Asn) override { ++lefts; }
    void macNeighborHeard(NodeId n, std::optional<int> rank, Asn) override { heard.push_back({n, rank}); }
    void macDataReceived(const Frame& f, Asn) override { received.push_back(f); }
    void macFrameDropped(const Frame& f, DropReason r) override { drops.push_back({f, r}); }

    std::vector<std::pair<NodeId, int>> joins;
    int lefts = 0;
    std::vector<std::pair<NodeId, std::optional<int>>> heard;
    std::vector<Frame> received;
    std::vector<std::pair<Frame, DropReason>> drops;
};

const Cell kDedicatedTx{0, 0, 0, kCellTx, 0};
const Cell kSharedTx{0, 0, 0, kCellTx | kCellShared, 0};
const Cell kEbTx{0, 0, 0, kCellTx | kCellEb, kBroadcast};

Frame eb(NodeId src, int rank, Asn asn) { return {FrameKind::Eb, src, kBroadcast, asn, rank}; }

Frame data(NodeId origin, std::uint32_t seq)
{
    Frame f{FrameKind::Data, origin, 0};
    f.payload = AppPacketId{origin, seq};
    return f;
}

struct Fixture {
    explicit Fixture(std::vector<Cell> cells, MacParams params = {})
        : sched(std::move(cells)), rng(1, {StreamTag::Mac, 1}), mac(1, params, fhs, sched, rng, upper)
    {
    }

    // Boots node 1 and joins it to coordinator 0 at `asn`.
    void joinAt(Asn asn)
    {
        mac.boot(0, false);
        mac.receive(eb(0, 0, asn), asn, true);
    }

    SlotPlan plan(Asn asn) { return mac.planSlot(asn, {1, 0, 0, {}}); }

    Fhs fhs;
    FixedScheduler sched;
    RngStream rng;
    Recorder upper;
    TschMac mac;
};

}  // namespace

TEST_CASE("coordinator boots joined with rank 0")
{
    Fixture f({});
    f.mac.boot(0, true);
    CHECK(f.mac.joined());
    CHECK(f.mac.state().rank == 0);
    CHECK(f.mac.state().joinAsn == Asn{0});
}

TEST_CASE("a scanning node joins on the first EB it hears")
{
    Fixture f({kDedicatedTx});
    f.mac.boot(0, false);
    CHECK((f.mac.phase() == Phase::Scanning));
    // Non-EB frames are ignored while scanning.
    CHECK_FALSE(f.mac.receive(data(2, 0), 50, true));
    CHECK((f.mac.phase() == Phase::Scanning));
    f.mac.receive(eb(0, 0, 123), 123, true);
    CHECK(f.mac.joined());
    CHECK(f.mac.state().rank == 1);
    CHECK(f.mac.state().timeSource == 0);
    CHECK(f.mac.state().joinAsn == Asn{123});
    REQUIRE(f.upper.joins.size() == 1);
    CHECK(f.upper.joins[0] == std::pair<NodeId, int>{0, 0});
}

TEST_CASE("a node that is not joined never transmits")
{
    Fixture f({kDedicatedTx, kEbTx});
    f.mac.boot(0, false);
    f.mac.enqueue(data(1, 0), 0);
    for (Asn asn = 0; asn < 10'000; ++asn) {
        f.mac.housekeeping(asn);
        const SlotPlan p = f.plan(asn);
        REQUIRE(p.kind == SlotPlan::Kind::Listen);
        REQUIRE(p.scanning);
    }
    CHECK(f.mac.stats().dataTx == 0);
    CHECK(f.mac.stats().ebsSent == 0);
}

TEST_CASE("eight lost attempts then an ACK delivers on the ninth transmission")
{
    Fixture f({kDedicatedTx});
    f.joinAt(0);
    REQUIRE(f.mac.enqueue(data(1, 7), 0));
    Asn asn = 1;
    for (int i = 0; i < 8; ++i, ++asn) {
        REQUIRE(f.plan(asn).kind == SlotPlan::Kind::Transmit);
        f.mac.transmitDone(asn, false);
    }
    REQUIRE(f.plan(asn).kind == SlotPlan::Kind::Transmit);
    f.mac.transmitDone(asn, true);
    CHECK(f.mac.stats().dataTx == 9);
    CHECK(f.upper.drops.empty());
    CHECK(f.mac.queuedFrames() == 0);
}

TEST_CASE("nine lost attempts drop the frame as retry exhausted")
{
    Fixture f({kDedicatedTx});
    f.joinAt(0);
    REQUIRE(f.mac.enqueue(data(1, 7), 0));
    for (Asn asn = 1; asn <= 9; ++asn) {
        REQUIRE(f.plan(asn).kind == SlotPlan::Kind::Transmit);
        f.mac.transmitDone(asn, false);
    }
    CHECK(f.mac.stats().dataTx == 9);
    REQUIRE(f.upper.drops.size() == 1);
    CHECK((f.upper.drops[0].second == DropReason::RetryExhausted));
    CHECK(f.upper.drops[0].first.payload->seq == 7);
    CHECK(f.plan(10).kind != SlotPlan::Kind::Transmit);
}

TEST_CASE("dedicated cells retry in the next cell without backoff")
{
    Fixture f({kDedicatedTx});
    f.joinAt(0);
    f.mac.enqueue(data(1, 0), 0);
    for (Asn asn = 1; asn <= 5; ++asn) {
        CHECK(f.plan(asn).kind == SlotPlan::Kind::Transmit);
        f.mac.transmitDone(asn, false);
    }
}

TEST_CASE("shared cells back off with a growing exponent capped at 7")
{
    Fixture f({kSharedTx});
    f.joinAt(0);
    f.mac.enqueue(data(1, 0), 0);
    // Count shared-cell opportunities skipped after each failure: after
    // failure k the window is drawn from [0, 2^min(k, 7)).
    Asn asn = 1;
    std::vector<int> skipped;
    for (int failure = 0; failure < 8; ++failure) {
        int skips = 0;
        while (f.plan(asn).kind != SlotPlan::Kind::Transmit) {
            ++skips;
            ++asn;
        }
        skipped.push_back(skips);
        f.mac.transmitDone(asn, false);
        ++asn;
        const auto& q = f.mac.state().txQueues.front();
        if (failure < 7) {
            CHECK(q.backoffExponent == std::min(2 + failure, 7));
            CHECK(q.backoffWindow < (1u << std::min(1 + failure, 7)));
        }
    }
    CHECK(skipped[0] == 0);  // first attempt goes out at once
    CHECK(f.mac.stats().dataTx == 8);
}

TEST_CASE("keep-alive after 12 s of silence and leave after 36 s")
{
    Fixture f({kDedicatedTx});
    f.joinAt(1000);
    for (Asn asn = 1000; asn < 1000 + 1199; ++asn)
        f.mac.housekeeping(asn);
    CHECK(f.mac.stats().keepalivesSent == 0);
    f.mac.housekeeping(1000 + 1200);
    CHECK(f.mac.stats().keepalivesSent == 1);
    REQUIRE(f.mac.queuedFrames() >= 1);
    for (Asn asn = 1000 + 1201; asn < 1000 + 3600; ++asn)
        f.mac.housekeeping(asn);
    CHECK(f.mac.joined());
    f.mac.housekeeping(1000 + 3600);
    CHECK((f.mac.phase() == Phase::Scanning));
    CHECK(f.upper.lefts == 1);
    CHECK(f.mac.stats().leaves == 1);
    CHECK(f.mac.state().timeSource == kNoNode);
}

TEST_CASE("an ACKed keep-alive resynchronizes the node")
{
    Fixture f({kDedicatedTx});
    f.joinAt(0);
    Asn asn = 0;
    for (; f.mac.stats().keepalivesSent == 0; ++asn)
        f.mac.housekeeping(asn);
    --asn;
    CHECK(asn == 1200);
    REQUIRE(f.plan(asn).kind == SlotPlan::Kind::Transmit);
    CHECK((f.plan(asn).frame->kind == FrameKind::Keepalive));
    f.mac.transmitDone(asn, true);
    CHECK(f.mac.state().lastSyncAsn == asn);
    for (Asn a = asn; a < asn + 3599; ++a)
        f.mac.housekeeping(a);
    CHECK(f.mac.joined());
}

TEST_CASE("EBs from the time source count as synchronization")
{
    Fixture f({kDedicatedTx});
    f.joinAt(0);
    CHECK_FALSE(f.mac.receive(eb(0, 0, 3000), 3000, false));
    CHECK(f.mac.state().lastSyncAsn == 3000);
    f.mac.receive(eb(4, 1, 3100), 3100, false);
    CHECK(f.mac.state().lastSyncAsn == 3000);  // not the time source
    REQUIRE(f.upper.heard.size() == 2);
    CHECK(f.upper.heard[1].second == 1);
}

TEST_CASE("EBs carry the ASN and rank of the slot they go out in")
{
    Fixture f({kEbTx});
    f.joinAt(0);
    Asn asn = 1;
    for (; f.mac.state().ebQueue.frames.empty(); ++asn)
        f.mac.housekeeping(asn);
    const Asn txAsn = asn + 37;
    const SlotPlan p = f.plan(txAsn);
    REQUIRE(p.kind == SlotPlan::Kind::Transmit);
    CHECK((p.frame->kind == FrameKind::Eb));
    CHECK(p.frame->asnStamp == txAsn);
    CHECK(p.frame->rank == 1);
    f.mac.transmitDone(txAsn, false);
    CHECK(f.mac.stats().ebsSent == 1);
}

TEST_CASE("EB periods stay within 4 s +- 10%")
{
    Fixture f({kEbTx});
    f.joinAt(0);
    std::vector<Asn> sent;
    for (Asn asn = 1; asn < 100'000; ++asn) {
        f.mac.refreshSync(asn);  // stay synchronized
        f.mac.housekeeping(asn);
        if (f.plan(asn).kind == SlotPlan::Kind::Transmit) {
            sent.push_back(asn);
            f.mac.transmitDone(asn, false);
        }
    }
    REQUIRE(sent.size() > 200);
    for (std::size_t i = 1; i < sent.size(); ++i) {
        REQUIRE(sent[i] - sent[i - 1] >= 360);
        REQUIRE(sent[i] - sent[i - 1] <= 440);
    }
}

TEST_CASE("queues hold 16 frames")
{
    Fixture f({kDedicatedTx});
    f.joinAt(0);
    for (std::uint32_t i = 0; i < 16; ++i)
        CHECK(f.mac.enqueue(data(1, i), 0));
    CHECK_FALSE(f.mac.enqueue(data(1, 16), 0));
    CHECK(f.mac.queuedFrames() == 16);
}

TEST_CASE("unicast DATA addressed here is ACKed and passed up")
{
    Fixture f({kDedicatedTx});
    f.joinAt(0);
    Frame d = data(3, 5);
    d.dst = 1;
    CHECK(f.mac.receive(d, 10, false));
    REQUIRE(f.upper.received.size() == 1);
    CHECK(f.upper.received[0].payload->origin == 3);
    d.dst = 2;
    CHECK_FALSE(f.mac.receive(d, 11, false));
    CHECK(f.upper.received.size() == 1);
}

TEST_CASE("leaving flushes queued DATA")
{
    Fixture f({kDedicatedTx});
    f.joinAt(0);
    f.mac.enqueue(data(1, 0), 0);
    f.mac.enqueue(data(1, 1), 0);
    f.mac.leave(5);
    CHECK(f.mac.queuedFrames() == 0);
    REQUIRE(f.upper.drops.size() == 2);
    CHECK((f.upper.drops[0].second == DropReason::Flushed));
}

TEST_CASE("a time source change moves queued DATA to the new parent")
{
    Fixture f({kDedicatedTx});
    f.joinAt(0);
    f.mac.enqueue(data(1, 0), 0);
    f.mac.setTimeSource(2, 0);
    CHECK(f.mac.state().timeSource == 2);
    const auto pending = f.mac.pendingFrames();
    REQUIRE(pending.size() == 1);
    CHECK(pending[0].dst == 2);
}

TEST_CASE("scan channel stays put for a dwell and comes from the hopping sequence")
{
    Fixture f({});
    f.mac.boot(0, false);
    const std::set<Channel> allowed{16, 17, 23, 18};
    std::set<Channel> seen;
    for (Asn dwell = 0; dwell < 200; ++dwell) {
        const Channel c = f.mac.scanChannel(dwell * 100);
        REQUIRE(allowed.count(c));
        seen.insert(c);
        for (Asn k = 1; k < 100; ++k)
            REQUIRE(f.mac.scanChannel(dwell * 100 + k) == c);
    }
    CHECK(seen == allowed);
}

TEST_CASE("cyclic scan order steps through the sequence from the node id")
{
    MacParams p;
    p.scanOrder = ScanOrder::Cycle;
    Fixture f({}, p);
    f.mac.boot(0, false);
    const Fhs fhs;
    for (Asn step = 0; step < 12; ++step)
        CHECK(f.mac.scanChannel(step * 100 + 42) == fhs[(1 + step) % 4]);
}

TEST_CASE("desync timeout must exceed the keep-alive period")
{
    MacParams p;
    p.sync.desyncTimeoutS = 12.0;
    CHECK_THROWS_AS(Fixture({}, p), std::invalid_argument);
}
