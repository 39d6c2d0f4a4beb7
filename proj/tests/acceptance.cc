// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "tschsim/experiment.h"

using namespace tschsim;

namespace {

using Clock = std::chrono::steady_clock;

double secondsSince(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Lines are collected and printed in criterion order at the end.
std::map<int, std::string> lines;
int failures = 0;

void report(int id, bool pass, const std::string& detail)
{
    char head[32];
    std::snprintf(head, sizeof head, "criterion %2d: %s  ", id, pass ? "PASS" : "FAIL");
    std::string text = detail;
    while (!text.empty() && (text.back() == ' ' || text.back() == ';'))
        text.pop_back();
    lines[id] = head + text;
    std::fprintf(stderr, "%s\n", lines[id].c_str());
    if (!pass)
        ++failures;
}

std::string fmt(const char* f, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

double median(std::vector<double> v)
{
    std::sort(v.begin(), v.end());
    return quantile7(v, 0.5);
}

// 1: channel hopping against index arithmetic, written out independently.
void channelHopping()
{
    const auto t0 = Clock::now();
    std::uint64_t mismatches = 0, checks = 0;
    for (int len = 1; len <= 16; ++len) {
        std::vector<Channel> chans;
        for (int i = 0; i < len; ++i)
            chans.push_back(11 + (i * 5 + 3) % 16);
        const Fhs fhs(chans);
        for (Asn asn = 0; asn <= 10'000; ++asn) {
            for (std::uint32_t co = 0; co < 16; ++co) {
                const Channel want = chans[static_cast<std::size_t>((asn + co) % static_cast<Asn>(len))];
                mismatches += channelFor(asn, co, fhs) != want;
                ++checks;
            }
        }
    }
    const double s = secondsSince(t0);
    report(1, mismatches == 0 && s < 1.0,
           std::to_string(checks) + " checks, " + std::to_string(mismatches) + " mismatches, " + fmt("%.3f s", s));
}

// 2: collision arbitration against a brute-force resolver.
void arbitration()
{
    RngStream rng(2024, {StreamTag::Test, 2});
    int mismatches = 0;
    constexpr int kCases = 10'000;
    for (int c = 0; c < kCases; ++c) {
        constexpr int kNodes = 10;
        std::vector<Position> pos;
        for (int i = 0; i < kNodes; ++i)
            pos.push_back({rng.uniform(0, 1000), rng.uniform(0, 1000)});
        std::array<int, kNodes> order{};
        for (int i = 0; i < kNodes; ++i)
            order[i] = i;
        for (int i = kNodes - 1; i > 0; --i)
            std::swap(order[i], order[rng.uniformChoice(static_cast<std::uint64_t>(i) + 1)]);
        const auto nTx = rng.uniformChoice(6), nRx = rng.uniformChoice(6);
        std::vector<Frame> frames(nTx);
        std::vector<TxAttempt> tx;
        std::vector<Listener> rx;
        for (std::size_t k = 0; k < nTx; ++k) {
            frames[k].src = static_cast<NodeId>(order[k]);
            tx.push_back({frames[k].src, static_cast<Channel>(16 + rng.uniformChoice(2)), &frames[k]});
        }
        for (std::size_t k = 0; k < nRx; ++k)
            rx.push_back({static_cast<NodeId>(order[nTx + k]), static_cast<Channel>(16 + rng.uniformChoice(2))});

        const auto got = arbitrateSlot(tx, rx, pos, 450.0);
        for (std::size_t l = 0; l < rx.size(); ++l) {
            int heard = 0;
            NodeId from = kNoNode;
            for (const auto& t : tx) {
                const double d = std::hypot(pos[t.sender].x - pos[rx[l].node].x, pos[t.sender].y - pos[rx[l].node].y);
                if (t.channel == rx[l].channel && d <= 450.0) {
                    ++heard;
                    from = t.sender;
                }
            }
            const RxResult want = heard == 0 ? RxResult::Idle : heard == 1 ? RxResult::Delivered : RxResult::Collision;
            bool ok = got[l].receiver == rx[l].node && got[l].result == want;
            if (ok && want == RxResult::Delivered)
                ok = got[l].delivered->sender == from;
            mismatches += !ok;
        }
    }
    report(2, mismatches == 0,
           std::to_string(kCases) + " fuzzed slots, " + std::to_string(mismatches) + " mismatching listeners");
}

// 5: scheduler conformance.
void schedulerConformance()
{
    bool orchestraOk = true;
    OrchestraScheduler orchestra;
    for (NodeId id = 0; id <= 10'000 && orchestraOk; ++id) {
        const NodeContext ctx{id, kNoNode, kNoNode, {}};
        for (const auto& c : orchestra.unicastCells(ctx))
            if (c.rx() && c.slotOffset != id % 17)
                orchestraOk = false;
    }

    // ALICE on the line 0 <- 1 <- 2.
    AliceScheduler alice;
    const std::vector<NodeId> kids0{1}, kids1{2}, none{};
    const std::array<NodeContext, 3> line{NodeContext{0, kNoNode, kNoNode, kids0}, NodeContext{1, 0, 0, kids1},
                                          NodeContext{2, 1, 1, none}};
    bool constantOk = true;
    int changed = 0;
    constexpr int kFrames = 1000;
    std::array<std::vector<Cell>, 3> prev;
    for (std::uint64_t asfn = 0; asfn < kFrames; ++asfn) {
        std::array<std::vector<Cell>, 3> cur;
        for (std::size_t i = 0; i < 3; ++i) {
            cur[i] = alice.linkCells(line[i], asfn);
            // Constant within the slotframe: every slot reproduces the map.
            std::vector<Cell> seen;
            for (std::uint32_t k = 0; k < 17; ++k)
                for (const auto& c : alice.activeCells(line[i], asfn * 17 + k))
                    if (alice.slotframes()[c.slotframe].name == "unicast")
                        seen.push_back(c);
            auto key = [](const Cell& c) { return std::make_tuple(c.slotOffset, c.channelOffset, c.peer, c.options); };
            std::vector<std::tuple<std::uint32_t, std::uint32_t, NodeId, std::uint8_t>> a, b;
            for (const auto& c : seen)
                a.push_back(key(c));
            for (const auto& c : cur[i])
                b.push_back(key(c));
            std::sort(a.begin(), a.end());
            std::sort(b.begin(), b.end());
            constantOk = constantOk && a == b;
        }
        if (asfn > 0)
            changed += cur != prev;
        prev = std::move(cur);
    }
    const double changeRate = static_cast<double>(changed) / (kFrames - 1);

    // MSF-lite scripted load: thresholds exactly at 48/64 and 16/64.
    bool msfOk = true;
    {
        MsfScheduler msf({}, 1);
        auto feed = [&](int used) {
            for (int i = 0; i < 64; ++i)
                msf.txCellElapsed(1, 0, i < used);
            return msf.txCellCount(1, 0);
        };
        msfOk = msfOk && feed(47) == 1;  // 73.4%: no add
        msfOk = msfOk && feed(48) == 2;  // 75%: add
        msfOk = msfOk && feed(17) == 2;  // 26.6%: no delete
        msfOk = msfOk && feed(16) == 1;  // 25%: delete
        msfOk = msfOk && feed(0) == 1;   // never below one cell
    }
    report(5, orchestraOk && constantOk && changeRate >= 0.5 && msfOk,
           std::string("orchestra rx=id%17 ") + (orchestraOk ? "ok" : "BAD") + ", alice constant-in-ASFN " +
               (constantOk ? "ok" : "BAD") + fmt(", alice change rate %.3f", changeRate) + ", msf thresholds " +
               (msfOk ? "ok" : "BAD"));
}

// 10: static 2-node sanity for every scheduler over the full 4 h.
void staticSanity()
{
    const ExperimentConfig cfg;
    const double duration = cfg.agri.durationS;
    bool ok = true;
    std::string detail;
    for (auto kind : {SchedulerKind::Orchestra, SchedulerKind::Alice, SchedulerKind::Msf}) {
        SimConfig sc = simConfig(cfg.agri, kind, 1);
        Simulation sim(sc, {{0, {{0.0, {0, 0}}, {duration, {0, 0}}}}, {1, {{0.0, {300, 0}}, {duration, {300, 0}}}}});
        sim.run();
        const auto r = sim.finish();
        ok = ok && r[1].prr >= 0.99 && r[1].downtimeFraction < 0.01;
        detail += std::string(toString(kind)) + fmt(" prr %.4f", r[1].prr) + fmt(" down %.4f; ", r[1].downtimeFraction);
    }
    report(10, ok, detail);
}

// 11: mobility statistics.
void mobilityStatistics(const ExperimentConfig& cfg)
{
    RngStream rng(1, {StreamTag::Test, 11});
    std::array<int, 4> counts{};
    constexpr int kLegs = 10'000;
    for (int i = 0; i < kLegs; ++i)
        ++counts[static_cast<int>(drawWarehouseLeg(rng, {500, 500}).direction)];
    double chi2 = 0;
    for (int c : counts)
        chi2 += (c - kLegs / 4.0) * (c - kLegs / 4.0) / (kLegs / 4.0);
    const bool chiOk = chi2 < 11.345;  // 3 degrees of freedom, alpha = 0.01

    // Every waypoint of every matrix trace lies in the frame; legs are
    // straight, so the segments between them do too.
    bool inFrameOk = true;
    for (int n : cfg.nodeCounts)
        for (auto seed : cfg.seeds)
            for (const auto& tr : makeTraces(cfg.warehouse, n, seed))
                for (const auto& w : tr.waypoints)
                    inFrameOk = inFrameOk && inFrame(w.pos);

    const TrailSpec trail(cfg.agri.trail);
    const auto tr = genAgriTrace(0, trail, 0.0, Heading::Forward, cfg.agri.speed, cfg.agri.durationS);
    double travelled = 0;
    for (std::size_t i = 1; i < tr.waypoints.size(); ++i)
        travelled += distance(tr.waypoints[i - 1].pos, tr.waypoints[i].pos);
    const double traversals = travelled / trail.totalLength();
    const bool traversalOk = std::abs(traversals - 20.0) <= 1.0;

    report(11, chiOk && inFrameOk && traversalOk,
           fmt("direction chi2 %.3f (< 11.345)", chi2) + ", warehouse traces in frame " + (inFrameOk ? "yes" : "NO") +
               fmt(", agri traversals %.2f", traversals));
}

// 12: one 4 h, 5-node run.
void performance(const ExperimentConfig& cfg)
{
    const auto t0 = Clock::now();
    const RunOutput out = runOne(cfg, {Pattern::Warehouse, SchedulerKind::Msf, 5, 1});
    const double s = secondsSince(t0);
    report(12, s < 60.0 && out.conserved, fmt("4 h, 5-node warehouse/msf run took %.2f s", s));
}

using Results = std::vector<RunOutput>;

std::vector<const RunOutput*> select(const Results& runs, Pattern p, std::optional<SchedulerKind> k,
                                     std::optional<int> n)
{
    std::vector<const RunOutput*> out;
    for (const auto& r : runs)
        if (r.record.scenario == p && (!k || r.record.scheduler == *k) && (!n || r.record.nNodes == *n))
            out.push_back(&r);
    return out;
}

std::vector<double> pooled(const std::vector<const RunOutput*>& runs, double NodeResult::*metric)
{
    std::vector<double> v;
    for (const auto* r : runs)
        for (const auto& n : r->record.nodes)
            if (!n.coordinator)
                v.push_back(n.*metric);
    return v;
}

void matrixCriteria(const ExperimentConfig& cfg)
{
    const unsigned workers = std::max(1u, std::thread::hardware_concurrency());
    const auto specs = matrixSpecs(cfg);

    const auto t0 = Clock::now();
    const Results first = runMatrix(cfg, specs, workers);
    const double firstS = secondsSince(t0);
    const std::string manifest = manifestJson(cfg, first);
    const ExperimentConfig replay = configFromManifest(manifest);
    const Results second = runMatrix(replay, matrixSpecs(replay), workers);
    const std::string csvA = runsCsv(first), csvB = runsCsv(second);
    report(3, csvA == csvB && first.size() == 360,
           std::to_string(first.size()) + " runs twice via the manifest, per-run CSV " +
               (csvA == csvB ? "byte-identical" : "DIFFERS") + fmt(", one matrix %.1f s", firstS));

    // 4: packet accounting.
    std::size_t badGenerated = 0, unbalanced = 0, unjoinedTx = 0;
    const auto expected = static_cast<std::uint64_t>(std::llround(cfg.agri.durationS / cfg.agri.net.trafficPeriodS));
    for (const auto& r : first) {
        for (const auto& n : r.record.nodes)
            if (!n.coordinator && n.generated != expected)
                ++badGenerated;
        unbalanced += !r.conserved;
        unjoinedTx += r.unjoinedTransmissions;
    }
    report(4, badGenerated == 0 && unbalanced == 0 && expected == 2400,
           std::to_string(expected) + " packets per node expected, " + std::to_string(badGenerated) +
               " node-runs off, " + std::to_string(unbalanced) + " unbalanced runs, " +
               std::to_string(unjoinedTx) + " unjoined transmissions");

    const std::array<SchedulerKind, 3> kinds{SchedulerKind::Orchestra, SchedulerKind::Alice, SchedulerKind::Msf};

    // 6: warehouse downtime per scheduler.
    {
        bool ok = true;
        std::string detail = "median downtime";
        for (auto k : kinds) {
            const double m = median(pooled(select(first, Pattern::Warehouse, k, std::nullopt),
                                           &NodeResult::downtimeFraction));
            ok = ok && m < 0.05;
            detail += " " + std::string(toString(k)) + fmt(" %.3f", m);
        }
        report(6, ok, detail + " (need < 0.05)");
    }

    // 7: the remote AGRI node in 3-node runs.
    {
        bool ok = true;
        std::string detail;
        for (auto k : kinds) {
            const auto runs = select(first, Pattern::Agri, k, 3);
            std::vector<double> remoteDown, remotePrr;
            int minimal = 0;
            for (const auto* r : runs) {
                const NodeResult& remote = r->record.nodes.back();
                remoteDown.push_back(remote.downtimeFraction);
                remotePrr.push_back(remote.prr);
                bool isMin = true;
                for (const auto& n : r->record.nodes)
                    if (!n.coordinator && n.node != remote.node && n.prr < remote.prr)
                        isMin = false;
                minimal += isMin;
            }
            const double md = median(remoteDown);
            ok = ok && md > 0.20 && minimal >= 18;
            detail += std::string(toString(k)) + fmt(" down %.3f", md) + fmt(" prr %.3f", median(remotePrr)) +
                      " min-in " + std::to_string(minimal) + "/" + std::to_string(runs.size()) + "; ";
        }
        report(7, ok, detail);
    }

    // 8: AGRI PRR rises from 3 to 4 nodes per scheduler.
    {
        bool ok = true;
        std::string detail = "median prr 3->4";
        for (auto k : kinds) {
            const double m3 = median(pooled(select(first, Pattern::Agri, k, 3), &NodeResult::prr));
            const double m4 = median(pooled(select(first, Pattern::Agri, k, 4), &NodeResult::prr));
            ok = ok && m4 > m3;
            detail += " " + std::string(toString(k)) + fmt(" %.3f", m3) + fmt("->%.3f", m4);
        }
        report(8, ok, detail);
    }

    // 9: warehouse join time falls from 3 to 4 nodes.
    {
        auto joins = [&](std::optional<SchedulerKind> k, int n) {
            std::vector<double> v;
            for (const auto* r : select(first, Pattern::Warehouse, k, n))
                for (const auto& node : r->record.nodes)
                    if (!node.coordinator && node.joinTimeS)
                        v.push_back(*node.joinTimeS);
            return median(v);
        };
        const double j3 = joins(std::nullopt, 3), j4 = joins(std::nullopt, 4);
        std::string detail = fmt("pooled median join %.2f s", j3) + fmt(" -> %.2f s;", j4);
        for (auto k : kinds)
            detail += " " + std::string(toString(k)) + fmt(" %.2f", joins(k, 3)) + fmt("->%.2f", joins(k, 4));
        report(9, j4 < j3, detail);
    }
}

}  // namespace

int main()
{
    const ExperimentConfig cfg;
    channelHopping();
    arbitration();
    schedulerConformance();
    staticSanity();
    mobilityStatistics(cfg);
    performance(cfg);
    matrixCriteria(cfg);
    for (const auto& [id, line] : lines)
        std::printf("%s\n", line.c_str());
    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
