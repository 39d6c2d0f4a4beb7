#include "tschsim/metrics.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace tschsim {

std::uint64_t OriginCounters::droppedTotal() const
{
    return std::accumulate(dropped.begin(), dropped.end(), std::uint64_t{0});
}

PacketLedger::PacketLedger(std::size_t nodes) : counters_(nodes), seen_(nodes) {}

bool PacketLedger::delivered(const AppPacketId& id)
{
    auto& seen = seen_.at(id.origin);
    if (seen.size() <= id.seq)
        seen.resize(id.seq + 1, false);
    if (seen[id.seq]) {
        at(id.origin).duplicates++;
        return false;
    }
    seen[id.seq] = true;
    at(id.origin).delivered++;
    return true;
}

void PacketLedger::dropped(NodeId origin, DropReason reason)
{
    at(origin).dropped[static_cast<std::size_t>(reason)]++;
}

void PacketLedger::dropped(const Frame& frame, DropReason reason)
{
    if (frame.kind == FrameKind::Data && frame.payload)
        dropped(frame.payload->origin, reason);
}

void PacketLedger::stillQueued(const Frame& frame)
{
    if (frame.kind == FrameKind::Data && frame.payload)
        at(frame.payload->origin).inQueueAtEnd++;
}

bool PacketLedger::balanced(NodeId id) const
{
    const auto& c = counters_.at(id);
    return c.generated + c.duplicates == c.delivered + c.droppedTotal() + c.inQueueAtEnd;
}

std::string_view toString(Pattern p)
{
    return p == Pattern::Agri ? "agri" : "warehouse";
}

std::optional<Pattern> parsePattern(std::string_view s)
{
    if (s == "agri")
        return Pattern::Agri;
    if (s == "warehouse")
        return Pattern::Warehouse;
    return std::nullopt;
}

double prr(std::uint64_t generated, std::uint64_t delivered)
{
    if (generated == 0)
        return 0.0;
    return static_cast<double>(delivered) / static_cast<double>(generated);
}

double downtimeFraction(std::uint64_t slotsNotJoined, std::uint64_t totalSlots)
{
    if (totalSlots == 0)
        return 0.0;
    return static_cast<double>(slotsNotJoined) / static_cast<double>(totalSlots);
}

std::optional<double> initialJoinTime(std::optional<Asn> firstJoinAsn, double slotS, double bootTimeS)
{
    if (!firstJoinAsn)
        return std::nullopt;
    return static_cast<double>(*firstJoinAsn) * slotS - bootTimeS;
}

double quantile7(const std::vector<double>& sorted, double p)
{
    if (sorted.empty())
        throw std::invalid_argument("quantile of an empty sample");
    const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

BoxStats boxStats(std::vector<double> values)
{
    if (values.empty())
        throw std::invalid_argument("box stats of an empty sample");
    std::sort(values.begin(), values.end());
    return {values.front(), quantile7(values, 0.25), quantile7(values, 0.5), quantile7(values, 0.75),
            values.back(), values.size()};
}

std::string GroupKey::label() const
{
    return std::string(toString(scenario)) + "/" + std::string(toString(scheduler)) + "/" +
           std::to_string(nNodes);
}

std::map<GroupKey, GroupSummary> aggregate(const std::vector<RunRecord>& records)
{
    struct Pool {
        std::vector<double> prr, downtime, join;
        std::size_t censored = 0, runs = 0;
    };
    std::map<GroupKey, Pool> pools;
    for (const auto& r : records) {
        Pool& p = pools[{r.scenario, r.scheduler, r.nNodes}];
        ++p.runs;
        for (const auto& n : r.nodes) {
            if (n.coordinator)
                continue;
            p.prr.push_back(n.prr);
            p.downtime.push_back(n.downtimeFraction);
            if (n.joinTimeS)
                p.join.push_back(*n.joinTimeS);
            else
                ++p.censored;
        }
    }
    std::map<GroupKey, GroupSummary> out;
    for (auto& [key, p] : pools) {
        GroupSummary s;
        if (!p.prr.empty())
            s.prr = boxStats(p.prr);
        if (!p.downtime.empty())
            s.downtime = boxStats(p.downtime);
        if (!p.join.empty())
            s.joinTime = boxStats(p.join);
        s.censored = p.censored;
        s.runs = p.runs;
        out.emplace(key, s);
    }
    return out;
}

namespace {

std::string num(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

}  // namespace

std::string runCsvRows(const RunRecord& record)
{
    std::string out;
    for (const auto& n : record.nodes) {
        out += std::string(toString(record.scenario)) + ',' + std::string(toString(record.scheduler)) + ',' +
               std::to_string(record.nNodes) + ',' + std::to_string(record.seed) + ',' +
               std::to_string(n.node) + ',' + std::to_string(n.generated) + ',' +
               std::to_string(n.delivered) + ',' + std::to_string(n.txAttempts) + ',' + num(n.prr) + ',' +
               num(n.downtimeFraction) + ',' + (n.joinTimeS ? num(*n.joinTimeS) : std::string()) + ',' +
               (n.joinTimeS ? "0" : "1") + '\n';
    }
    return out;
}

namespace {

nlohmann::ordered_json boxJson(const std::optional<BoxStats>& b)
{
    if (!b)
        return nullptr;
    nlohmann::ordered_json j;
    j["min"] = b->min;
    j["q1"] = b->q1;
    j["median"] = b->median;
    j["q3"] = b->q3;
    j["max"] = b->max;
    j["n"] = b->n;
    return j;
}

}  // namespace

std::string_view toString(Metric m)
{
    switch (m) {
    case Metric::Prr: return "prr";
    case Metric::Downtime: return "downtime_fraction";
    case Metric::JoinTime: return "join_time_s";
    }
    return "?";
}

std::string summaryJson(const std::map<GroupKey, GroupSummary>& summary)
{
    nlohmann::ordered_json root;
    root["schema_version"] = kSummarySchemaVersion;
    nlohmann::ordered_json groups = nlohmann::ordered_json::object();
    for (const auto& [key, s] : summary) {
        nlohmann::ordered_json g;
        g["scenario"] = toString(key.scenario);
        g["scheduler"] = toString(key.scheduler);
        g["n_nodes"] = key.nNodes;
        g["runs"] = s.runs;
        g[std::string(toString(Metric::Prr))] = boxJson(s.prr);
        g[std::string(toString(Metric::Downtime))] = boxJson(s.downtime);
        g[std::string(toString(Metric::JoinTime))] = boxJson(s.joinTime);
        g["join_censored"] = s.censored;
        groups[key.label()] = g;
    }
    root["groups"] = groups;
    return root.dump(2) + "\n";
}

std::string plotCsv(const std::map<GroupKey, GroupSummary>& summary, Pattern scenario, Metric metric)
{
    std::vector<std::pair<GroupKey, const GroupSummary*>> rows;
    for (const auto& [key, s] : summary)
        if (key.scenario == scenario)
            rows.emplace_back(key, &s);
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
        if (a.first.nNodes != b.first.nNodes)
            return a.first.nNodes < b.first.nNodes;
        return toString(a.first.scheduler) < toString(b.first.scheduler);
    });

    std::string out = "group,min,q1,median,q3,max,n\n";
    for (const auto& [key, s] : rows) {
        const std::optional<BoxStats>& b =
            metric == Metric::Prr ? s->prr : metric == Metric::Downtime ? s->downtime : s->joinTime;
        if (!b)
            continue;
        out += std::to_string(key.nNodes) + "/" + std::string(toString(key.scheduler)) + ',' + num(b->min) +
               ',' + num(b->q1) + ',' + num(b->median) + ',' + num(b->q3) + ',' + num(b->max) + ',' +
               std::to_string(b->n) + '\n';
    }
    return out;
}

}  // namespace tschsim
