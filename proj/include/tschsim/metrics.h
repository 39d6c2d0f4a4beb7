#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tschsim/frame.h"
#include "tschsim/mac.h"
#include "tschsim/schedule.h"
#include "tschsim/types.h"

namespace tschsim {

inline constexpr std::size_t kDropReasons = 6;

/// Per-origin packet bookkeeping across the whole network.
struct OriginCounters {
    std::uint64_t generated = 0;
    std::uint64_t delivered = 0;   // unique, at the coordinator
    std::uint64_t duplicates = 0;  // repeated arrivals of a delivered packet
    std::array<std::uint64_t, kDropReasons> dropped{};
    std::uint64_t inQueueAtEnd = 0;

    std::uint64_t droppedTotal() const;
    std::uint64_t droppedFor(DropReason r) const { return dropped[static_cast<std::size_t>(r)]; }
};

class PacketLedger {
public:
    explicit PacketLedger(std::size_t nodes);

    void generated(NodeId origin) { at(origin).generated++; }
    /// Records an arrival at the sink; false for a duplicate.
    bool delivered(const AppPacketId& id);
    void dropped(const Frame& frame, DropReason reason);
    void dropped(NodeId origin, DropReason reason);
    void stillQueued(const Frame& frame);

    const OriginCounters& origin(NodeId id) const { return counters_.at(id); }
    std::size_t size() const { return counters_.size(); }

    /// generated + duplicates == delivered + drops + still queued.
    bool balanced(NodeId id) const;

private:
    OriginCounters& at(NodeId id) { return counters_.at(id); }

    std::vector<OriginCounters> counters_;
    std::vector<std::vector<bool>> seen_;
};

enum class Pattern { Agri, Warehouse };

std::string_view toString(Pattern p);
std::optional<Pattern> parsePattern(std::string_view s);

struct NodeResult {
    NodeId node = 0;
    bool coordinator = false;
    std::uint64_t generated = 0;
    std::uint64_t delivered = 0;
    std::uint64_t txAttempts = 0;
    double prr = 0.0;
    bool prrUndefined = false;  // nothing generated
    double downtimeFraction = 0.0;
    std::optional<double> joinTimeS;  // nullopt: censored
    OriginCounters packets;
    MacStats mac;
};

struct RunRecord {
    Pattern scenario = Pattern::Agri;
    SchedulerKind scheduler = SchedulerKind::Orchestra;
    int nNodes = 0;
    std::uint64_t seed = 0;
    std::string configDigest;
    std::vector<NodeResult> nodes;
    std::uint64_t eventDigest = 0;
};

/// Unique deliveries over generated packets; 0 when nothing was generated.
double prr(std::uint64_t generated, std::uint64_t delivered);
/// Fraction of the run spent not JOINED.
double downtimeFraction(std::uint64_t slotsNotJoined, std::uint64_t totalSlots);
/// Time from boot to first association; nullopt if the node never joined.
std::optional<double> initialJoinTime(std::optional<Asn> firstJoinAsn, double slotS, double bootTimeS);

struct BoxStats {
    double min = 0, q1 = 0, median = 0, q3 = 0, max = 0;
    std::size_t n = 0;
};

/// Quartiles by linear interpolation between order statistics (type 7).
/// Throws std::invalid_argument on an empty sample.
BoxStats boxStats(std::vector<double> values);
double quantile7(const std::vector<double>& sorted, double p);

struct GroupKey {
    Pattern scenario;
    SchedulerKind scheduler;
    int nNodes;

    auto operator<=>(const GroupKey&) const = default;
    std::string label() const;
};

struct GroupSummary {
    std::optional<BoxStats> prr;
    std::optional<BoxStats> downtime;
    std::optional<BoxStats> joinTime;
    std::size_t censored = 0;  // node-runs that never joined
    std::size_t runs = 0;
};

/// Pools every non-coordinator node of every run in a group.
std::map<GroupKey, GroupSummary> aggregate(const std::vector<RunRecord>& records);

inline constexpr std::string_view kRunCsvHeader =
    "scenario,scheduler,n_nodes,seed,node_id,generated,delivered,tx_attempts,prr,downtime_fraction,"
    "join_time_s,censored";

std::string runCsvRows(const RunRecord& record);

inline constexpr int kSummarySchemaVersion = 1;
std::string summaryJson(const std::map<GroupKey, GroupSummary>& summary);

enum class Metric { Prr, Downtime, JoinTime };
std::string_view toString(Metric m);

/// Box-plot rows `group,min,q1,median,q3,max,n` for one scenario and metric,
/// ordered by (n_nodes, scheduler name).
std::string plotCsv(const std::map<GroupKey, GroupSummary>& summary, Pattern scenario, Metric metric);

}  // namespace tschsim
