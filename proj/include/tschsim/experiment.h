#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tschsim/metrics.h"
#include "tschsim/mobility.h"
#include "tschsim/simulation.h"

namespace tschsim {

/// Behavioral knobs of one scenario. Every field is covered by the digest.
struct ScenarioConfig {
    Pattern pattern = Pattern::Agri;
    double speed = 2.0;
    double rangeM = 450.0;
    double durationS = 4 * 3600.0;
    double slotS = 0.010;
    double linkLoss = 0.0;
    Fhs fhs;
    MacParams mac;
    NetParams net;
    SchedulerParams schedulerParams;
    bool coordinatorStatic = false;

    // agri
    std::vector<Position> trail = TrailSpec::defaultTrail().polyline();
    double agriSpacingM = 60.0;  // node k starts k * spacing along the trail
    double remoteOffsetM = 720.0;  // half the default trail; negative means the far end

    // warehouse
    double gridSpacingM = 300.0;
};

struct ExperimentConfig {
    ScenarioConfig agri;
    ScenarioConfig warehouse;
    std::vector<Pattern> scenarios{Pattern::Agri, Pattern::Warehouse};
    std::vector<SchedulerKind> schedulers{SchedulerKind::Orchestra, SchedulerKind::Alice, SchedulerKind::Msf};
    std::vector<int> nodeCounts{3, 4, 5};
    std::vector<std::uint64_t> seeds;  // default 1..20

    ExperimentConfig();
    const ScenarioConfig& scenario(Pattern p) const { return p == Pattern::Agri ? agri : warehouse; }
    ScenarioConfig& scenario(Pattern p) { return p == Pattern::Agri ? agri : warehouse; }
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Parses `key = value` lines grouped under [common], [agri], [warehouse]
/// and [matrix]. Keys in [common] apply to both scenarios. '#' starts a
/// comment. Throws ConfigError naming the line on bad input.
ExperimentConfig parseConfig(std::string_view text);
ExperimentConfig loadConfig(const std::filesystem::path& path);

/// Canonical config text: every knob with its value, parseable by
/// parseConfig and stable across runs.
std::string canonicalConfig(const ExperimentConfig& config);
std::string canonicalScenario(const ScenarioConfig& scenario);

/// Hex FNV-1a digest of the canonical scenario text plus the run knobs.
std::string configDigest(const ScenarioConfig& scenario, SchedulerKind scheduler, int nNodes);

/// Fixed start layout of a scenario. AGRI: trail offsets and headings.
struct AgriStart {
    double offset;
    Heading heading;
};
std::vector<AgriStart> agriPlacement(const ScenarioConfig& scenario, int nNodes);
std::vector<Position> warehousePlacement(const ScenarioConfig& scenario, int nNodes);

/// Mobility traces for one run; warehouse walks draw from the per-node
/// mobility streams of `seed`.
std::vector<MobilityTrace> makeTraces(const ScenarioConfig& scenario, int nNodes, std::uint64_t seed);

/// Fraction of sample instants (every `stepS`) at which a and b are within
/// range of each other.
double contactFraction(const MobilityTrace& a, const MobilityTrace& b, double rangeM, double stepS = 1.0);

SimConfig simConfig(const ScenarioConfig& scenario, SchedulerKind scheduler, std::uint64_t seed);

struct RunSpec {
    Pattern scenario;
    SchedulerKind scheduler;
    int nNodes;
    std::uint64_t seed;
};

struct RunOutput {
    RunRecord record;
    bool conserved = true;  // packet books balance for every origin
    std::uint64_t unjoinedTransmissions = 0;
};

RunOutput runOne(const ExperimentConfig& config, const RunSpec& spec, std::ostream* eventLog = nullptr);

/// Matrix in deterministic order: scenario, scheduler, node count, seed.
std::vector<RunSpec> matrixSpecs(const ExperimentConfig& config);

/// Runs every spec, `workers` at a time. Results come back in spec order.
/// A failing run aborts the matrix with a std::runtime_error naming it.
std::vector<RunOutput> runMatrix(const ExperimentConfig& config, const std::vector<RunSpec>& specs,
                                 unsigned workers = 1,
                                 const std::function<void(std::size_t done, std::size_t total)>& progress = {});

/// Writes runs.csv, summary.json, manifest.json and the plot CSVs.
void writeOutputs(const std::filesystem::path& dir, const ExperimentConfig& config,
                  const std::vector<RunOutput>& runs);

std::string runsCsv(const std::vector<RunOutput>& runs);
std::string manifestJson(const ExperimentConfig& config, const std::vector<RunOutput>& runs);
/// Config embedded in a manifest written by manifestJson.
ExperimentConfig configFromManifest(std::string_view manifest);

/// Inverse of summaryJson.
std::map<GroupKey, GroupSummary> parseSummaryJson(std::string_view text);
/// Writes plot_<scenario>_<metric>.csv for every scenario and metric.
void writePlotData(const std::filesystem::path& dir, const std::map<GroupKey, GroupSummary>& summary);

/// Active cells of an n-node line (node i's parent is i - 1) for ASNs
/// [first, first + count), as `asn,node,slotframe,slot_offset,channel_offset,option,peer`.
std::string scheduleDump(SchedulerKind kind, const SchedulerParams& params, int nNodes, Asn first, Asn count,
                         std::uint64_t seed = 1);

std::string readFile(const std::filesystem::path& path);
/// Writes through a temporary file and a rename.
void writeFileAtomic(const std::filesystem::path& path, std::string_view content);

}  // namespace tschsim
