#include "tschsim/experiment.h"

#include <atomic>
#include <charconv>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

namespace tschsim {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep)
{
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos - start)));
        if (pos == std::string_view::npos)
            break;
        start = pos + 1;
    }
    return out;
}

double toDouble(const std::string& s)
{
    double v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw ConfigError("not a number: '" + s + "'");
    return v;
}

std::uint64_t toUnsigned(const std::string& s)
{
    std::uint64_t v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw ConfigError("not a non-negative integer: '" + s + "'");
    return v;
}

bool toBool(const std::string& s)
{
    if (s == "true" || s == "1" || s == "yes")
        return true;
    if (s == "false" || s == "0" || s == "no")
        return false;
    throw ConfigError("not a boolean: '" + s + "'");
}

std::string fmt(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// One scenario knob: how to print it and how to set it from text.
struct Knob {
    const char* key;
    std::string (*get)(const ScenarioConfig&);
    void (*set)(ScenarioConfig&, const std::string&);
};

#define DOUBLE_KNOB(name, field)                                                              \
    Knob{name, [](const ScenarioConfig& c) { return fmt(c.field); },                          \
         [](ScenarioConfig& c, const std::string& v) { c.field = toDouble(v); }}
#define INT_KNOB(name, field, type)                                                           \
    Knob{name, [](const ScenarioConfig& c) { return std::to_string(c.field); },               \
         [](ScenarioConfig& c, const std::string& v) { c.field = static_cast<type>(toUnsigned(v)); }}

const std::vector<Knob>& knobs()
{
    static const std::vector<Knob> table = {
        DOUBLE_KNOB("speed", speed),
        DOUBLE_KNOB("range", rangeM),
        DOUBLE_KNOB("duration_s", durationS),
        DOUBLE_KNOB("slot_s", slotS),
        DOUBLE_KNOB("link_loss", linkLoss),
        Knob{"fhs",
             [](const ScenarioConfig& c) {
                 std::string s;
                 for (Channel ch : c.fhs.channels())
                     s += (s.empty() ? "" : ",") + std::to_string(ch);
                 return s;
             },
             [](ScenarioConfig& c, const std::string& v) {
                 std::vector<Channel> chans;
                 for (const auto& part : split(v, ','))
                     chans.push_back(static_cast<Channel>(toUnsigned(part)));
                 try {
                     c.fhs = Fhs(chans);
                 } catch (const std::invalid_argument& e) {
                     throw ConfigError(e.what());
                 }
             }},
        DOUBLE_KNOB("eb_period_s", mac.ebPeriodS),
        DOUBLE_KNOB("eb_jitter", mac.ebJitter),
        DOUBLE_KNOB("scan_dwell_s", mac.scanDwellS),
        Knob{"scan_order",
             [](const ScenarioConfig& c) {
                 return std::string(c.mac.scanOrder == ScanOrder::Random ? "random" : "cycle");
             },
             [](ScenarioConfig& c, const std::string& v) {
                 if (v == "random")
                     c.mac.scanOrder = ScanOrder::Random;
                 else if (v == "cycle")
                     c.mac.scanOrder = ScanOrder::Cycle;
                 else
                     throw ConfigError("scan_order must be random or cycle");
             }},
        INT_KNOB("queue_capacity", mac.queueCapacity, std::size_t),
        DOUBLE_KNOB("keepalive_s", mac.sync.keepalivePeriodS),
        DOUBLE_KNOB("desync_s", mac.sync.desyncTimeoutS),
        INT_KNOB("max_retx", mac.sync.maxRetx, int),
        INT_KNOB("min_be", mac.sync.minBackoffExponent, int),
        INT_KNOB("max_be", mac.sync.maxBackoffExponent, int),
        DOUBLE_KNOB("traffic_period_s", net.trafficPeriodS),
        DOUBLE_KNOB("traffic_phase_step_s", net.trafficPhaseStepS),
        DOUBLE_KNOB("parent_freshness_s", net.parentFreshnessS),
        INT_KNOB("hop_limit", net.hopLimit, int),
        INT_KNOB("max_rank", net.maxRank, int),
        INT_KNOB("eb_slotframe", schedulerParams.ebLength, std::uint32_t),
        INT_KNOB("broadcast_slotframe", schedulerParams.broadcastLength, std::uint32_t),
        INT_KNOB("unicast_slotframe", schedulerParams.unicastLength, std::uint32_t),
        INT_KNOB("channel_offsets", schedulerParams.channelOffsets, std::uint32_t),
        INT_KNOB("msf_slotframe", schedulerParams.msfLength, std::uint32_t),
        INT_KNOB("msf_window", schedulerParams.msfWindow, std::uint32_t),
        DOUBLE_KNOB("msf_high", schedulerParams.msfHighUsage),
        DOUBLE_KNOB("msf_low", schedulerParams.msfLowUsage),
        INT_KNOB("msf_max_cells", schedulerParams.msfMaxCells, std::uint32_t),
        Knob{"coordinator_static", [](const ScenarioConfig& c) { return std::string(c.coordinatorStatic ? "true" : "false"); },
             [](ScenarioConfig& c, const std::string& v) { c.coordinatorStatic = toBool(v); }},
        Knob{"trail",
             [](const ScenarioConfig& c) {
                 std::string s;
                 for (const auto& p : c.trail)
                     s += (s.empty() ? "" : ";") + fmt(p.x) + "," + fmt(p.y);
                 return s;
             },
             [](ScenarioConfig& c, const std::string& v) {
                 std::vector<Position> pts;
                 for (const auto& vertex : split(v, ';')) {
                     const auto xy = split(vertex, ',');
                     if (xy.size() != 2)
                         throw ConfigError("trail vertex needs x,y: '" + vertex + "'");
                     pts.push_back({toDouble(xy[0]), toDouble(xy[1])});
                 }
                 try {
                     TrailSpec check(pts);
                 } catch (const std::invalid_argument& e) {
                     throw ConfigError(e.what());
                 }
                 c.trail = std::move(pts);
             }},
        DOUBLE_KNOB("agri_spacing", agriSpacingM),
        DOUBLE_KNOB("remote_offset", remoteOffsetM),
        DOUBLE_KNOB("grid_spacing", gridSpacingM),
    };
    return table;
}

#undef DOUBLE_KNOB
#undef INT_KNOB

const Knob* findKnob(const std::string& key)
{
    for (const auto& k : knobs())
        if (key == k.key)
            return &k;
    return nullptr;
}

std::vector<std::uint64_t> parseSeeds(const std::string& v)
{
    std::vector<std::uint64_t> out;
    for (const auto& part : split(v, ',')) {
        const auto dash = part.find('-');
        if (dash == std::string::npos) {
            out.push_back(toUnsigned(part));
            continue;
        }
        const auto lo = toUnsigned(trim(part.substr(0, dash)));
        const auto hi = toUnsigned(trim(part.substr(dash + 1)));
        if (hi < lo)
            throw ConfigError("empty seed range: '" + part + "'");
        for (auto s = lo; s <= hi; ++s)
            out.push_back(s);
    }
    return out;
}

void validate(const ScenarioConfig& c)
{
    if (!(c.speed > 0) || !(c.rangeM > 0) || !(c.slotS > 0) || !(c.durationS > 0))
        throw ConfigError("speed, range, slot and duration must be positive");
    if (c.linkLoss < 0 || c.linkLoss >= 1)
        throw ConfigError("link_loss must be in [0, 1)");
    if (!(c.mac.sync.desyncTimeoutS > c.mac.sync.keepalivePeriodS))
        throw ConfigError("desync_s must exceed keepalive_s");
    if (c.mac.sync.minBackoffExponent < 0 || c.mac.sync.maxBackoffExponent < c.mac.sync.minBackoffExponent ||
        c.mac.sync.maxBackoffExponent > 16)
        throw ConfigError("backoff exponents must satisfy 0 <= min_be <= max_be <= 16");
    const auto& s = c.schedulerParams;
    if (s.ebLength == 0 || s.broadcastLength == 0 || s.unicastLength == 0 || s.channelOffsets == 0 ||
        s.msfLength < 2 || s.msfWindow == 0 || s.msfMaxCells == 0)
        throw ConfigError("slotframe lengths, window and cell caps must be positive");
    if (!(s.msfLowUsage < s.msfHighUsage))
        throw ConfigError("msf_low must be below msf_high");
    if (!(c.net.trafficPeriodS > 0))
        throw ConfigError("traffic_period_s must be positive");
}

std::string hex64(std::uint64_t v)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::uint64_t fnv1a(std::string_view s)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

MobilityTrace staticTrace(NodeId node, Position p, double durationS)
{
    return {node, {{0.0, p}, {durationS, p}}};
}

}  // namespace

ExperimentConfig::ExperimentConfig()
{
    agri.pattern = Pattern::Agri;
    warehouse.pattern = Pattern::Warehouse;
    for (std::uint64_t s = 1; s <= 20; ++s)
        seeds.push_back(s);
}

ExperimentConfig parseConfig(std::string_view text)
{
    ExperimentConfig cfg;
    std::string section = "common";
    std::size_t lineNo = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++lineNo;
        const auto hash = raw.find('#');
        const std::string line = trim(raw.substr(0, hash));
        if (line.empty())
            continue;
        try {
            if (line.front() == '[') {
                if (line.back() != ']')
                    throw ConfigError("unterminated section header");
                section = trim(std::string_view(line).substr(1, line.size() - 2));
                if (section != "common" && section != "agri" && section != "warehouse" && section != "matrix")
                    throw ConfigError("unknown section [" + section + "]");
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw ConfigError("expected key = value");
            const std::string key = trim(std::string_view(line).substr(0, eq));
            const std::string value = trim(std::string_view(line).substr(eq + 1));
            if (section == "matrix") {
                if (key == "scenarios") {
                    cfg.scenarios.clear();
                    for (const auto& p : split(value, ',')) {
                        const auto pat = parsePattern(p);
                        if (!pat)
                            throw ConfigError("unknown scenario '" + p + "'");
                        cfg.scenarios.push_back(*pat);
                    }
                } else if (key == "schedulers") {
                    cfg.schedulers.clear();
                    for (const auto& p : split(value, ',')) {
                        const auto kind = parseSchedulerKind(p);
                        if (!kind)
                            throw ConfigError("unknown scheduler '" + p + "'");
                        cfg.schedulers.push_back(*kind);
                    }
                } else if (key == "nodes") {
                    cfg.nodeCounts.clear();
                    for (const auto& p : split(value, ','))
                        cfg.nodeCounts.push_back(static_cast<int>(toUnsigned(p)));
                } else if (key == "seeds") {
                    cfg.seeds = parseSeeds(value);
                } else {
                    throw ConfigError("unknown matrix key '" + key + "'");
                }
                continue;
            }
            const Knob* knob = findKnob(key);
            if (!knob)
                throw ConfigError("unknown key '" + key + "'");
            if (section != "warehouse")
                knob->set(cfg.agri, value);
            if (section != "agri")
                knob->set(cfg.warehouse, value);
        } catch (const ConfigError& e) {
            throw ConfigError("config line " + std::to_string(lineNo) + ": " + e.what());
        }
    }
    validate(cfg.agri);
    validate(cfg.warehouse);
    for (int n : cfg.nodeCounts)
        if (n < 2 || n > 5)
            throw ConfigError("node counts must be in 2..5");
    return cfg;
}

std::string readFile(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void writeFileAtomic(const std::filesystem::path& path, std::string_view content)
{
    const auto tmp = std::filesystem::path(path.string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw std::runtime_error("cannot write " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out)
            throw std::runtime_error("write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

ExperimentConfig loadConfig(const std::filesystem::path& path)
{
    return parseConfig(readFile(path));
}

std::string canonicalScenario(const ScenarioConfig& scenario)
{
    std::string out;
    for (const auto& k : knobs())
        out += std::string(k.key) + " = " + k.get(scenario) + "\n";
    return out;
}

std::string canonicalConfig(const ExperimentConfig& config)
{
    std::string out = "[matrix]\nscenarios = ";
    for (std::size_t i = 0; i < config.scenarios.size(); ++i)
        out += (i ? "," : "") + std::string(toString(config.scenarios[i]));
    out += "\nschedulers = ";
    for (std::size_t i = 0; i < config.schedulers.size(); ++i)
        out += (i ? "," : "") + std::string(toString(config.schedulers[i]));
    out += "\nnodes = ";
    for (std::size_t i = 0; i < config.nodeCounts.size(); ++i)
        out += (i ? "," : "") + std::to_string(config.nodeCounts[i]);
    out += "\nseeds = ";
    for (std::size_t i = 0; i < config.seeds.size(); ++i)
        out += (i ? "," : "") + std::to_string(config.seeds[i]);
    out += "\n\n[agri]\n" + canonicalScenario(config.agri) + "\n[warehouse]\n" + canonicalScenario(config.warehouse);
    return out;
}

std::string configDigest(const ScenarioConfig& scenario, SchedulerKind scheduler, int nNodes)
{
    const std::string text = "pattern = " + std::string(toString(scenario.pattern)) + "\n" +
                             canonicalScenario(scenario) + "scheduler = " + std::string(toString(scheduler)) +
                             "\nn_nodes = " + std::to_string(nNodes) + "\n";
    return hex64(fnv1a(text));
}

std::vector<AgriStart> agriPlacement(const ScenarioConfig& scenario, int nNodes)
{
    if (nNodes < 2)
        throw std::invalid_argument("the agricultural scenario needs at least 2 nodes");
    const TrailSpec trail(scenario.trail);
    const double end = trail.totalLength();
    std::vector<AgriStart> out;
    out.push_back({0.0, Heading::Forward});
    for (int k = 1; k <= nNodes - 2; ++k)
        out.push_back({std::min(end, k * scenario.agriSpacingM), Heading::Forward});
    const double remote = scenario.remoteOffsetM < 0 ? end : std::min(end, scenario.remoteOffsetM);
    out.push_back({remote, Heading::Backward});
    return out;
}

std::vector<Position> warehousePlacement(const ScenarioConfig& scenario, int nNodes)
{
    if (nNodes < 1 || nNodes > 5)
        throw std::invalid_argument("the warehouse layout holds 1 to 5 nodes");
    const double c = kFrameSize / 2.0;
    const double h = scenario.gridSpacingM / 2.0;
    const std::vector<Position> corners{{c - h, c - h}, {c + h, c - h}, {c - h, c + h}, {c + h, c + h}};
    if (nNodes == 5) {
        std::vector<Position> out{{c, c}};
        out.insert(out.end(), corners.begin(), corners.end());
        return out;
    }
    return {corners.begin(), corners.begin() + nNodes};
}

std::vector<MobilityTrace> makeTraces(const ScenarioConfig& scenario, int nNodes, std::uint64_t seed)
{
    std::vector<MobilityTrace> traces;
    if (scenario.pattern == Pattern::Agri) {
        const TrailSpec trail(scenario.trail);
        const auto starts = agriPlacement(scenario, nNodes);
        for (std::size_t i = 0; i < starts.size(); ++i) {
            const auto id = static_cast<NodeId>(i);
            if (id == kCoordinator && scenario.coordinatorStatic)
                traces.push_back(staticTrace(id, trail.pointAt(starts[i].offset), scenario.durationS));
            else
                traces.push_back(genAgriTrace(id, trail, starts[i].offset, starts[i].heading, scenario.speed,
                                              scenario.durationS));
        }
    } else {
        const auto starts = warehousePlacement(scenario, nNodes);
        for (std::size_t i = 0; i < starts.size(); ++i) {
            const auto id = static_cast<NodeId>(i);
            if (id == kCoordinator && scenario.coordinatorStatic) {
                traces.push_back(staticTrace(id, starts[i], scenario.durationS));
                continue;
            }
            RngStream rng(seed, {StreamTag::Mobility, id});
            traces.push_back(genWarehouseTrace(id, rng, starts[i], scenario.speed, scenario.durationS));
        }
    }
    return traces;
}

double contactFraction(const MobilityTrace& a, const MobilityTrace& b, double rangeM, double stepS)
{
    const double duration = std::min(a.duration(), b.duration());
    TraceCursor ca(&a), cb(&b);
    std::uint64_t samples = 0, contact = 0;
    for (std::uint64_t k = 0;; ++k) {
        const double t = static_cast<double>(k) * stepS;
        if (t > duration)
            break;
        ++samples;
        if (inRange(ca.at(t), cb.at(t), rangeM))
            ++contact;
    }
    return samples ? static_cast<double>(contact) / static_cast<double>(samples) : 0.0;
}

SimConfig simConfig(const ScenarioConfig& scenario, SchedulerKind scheduler, std::uint64_t seed)
{
    SimConfig c;
    c.slotS = scenario.slotS;
    c.durationS = scenario.durationS;
    c.rangeM = scenario.rangeM;
    c.linkLoss = scenario.linkLoss;
    c.fhs = scenario.fhs;
    c.mac = scenario.mac;
    c.net = scenario.net;
    c.scheduler = scheduler;
    c.schedulerParams = scenario.schedulerParams;
    c.seed = seed;
    return c;
}

RunOutput runOne(const ExperimentConfig& config, const RunSpec& spec, std::ostream* eventLog)
{
    const ScenarioConfig& scenario = config.scenario(spec.scenario);
    Simulation sim(simConfig(scenario, spec.scheduler, spec.seed), makeTraces(scenario, spec.nNodes, spec.seed));
    sim.setEventLog(eventLog);
    sim.run();

    RunOutput out;
    out.record.scenario = spec.scenario;
    out.record.scheduler = spec.scheduler;
    out.record.nNodes = spec.nNodes;
    out.record.seed = spec.seed;
    out.record.configDigest = configDigest(scenario, spec.scheduler, spec.nNodes);
    out.record.nodes = sim.finish();
    out.record.eventDigest = sim.eventDigest();
    for (std::size_t i = 0; i < sim.ledger().size(); ++i)
        out.conserved = out.conserved && sim.ledger().balanced(static_cast<NodeId>(i));
    out.unjoinedTransmissions = sim.unjoinedTransmissions();
    return out;
}

std::vector<RunSpec> matrixSpecs(const ExperimentConfig& config)
{
    std::vector<RunSpec> specs;
    for (Pattern p : config.scenarios)
        for (SchedulerKind k : config.schedulers)
            for (int n : config.nodeCounts)
                for (std::uint64_t s : config.seeds)
                    specs.push_back({p, k, n, s});
    return specs;
}

std::vector<RunOutput> runMatrix(const ExperimentConfig& config, const std::vector<RunSpec>& specs,
                                 unsigned workers,
                                 const std::function<void(std::size_t, std::size_t)>& progress)
{
    std::vector<RunOutput> results(specs.size());
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::mutex mu;
    std::size_t done = 0;
    std::string failure;

    auto worker = [&] {
        while (!failed) {
            const std::size_t i = next++;
            if (i >= specs.size())
                return;
            const RunSpec& s = specs[i];
            try {
                results[i] = runOne(config, s);
            } catch (const std::exception& e) {
                std::lock_guard lock(mu);
                if (!failed) {
                    failure = "run " + std::string(toString(s.scenario)) + "/" + std::string(toString(s.scheduler)) +
                              "/" + std::to_string(s.nNodes) + " seed " + std::to_string(s.seed) +
                              " failed: " + e.what();
                    failed = true;
                }
                return;
            }
            std::lock_guard lock(mu);
            ++done;
            if (progress)
                progress(done, specs.size());
        }
    };

    workers = std::max(1u, workers);
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back(worker);
        for (auto& t : pool)
            t.join();
    }
    if (failed)
        throw std::runtime_error(failure);
    return results;
}

std::string runsCsv(const std::vector<RunOutput>& runs)
{
    std::string out(kRunCsvHeader);
    out += '\n';
    for (const auto& r : runs)
        out += runCsvRows(r.record);
    return out;
}

std::string manifestJson(const ExperimentConfig& config, const std::vector<RunOutput>& runs)
{
    ordered_json root;
    root["schema_version"] = 1;
    root["config"] = canonicalConfig(config);
    ordered_json list = ordered_json::array();
    for (const auto& r : runs) {
        ordered_json j;
        j["scenario"] = toString(r.record.scenario);
        j["scheduler"] = toString(r.record.scheduler);
        j["n_nodes"] = r.record.nNodes;
        j["seed"] = r.record.seed;
        j["config_digest"] = r.record.configDigest;
        j["event_digest"] = hex64(r.record.eventDigest);
        list.push_back(j);
    }
    root["runs"] = list;
    return root.dump(2) + "\n";
}

ExperimentConfig configFromManifest(std::string_view manifest)
{
    try {
        const auto j = nlohmann::json::parse(manifest);
        return parseConfig(j.at("config").get<std::string>());
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad manifest: ") + e.what());
    }
}

std::map<GroupKey, GroupSummary> parseSummaryJson(std::string_view text)
{
    std::map<GroupKey, GroupSummary> out;
    try {
        const auto root = nlohmann::json::parse(text);
        if (root.at("schema_version").get<int>() != kSummarySchemaVersion)
            throw ConfigError("unsupported summary schema version");
        auto box = [](const nlohmann::json& j) -> std::optional<BoxStats> {
            if (j.is_null())
                return std::nullopt;
            return BoxStats{j.at("min").get<double>(), j.at("q1").get<double>(), j.at("median").get<double>(),
                            j.at("q3").get<double>(), j.at("max").get<double>(), j.at("n").get<std::size_t>()};
        };
        for (const auto& [label, g] : root.at("groups").items()) {
            const auto scenario = parsePattern(g.at("scenario").get<std::string>());
            const auto scheduler = parseSchedulerKind(g.at("scheduler").get<std::string>());
            if (!scenario || !scheduler)
                throw ConfigError("bad group " + label);
            GroupSummary s;
            s.prr = box(g.at(std::string(toString(Metric::Prr))));
            s.downtime = box(g.at(std::string(toString(Metric::Downtime))));
            s.joinTime = box(g.at(std::string(toString(Metric::JoinTime))));
            s.censored = g.at("join_censored").get<std::size_t>();
            s.runs = g.at("runs").get<std::size_t>();
            out.emplace(GroupKey{*scenario, *scheduler, g.at("n_nodes").get<int>()}, s);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad summary: ") + e.what());
    }
    return out;
}

void writePlotData(const std::filesystem::path& dir, const std::map<GroupKey, GroupSummary>& summary)
{
    std::filesystem::create_directories(dir);
    for (Pattern p : {Pattern::Agri, Pattern::Warehouse})
        for (Metric m : {Metric::Prr, Metric::Downtime, Metric::JoinTime})
            writeFileAtomic(dir / ("plot_" + std::string(toString(p)) + "_" + std::string(toString(m)) + ".csv"),
                            plotCsv(summary, p, m));
}

void writeOutputs(const std::filesystem::path& dir, const ExperimentConfig& config,
                  const std::vector<RunOutput>& runs)
{
    std::filesystem::create_directories(dir);
    std::vector<RunRecord> records;
    records.reserve(runs.size());
    for (const auto& r : runs)
        records.push_back(r.record);
    const auto summary = aggregate(records);
    writeFileAtomic(dir / "runs.csv", runsCsv(runs));
    writeFileAtomic(dir / "summary.json", summaryJson(summary));
    writeFileAtomic(dir / "manifest.json", manifestJson(config, runs));
    writePlotData(dir, summary);
}

std::string scheduleDump(SchedulerKind kind, const SchedulerParams& params, int nNodes, Asn first, Asn count,
                         std::uint64_t seed)
{
    if (nNodes < 1)
        throw std::invalid_argument("schedule dump needs at least one node");
    auto sched = makeScheduler(kind, params, seed);
    const auto& frames = sched->slotframes();
    std::vector<std::vector<NodeId>> children(static_cast<std::size_t>(nNodes));
    for (int i = 1; i < nNodes; ++i)
        children[static_cast<std::size_t>(i - 1)].push_back(static_cast<NodeId>(i));

    auto peer = [](NodeId p) {
        if (p == kBroadcast)
            return std::string("broadcast");
        if (p == kAnyPeer)
            return std::string("any");
        return std::to_string(p);
    };

    std::string out = "asn,node,slotframe,slot_offset,channel_offset,option,peer\n";
    std::vector<Cell> cells;
    for (Asn asn = first; asn < first + count; ++asn) {
        for (int i = 0; i < nNodes; ++i) {
            const auto id = static_cast<NodeId>(i);
            const NodeId parent = i == 0 ? kNoNode : id - 1;
            const NodeContext ctx{id, parent, parent, children[static_cast<std::size_t>(i)]};
            sched->activeCells(ctx, asn, cells);
            for (const Cell& c : cells)
                out += std::to_string(asn) + ',' + std::to_string(id) + ',' + frames.at(c.slotframe).name + ',' +
                       std::to_string(c.slotOffset) + ',' + std::to_string(c.channelOffset) + ',' +
                       cellOptionString(c.options) + ',' + peer(c.peer) + '\n';
        }
    }
    return out;
}

}  // namespace tschsim
