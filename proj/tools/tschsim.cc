// Command-line front end: single runs, the full matrix, schedule dumps,
// mobility files and plot data.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "tschsim/experiment.h"

using namespace tschsim;

namespace {

struct Common {
    std::string config;
    std::string scheduler;
    std::string scenario = "agri";
    std::vector<int> nodes;
    std::vector<std::uint64_t> seeds;
    std::string outDir = "out";
};

ExperimentConfig loadOrDefault(const std::string& path)
{
    return path.empty() ? ExperimentConfig{} : loadConfig(path);
}

SchedulerKind schedulerOrThrow(const std::string& name)
{
    const auto k = parseSchedulerKind(name);
    if (!k)
        throw CLI::ValidationError("--scheduler", "expected orchestra, alice or msf");
    return *k;
}

Pattern scenarioOrThrow(const std::string& name)
{
    const auto p = parsePattern(name);
    if (!p)
        throw CLI::ValidationError("--scenario", "expected agri or warehouse");
    return *p;
}

void printSummary(const std::vector<RunOutput>& runs)
{
    for (const auto& r : runs) {
        std::printf("%s/%s/%d seed %llu digest %s\n", std::string(toString(r.record.scenario)).c_str(),
                    std::string(toString(r.record.scheduler)).c_str(), r.record.nNodes,
                    static_cast<unsigned long long>(r.record.seed), r.record.configDigest.c_str());
        for (const auto& n : r.record.nodes) {
            std::printf("  node %u%s prr %.4f downtime %.4f join %s tx %llu\n", n.node,
                        n.coordinator ? " (coordinator)" : "", n.prr, n.downtimeFraction,
                        n.joinTimeS ? std::to_string(*n.joinTimeS).c_str() : "censored",
                        static_cast<unsigned long long>(n.txAttempts));
        }
        if (!r.conserved)
            std::printf("  WARNING: packet accounting does not balance\n");
    }
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Slot-synchronous TSCH simulator under node mobility"};
    app.require_subcommand(1);

    Common run;
    bool verbose = false;
    auto* runCmd = app.add_subcommand("run", "Execute a single run");
    runCmd->add_option("--config", run.config, "Config file");
    runCmd->add_option("--scenario", run.scenario, "agri or warehouse");
    runCmd->add_option("--scheduler", run.scheduler, "orchestra, alice or msf")->default_val("orchestra");
    runCmd->add_option("--nodes", run.nodes, "Node count including the coordinator")->default_val(std::vector<int>{3});
    runCmd->add_option("--seed", run.seeds, "Run seed")->default_val(std::vector<std::uint64_t>{1});
    runCmd->add_option("--out-dir", run.outDir, "Output directory");
    runCmd->add_flag("--verbose-trace", verbose, "Write the per-slot event log to events.log");

    Common matrix;
    std::string manifest;
    unsigned workers = 1;
    auto* matrixCmd = app.add_subcommand("matrix", "Execute the scenario x scheduler x nodes x seed matrix");
    matrixCmd->add_option("--config", matrix.config, "Config file");
    matrixCmd->add_option("--manifest", manifest, "Re-run the config embedded in a manifest");
    matrixCmd->add_option("--scheduler", matrix.scheduler, "Restrict to one scheduler");
    matrixCmd->add_option("--nodes", matrix.nodes, "Restrict node counts");
    matrixCmd->add_option("--seed", matrix.seeds, "Restrict seeds");
    matrixCmd->add_option("--out-dir", matrix.outDir, "Output directory");
    matrixCmd->add_option("--workers", workers, "Parallel runs")->default_val(1);
    matrixCmd->get_option("--config")->excludes("--manifest");

    Common dump;
    Asn asnStart = 0;
    Asn asnCount = 0;
    std::string dumpOut;
    auto* dumpCmd = app.add_subcommand("schedule-dump", "Active cells of a line topology as CSV");
    dumpCmd->add_option("--config", dump.config, "Config file (scheduler parameters of the agri section)");
    dumpCmd->add_option("--scheduler", dump.scheduler, "orchestra, alice or msf")->default_val("orchestra");
    dumpCmd->add_option("--nodes", dump.nodes, "Nodes in the line")->default_val(std::vector<int>{3});
    dumpCmd->add_option("--seed", dump.seeds, "Seed for MSF cell draws")->default_val(std::vector<std::uint64_t>{1});
    dumpCmd->add_option("--asn-start", asnStart, "First ASN")->default_val(0);
    dumpCmd->add_option("--asn-count", asnCount, "Number of slots")->default_val(397);
    dumpCmd->add_option("--out", dumpOut, "Output file (default stdout)");

    Common mob;
    std::string mobOut;
    auto* mobCmd = app.add_subcommand("gen-mobility", "Write a scenario's traces as a movement file");
    mobCmd->add_option("--config", mob.config, "Config file");
    mobCmd->add_option("--scenario", mob.scenario, "agri or warehouse");
    mobCmd->add_option("--nodes", mob.nodes, "Node count")->default_val(std::vector<int>{3});
    mobCmd->add_option("--seed", mob.seeds, "Seed")->default_val(std::vector<std::uint64_t>{1});
    mobCmd->add_option("--out", mobOut, "Output file (default stdout)");

    std::string summaryPath;
    std::string plotDir = "out";
    auto* plotCmd = app.add_subcommand("plotdata", "Box-plot CSVs from a summary JSON");
    plotCmd->add_option("--summary", summaryPath, "summary.json (default <out-dir>/summary.json)");
    plotCmd->add_option("--out-dir", plotDir, "Output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*runCmd) {
            ExperimentConfig cfg = loadOrDefault(run.config);
            if (run.nodes.size() != 1 || run.seeds.size() != 1)
                throw CLI::ValidationError("run", "takes exactly one --nodes and one --seed");
            const RunSpec spec{scenarioOrThrow(run.scenario), schedulerOrThrow(run.scheduler), run.nodes[0],
                               run.seeds[0]};
            cfg.scenarios = {spec.scenario};
            cfg.schedulers = {spec.scheduler};
            cfg.nodeCounts = {spec.nNodes};
            cfg.seeds = {spec.seed};
            std::filesystem::create_directories(run.outDir);
            std::ofstream log;
            if (verbose) {
                log.open(std::filesystem::path(run.outDir) / "events.log");
                log << "asn,node,event,detail\n";
            }
            const std::vector<RunOutput> out{runOne(cfg, spec, verbose ? &log : nullptr)};
            writeOutputs(run.outDir, cfg, out);
            printSummary(out);
            return out[0].conserved ? 0 : 1;
        }

        if (*matrixCmd) {
            ExperimentConfig cfg = !manifest.empty() ? configFromManifest(readFile(manifest))
                                                     : loadOrDefault(matrix.config);
            if (!matrix.scheduler.empty())
                cfg.schedulers = {schedulerOrThrow(matrix.scheduler)};
            if (!matrix.nodes.empty())
                cfg.nodeCounts = matrix.nodes;
            if (!matrix.seeds.empty())
                cfg.seeds = matrix.seeds;
            const auto specs = matrixSpecs(cfg);
            const auto out = runMatrix(cfg, specs, workers, [](std::size_t done, std::size_t total) {
                std::fprintf(stderr, "\r%zu/%zu runs", done, total);
                if (done == total)
                    std::fprintf(stderr, "\n");
            });
            writeOutputs(matrix.outDir, cfg, out);
            std::size_t unbalanced = 0;
            for (const auto& r : out)
                unbalanced += r.conserved ? 0 : 1;
            std::printf("%zu runs written to %s\n", out.size(), matrix.outDir.c_str());
            if (unbalanced) {
                std::printf("%zu runs failed the packet accounting audit\n", unbalanced);
                return 1;
            }
            return 0;
        }

        if (*dumpCmd) {
            const ExperimentConfig cfg = loadOrDefault(dump.config);
            if (dump.nodes.size() != 1 || dump.seeds.size() != 1)
                throw CLI::ValidationError("schedule-dump", "takes exactly one --nodes and one --seed");
            const std::string csv = scheduleDump(schedulerOrThrow(dump.scheduler), cfg.agri.schedulerParams,
                                                 dump.nodes[0], asnStart, asnCount, dump.seeds[0]);
            if (dumpOut.empty())
                std::cout << csv;
            else
                writeFileAtomic(dumpOut, csv);
            return 0;
        }

        if (*mobCmd) {
            const ExperimentConfig cfg = loadOrDefault(mob.config);
            if (mob.nodes.size() != 1 || mob.seeds.size() != 1)
                throw CLI::ValidationError("gen-mobility", "takes exactly one --nodes and one --seed");
            const auto& scenario = cfg.scenario(scenarioOrThrow(mob.scenario));
            const std::string text = writeMovementFile(makeTraces(scenario, mob.nodes[0], mob.seeds[0]));
            if (mobOut.empty())
                std::cout << text;
            else
                writeFileAtomic(mobOut, text);
            return 0;
        }

        if (*plotCmd) {
            const std::string path =
                summaryPath.empty() ? (std::filesystem::path(plotDir) / "summary.json").string() : summaryPath;
            writePlotData(plotDir, parseSummaryJson(readFile(path)));
            return 0;
        }
    } catch (const CLI::Error& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
