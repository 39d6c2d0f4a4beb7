#include <algorithm>
#include <cstdio>
#include <map>
#include <tuple>

#include "tschsim/mobility.h"

namespace tschsim {

namespace {

constexpr const char* kHeader = "# tschsim movement file v1";

struct SetDest {
    double t;
    NodeId node;
    Position dest;
    double speed;
};

std::string fmt(const char* pattern, auto... args)
{
    char buf[160];
    const int n = std::snprintf(buf, sizeof buf, pattern, args...);
    return std::string(buf, static_cast<std::size_t>(n));
}

}  // namespace

std::string writeMovementFile(const std::vector<MobilityTrace>& traces)
{
    std::vector<const MobilityTrace*> sorted;
    for (const auto& tr : traces)
        sorted.push_back(&tr);
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](auto* a, auto* b) { return a->node < b->node; });

    std::string out = std::string(kHeader) + "\n";
    std::vector<SetDest> cmds;
    for (const auto* tr : sorted) {
        if (tr->waypoints.empty())
            continue;
        const Position p0 = tr->waypoints.front().pos;
        out += fmt("$node_(%u) set X_ %.6f\n", tr->node, p0.x);
        out += fmt("$node_(%u) set Y_ %.6f\n", tr->node, p0.y);
        for (std::size_t i = 0; i + 1 < tr->waypoints.size(); ++i) {
            const Waypoint& a = tr->waypoints[i];
            const Waypoint& b = tr->waypoints[i + 1];
            // A pause has no setdest form; the generators never produce one
            // except a node that stays put for the whole run.
            if (a.pos == b.pos)
                continue;
            cmds.push_back({a.t, tr->node, b.pos, distance(a.pos, b.pos) / (b.t - a.t)});
        }
    }
    std::stable_sort(cmds.begin(), cmds.end(), [](const SetDest& a, const SetDest& b) {
        return std::tie(a.t, a.node) < std::tie(b.t, b.node);
    });
    for (const auto& c : cmds)
        out += fmt("$ns_ at %.6f \"$node_(%u) setdest %.6f %.6f %.6f\"\n", c.t, c.node, c.dest.x,
                   c.dest.y, c.speed);
    return out;
}

std::vector<MobilityTrace> readMovementFile(std::string_view text)
{
    struct Pending {
        bool hasX = false, hasY = false;
        Position start;
        std::vector<SetDest> cmds;
    };
    std::map<NodeId, Pending> nodes;

    std::size_t lineNo = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t eol = std::min(text.find('\n', pos), text.size());
        std::string line(text.substr(pos, eol - pos));
        pos = eol + 1;
        ++lineNo;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#')
            continue;

        unsigned id = 0;
        char axis = 0;
        double a = 0, b = 0, c = 0, d = 0;
        int consumed = -1;
        if (std::sscanf(line.c_str(), " $node_(%u) set %c_ %lf %n", &id, &axis, &a, &consumed) == 3 &&
            consumed == static_cast<int>(line.size()) && (axis == 'X' || axis == 'Y')) {
            auto& p = nodes[id];
            if (axis == 'X') {
                p.start.x = a;
                p.hasX = true;
            } else {
                p.start.y = a;
                p.hasY = true;
            }
            continue;
        }
        consumed = -1;
        if (std::sscanf(line.c_str(), " $ns_ at %lf \"$node_(%u) setdest %lf %lf %lf\" %n", &a, &id,
                        &b, &c, &d, &consumed) == 5 &&
            consumed == static_cast<int>(line.size())) {
            if (a < 0.0 || d <= 0.0)
                throw ParseError(lineNo, "setdest needs time >= 0 and speed > 0");
            auto& p = nodes[id];
            if (!p.cmds.empty() && a < p.cmds.back().t)
                throw ParseError(lineNo, "setdest times go backwards for node " + std::to_string(id));
            p.cmds.push_back({a, id, {b, c}, d});
            continue;
        }
        throw ParseError(lineNo, "unrecognized command: " + line);
    }

    std::vector<MobilityTrace> traces;
    for (auto& [id, p] : nodes) {
        if (!p.hasX || !p.hasY)
            throw ParseError(lineNo, "node " + std::to_string(id) + " lacks an initial X_/Y_");
        MobilityTrace tr{id, {{0.0, p.start}}};
        for (std::size_t i = 0; i < p.cmds.size(); ++i) {
            const SetDest& cmd = p.cmds[i];
            const Position from = tr.waypoints.back().pos;
            // Legs are contiguous: a leg ends where the next command starts.
            const double arrive = i + 1 < p.cmds.size()
                                      ? p.cmds[i + 1].t
                                      : cmd.t + distance(from, cmd.dest) / cmd.speed;
            if (cmd.t > tr.waypoints.back().t)
                tr.waypoints.push_back({cmd.t, from});
            if (!(arrive > tr.waypoints.back().t))
                throw ParseError(lineNo, "zero-length leg for node " + std::to_string(id));
            tr.waypoints.push_back({arrive, cmd.dest});
        }
        traces.push_back(std::move(tr));
    }
    return traces;
}

}  // namespace tschsim
