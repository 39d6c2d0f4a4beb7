#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tschsim/rng.h"
#include "tschsim/types.h"

namespace tschsim {

inline constexpr double kFrameSize = 1000.0;

struct Position {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Position&, const Position&) = default;
};

double distance(Position a, Position b);
bool inFrame(Position p, double frame = kFrameSize);

struct Waypoint {
    double t = 0.0;  // seconds from run start
    Position pos;

    friend bool operator==(const Waypoint&, const Waypoint&) = default;
};

/// Piecewise-linear movement of one node. Waypoint times strictly increase
/// and the last waypoint sits at the end of the run.
struct MobilityTrace {
    NodeId node = 0;
    std::vector<Waypoint> waypoints;

    double duration() const { return waypoints.empty() ? 0.0 : waypoints.back().t; }
};

/// The agricultural trail: an open polyline the vehicles shuttle along.
class TrailSpec {
public:
    explicit TrailSpec(std::vector<Position> polyline);

    /// Two field rows joined at a headland corner, 1440 m long.
    static TrailSpec defaultTrail();

    const std::vector<Position>& polyline() const { return polyline_; }
    double totalLength() const { return cumulative_.back(); }

    /// Point at arc length `offset` (clamped to [0, totalLength]).
    Position pointAt(double offset) const;
    /// Arc length of polyline vertex i.
    double vertexOffset(std::size_t i) const { return cumulative_.at(i); }

private:
    std::vector<Position> polyline_;
    std::vector<double> cumulative_;
};

enum class Heading { Forward, Backward };

/// Ping-pong motion along the trail at constant speed for `durationS`.
MobilityTrace genAgriTrace(NodeId node, const TrailSpec& trail, double startOffset,
                           Heading heading, double speed, double durationS);

enum class Direction { Up, Down, Left, Right };

/// Directions that do not immediately leave the frame from `p`, in the
/// fixed order {Up, Down, Left, Right}. Origin is the bottom-left corner.
std::vector<Direction> eligibleDirections(Position p, double frame = kFrameSize);

/// Leg lengths 50, 60, ..., 500 m.
inline constexpr int kMinLegM = 50;
inline constexpr int kMaxLegM = 500;
inline constexpr int kLegStepM = 10;
inline constexpr int kLegChoices = (kMaxLegM - kMinLegM) / kLegStepM + 1;

struct WarehouseLeg {
    Direction direction;
    double length;  // drawn length, before clamping to the frame
};

/// One leg decision from `from`, drawing direction then length.
WarehouseLeg drawWarehouseLeg(RngStream& rng, Position from, double frame = kFrameSize);

/// Random axis-aligned walk: each leg picks an eligible direction uniformly
/// and a length uniformly from {50, ..., 500} m, clamped at the frame edge.
MobilityTrace genWarehouseTrace(NodeId node, RngStream& rng, Position start, double speed,
                                double durationS);

/// Interpolated position at time t. Throws std::invalid_argument if t is
/// outside [0, duration].
Position positionAt(const MobilityTrace& trace, double t);

/// Monotone sampler over one trace; amortized O(1) per call when queried at
/// non-decreasing times.
class TraceCursor {
public:
    explicit TraceCursor(const MobilityTrace* trace) : trace_(trace) {}
    Position at(double t);

private:
    const MobilityTrace* trace_;
    std::size_t segment_ = 0;
};

class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

/// ns-2 style movement file: `set X_`/`set Y_` per node, then `setdest`
/// commands ordered by time then node id. Floats carry 6 decimals.
std::string writeMovementFile(const std::vector<MobilityTrace>& traces);
/// Inverse of writeMovementFile. Throws ParseError on malformed input.
std::vector<MobilityTrace> readMovementFile(std::string_view text);

}  // namespace tschsim
