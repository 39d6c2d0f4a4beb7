#include "tschsim/mobility.h"

#include <algorithm>
#include <cmath>

namespace tschsim {

double distance(Position a, Position b)
{
    return std::hypot(a.x - b.x, a.y - b.y);
}

bool inFrame(Position p, double frame)
{
    return p.x >= 0.0 && p.x <= frame && p.y >= 0.0 && p.y <= frame;
}

namespace {

Position lerp(Position a, Position b, double f)
{
    return {a.x + (b.x - a.x) * f, a.y + (b.y - a.y) * f};
}

}  // namespace

TrailSpec::TrailSpec(std::vector<Position> polyline) : polyline_(std::move(polyline))
{
    if (polyline_.empty())
        throw std::invalid_argument("trail polyline is empty");
    cumulative_.reserve(polyline_.size());
    cumulative_.push_back(0.0);
    for (std::size_t i = 0; i < polyline_.size(); ++i) {
        if (!inFrame(polyline_[i]))
            throw std::invalid_argument("trail vertex outside the frame");
        if (i > 0)
            cumulative_.push_back(cumulative_.back() + distance(polyline_[i - 1], polyline_[i]));
    }
    if (!(totalLength() > 0.0))
        throw std::invalid_argument("trail has zero length");
}

TrailSpec TrailSpec::defaultTrail()
{
    return TrailSpec({{100.0, 100.0}, {900.0, 100.0}, {900.0, 740.0}});
}

Position TrailSpec::pointAt(double offset) const
{
    offset = std::clamp(offset, 0.0, totalLength());
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), offset);
    if (it == cumulative_.end())
        return polyline_.back();
    const std::size_t i = static_cast<std::size_t>(it - cumulative_.begin()) - 1;
    const double len = cumulative_[i + 1] - cumulative_[i];
    if (len <= 0.0)
        return polyline_[i];
    return lerp(polyline_[i], polyline_[i + 1], (offset - cumulative_[i]) / len);
}

MobilityTrace genAgriTrace(NodeId node, const TrailSpec& trail, double startOffset,
                           Heading heading, double speed, double durationS)
{
    const double total = trail.totalLength();
    if (startOffset < 0.0 || startOffset > total)
        throw std::invalid_argument("start offset outside the trail");
    if (!(speed > 0.0))
        throw std::invalid_argument("speed must be positive");

    MobilityTrace trace{node, {}};
    double s = startOffset;
    double t = 0.0;
    bool forward = heading == Heading::Forward;
    trace.waypoints.push_back({0.0, trail.pointAt(s)});
    const auto& vertices = trail.polyline();
    const std::size_t last = vertices.size() - 1;

    while (t < durationS) {
        if (forward && s >= total)
            forward = false;
        else if (!forward && s <= 0.0)
            forward = true;

        // Next vertex strictly ahead in the direction of travel.
        std::size_t next;
        if (forward) {
            next = 0;
            while (next < last && trail.vertexOffset(next) <= s)
                ++next;
        } else {
            next = last;
            while (next > 0 && trail.vertexOffset(next) >= s)
                --next;
        }
        const double target = trail.vertexOffset(next);
        const double dt = std::abs(target - s) / speed;
        if (t + dt >= durationS) {
            const double travelled = (durationS - t) * speed;
            const double end = forward ? s + travelled : s - travelled;
            trace.waypoints.push_back({durationS, trail.pointAt(end)});
            break;
        }
        t += dt;
        s = target;
        trace.waypoints.push_back({t, vertices[next]});
    }
    return trace;
}

std::vector<Direction> eligibleDirections(Position p, double frame)
{
    std::vector<Direction> dirs;
    dirs.reserve(4);
    if (p.y < frame)
        dirs.push_back(Direction::Up);
    if (p.y > 0.0)
        dirs.push_back(Direction::Down);
    if (p.x > 0.0)
        dirs.push_back(Direction::Left);
    if (p.x < frame)
        dirs.push_back(Direction::Right);
    return dirs;
}

WarehouseLeg drawWarehouseLeg(RngStream& rng, Position from, double frame)
{
    const auto dirs = eligibleDirections(from, frame);
    const Direction d = dirs[rng.uniformChoice(dirs.size())];
    const double len = kMinLegM + kLegStepM * static_cast<double>(rng.uniformChoice(kLegChoices));
    return {d, len};
}

namespace {

Position legEnd(Position from, WarehouseLeg leg, double frame)
{
    Position to = from;
    switch (leg.direction) {
    case Direction::Up: to.y = std::min(frame, from.y + leg.length); break;
    case Direction::Down: to.y = std::max(0.0, from.y - leg.length); break;
    case Direction::Left: to.x = std::max(0.0, from.x - leg.length); break;
    case Direction::Right: to.x = std::min(frame, from.x + leg.length); break;
    }
    return to;
}

}  // namespace

MobilityTrace genWarehouseTrace(NodeId node, RngStream& rng, Position start, double speed,
                                double durationS)
{
    if (!inFrame(start))
        throw std::invalid_argument("warehouse start position outside the frame");
    if (!(speed > 0.0))
        throw std::invalid_argument("speed must be positive");

    MobilityTrace trace{node, {{0.0, start}}};
    Position pos = start;
    double t = 0.0;
    while (t < durationS) {
        const Position to = legEnd(pos, drawWarehouseLeg(rng, pos, kFrameSize), kFrameSize);
        const double dt = distance(pos, to) / speed;
        if (t + dt >= durationS) {
            trace.waypoints.push_back({durationS, lerp(pos, to, (durationS - t) / dt)});
            break;
        }
        t += dt;
        pos = to;
        trace.waypoints.push_back({t, pos});
    }
    return trace;
}

Position positionAt(const MobilityTrace& trace, double t)
{
    const auto& wps = trace.waypoints;
    if (wps.empty())
        throw std::invalid_argument("positionAt: empty trace");
    if (t < 0.0 || t > trace.duration())
        throw std::invalid_argument("positionAt: time outside the trace");
    auto it = std::upper_bound(wps.begin(), wps.end(), t,
                               [](double v, const Waypoint& w) { return v < w.t; });
    const Waypoint& a = *(it - 1);
    if (it == wps.end() || a.t == t)
        return a.pos;
    const Waypoint& b = *it;
    return lerp(a.pos, b.pos, (t - a.t) / (b.t - a.t));
}

Position TraceCursor::at(double t)
{
    const auto& wps = trace_->waypoints;
    if (wps.size() == 1 || t <= wps.front().t)
        return wps.front().pos;
    if (t >= wps.back().t)
        return wps.back().pos;
    if (t < wps[segment_].t)
        segment_ = 0;
    while (segment_ + 1 < wps.size() && wps[segment_ + 1].t <= t)
        ++segment_;
    const Waypoint& a = wps[segment_];
    if (a.t == t)
        return a.pos;
    const Waypoint& b = wps[segment_ + 1];
    return lerp(a.pos, b.pos, (t - a.t) / (b.t - a.t));
}

}  // namespace tschsim
