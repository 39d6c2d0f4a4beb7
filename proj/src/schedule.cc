#include <algorithm>
#include <stdexcept>

#include "tschsim/schedule.h"

namespace tschsim {

std::string cellOptionString(std::uint8_t options)
{
    std::string s;
    auto add = [&](std::uint8_t bit, const char* name) {
        if (!(options & bit))
            return;
        if (!s.empty())
            s += '|';
        s += name;
    };
    add(kCellTx, "TX");
    add(kCellRx, "RX");
    add(kCellShared, "SHARED");
    add(kCellEb, "EB");
    return s;
}

std::string_view toString(SchedulerKind kind)
{
    switch (kind) {
    case SchedulerKind::Orchestra: return "orchestra";
    case SchedulerKind::Alice: return "alice";
    case SchedulerKind::Msf: return "msf";
    }
    return "?";
}

std::optional<SchedulerKind> parseSchedulerKind(std::string_view name)
{
    if (name == "orchestra")
        return SchedulerKind::Orchestra;
    if (name == "alice")
        return SchedulerKind::Alice;
    if (name == "msf")
        return SchedulerKind::Msf;
    return std::nullopt;
}

std::uint64_t mix64(std::uint64_t z)
{
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t linkHash(NodeId from, NodeId to, std::uint64_t asfn, std::uint64_t salt)
{
    const std::uint64_t link = (static_cast<std::uint64_t>(from) << 32) | to;
    return mix64(link ^ mix64(asfn * 2 + salt));
}

std::unique_ptr<Scheduler> makeScheduler(SchedulerKind kind, const SchedulerParams& params,
                                         std::uint64_t seed)
{
    switch (kind) {
    case SchedulerKind::Orchestra: return std::make_unique<OrchestraScheduler>(params);
    case SchedulerKind::Alice: return std::make_unique<AliceScheduler>(params);
    case SchedulerKind::Msf: return std::make_unique<MsfScheduler>(params, seed);
    }
    throw std::invalid_argument("unknown scheduler kind");
}

}  // namespace tschsim
