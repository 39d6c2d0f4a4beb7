#include "tschsim/clock.h"

#include <cmath>
#include <stdexcept>

namespace tschsim {

SimClock::SimClock(double slotDurationS, double simDurationS)
    : slotDurationS_(slotDurationS), simDurationS_(simDurationS)
{
    if (!(slotDurationS > 0.0))
        throw std::invalid_argument("slot duration must be positive");
    if (!(simDurationS >= 0.0))
        throw std::invalid_argument("sim duration must be non-negative");
    totalSlots_ = slotsFor(simDurationS);
}

Asn SimClock::advance()
{
    if (finished())
        throw std::logic_error("advance past end of simulation");
    return ++asn_;
}

Asn SimClock::slotsFor(double seconds) const
{
    return static_cast<Asn>(std::llround(seconds / slotDurationS_));
}

}  // namespace tschsim
