#pragma once

#include <cstdint>

#include "tschsim/types.h"

namespace tschsim {

/// Global slot clock. ASN 0 is the slot in which the coordinator starts the
/// network; every node shares this counter once synchronized.
class SimClock {
public:
    SimClock(double slotDurationS = 0.010, double simDurationS = 4 * 3600.0);

    Asn asn() const { return asn_; }
    double slotDuration() const { return slotDurationS_; }
    double simDuration() const { return simDurationS_; }

    /// Number of slots in the run; slots [0, totalSlots()) are executed.
    Asn totalSlots() const { return totalSlots_; }
    bool finished() const { return asn_ >= totalSlots_; }

    /// Moves to the next slot boundary and returns the new ASN.
    /// Throws std::logic_error once the run is over.
    Asn advance();

    double timeOf(Asn asn) const { return static_cast<double>(asn) * slotDurationS_; }
    /// Slot count covering `seconds`, rounded to the nearest slot.
    Asn slotsFor(double seconds) const;

private:
    double slotDurationS_;
    double simDurationS_;
    Asn totalSlots_;
    Asn asn_ = 0;
};

}  // namespace tschsim
