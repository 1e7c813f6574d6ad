#pragma once

// Drift-scan pointing: a meridian transit telescope points at RA = LST.

#include <cstdint>

#include "pulsepair/config.hpp"

namespace pulsepair::sky {

inline constexpr int kRaBinCount = 80;
inline constexpr double kRaBinWidthHours = 0.3;
// LST hours advanced per solar day.
inline constexpr double kSiderealRateHoursPerDay = 24.06570982441908;
// One mean sidereal day in solar days.
inline constexpr double kSiderealDayDays = 24.0 / kSiderealRateHoursPerDay;

struct RaBin {
  int index = 0;
  double lo_hours = 0.0;
  double hi_hours = 0.0;

  bool operator==(const RaBin&) const = default;
};

/// Local mean sidereal time in hours [0, 24). Valid for mjd in [40000, 80000].
double mjd_to_lst(double mjd, double longitude_east_deg);

double pointing_ra(double mjd, const ObservationConfig& cfg);

/// Half-open 0.3 h bins anchored at RA 0, wrapping modulo 24 h.
RaBin ra_bin(double ra_hours);

RaBin ra_bin_by_index(int index);

/// First mjd >= from_mjd at which LST equals lst_hours.
double next_lst_crossing(double from_mjd, double lst_hours, double longitude_east_deg);

}  // namespace pulsepair::sky
