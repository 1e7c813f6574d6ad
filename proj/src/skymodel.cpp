#include "pulsepair/skymodel.hpp"

#include <cmath>
#include <string>

#include "pulsepair/types.hpp"

namespace pulsepair::sky {

namespace {

// GMST at J2000.0 (JD 2451545.0 = MJD 51544.5), hours.
constexpr double kGmstAtJ2000Hours = 18.697374558;
constexpr double kJ2000Mjd = 51544.5;

double wrap24(double h) {
  double r = std::fmod(h, 24.0);
  if (r < 0.0) r += 24.0;
  if (r >= 24.0) r -= 24.0;
  return r;
}

// Decimal bin edge 0.3 * index, correctly rounded.
double bin_edge(int index) { return (3.0 * index) / 10.0; }

}  // namespace

double mjd_to_lst(double mjd, double longitude_east_deg) {
  if (!(mjd >= 40000.0 && mjd <= 80000.0)) {
    throw RangeError("mjd " + std::to_string(mjd) + " outside supported range [40000, 80000]");
  }
  // Reduce the day count before scaling so the fractional day keeps full precision.
  const double days = mjd - kJ2000Mjd;
  const double whole = std::floor(days);
  const double frac = days - whole;
  const double gmst = kGmstAtJ2000Hours + std::fmod(whole * kSiderealRateHoursPerDay, 24.0) +
                      frac * kSiderealRateHoursPerDay;
  return wrap24(gmst + longitude_east_deg / 15.0);
}

double pointing_ra(double mjd, const ObservationConfig& cfg) { return mjd_to_lst(mjd, cfg.longitude_deg); }

RaBin ra_bin(double ra_hours) {
  if (!std::isfinite(ra_hours)) throw ArgumentError("ra_bin: non-finite RA");
  const double ra = wrap24(ra_hours);
  int idx = static_cast<int>(std::floor(ra * 10.0 / 3.0));
  // 0.3 is inexact in binary; snap to the decimal edges of ra_bin_by_index so
  // that e.g. 5.1 h lands in [5.1, 5.4).
  if (idx >= kRaBinCount) idx = kRaBinCount - 1;
  if (idx > 0 && ra < bin_edge(idx)) --idx;
  if (idx + 1 < kRaBinCount && ra >= bin_edge(idx + 1)) ++idx;
  return ra_bin_by_index(idx);
}

RaBin ra_bin_by_index(int index) {
  if (index < 0 || index >= kRaBinCount) throw ArgumentError("RA bin index out of range");
  return RaBin{index, bin_edge(index), bin_edge(index + 1)};
}

double next_lst_crossing(double from_mjd, double lst_hours, double longitude_east_deg) {
  const double lst0 = mjd_to_lst(from_mjd, longitude_east_deg);
  const double delta = wrap24(lst_hours - lst0);
  return from_mjd + delta / kSiderealRateHoursPerDay;
}

}  // namespace pulsepair::sky
