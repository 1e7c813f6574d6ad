#include <doctest.h>

#include <array>
#include <cmath>
#include <random>

#include <boost/math/special_functions/gamma.hpp>

#include "pulsepair/scene.hpp"
#include "pulsepair/skymodel.hpp"
#include "pulsepair/types.hpp"

using namespace pulsepair;

namespace {
double hms(double h, double m, double s) { return h + m / 60.0 + s / 3600.0; }
double wrapped_diff_s(double a_hours, double b_hours) {
  return std::remainder(a_hours - b_hours, 24.0) * 3600.0;
}
}  // namespace

TEST_SUITE("skymodel") {
  TEST_CASE("GMST against Meeus worked examples") {
    // 1987 April 10, 0h UT and 19h21m UT.
    CHECK(std::abs(wrapped_diff_s(sky::mjd_to_lst(46895.0, 0.0), hms(13, 10, 46.3668))) < 0.05);
    CHECK(std::abs(wrapped_diff_s(sky::mjd_to_lst(46895.0 + (19.0 + 21.0 / 60.0) / 24.0, 0.0),
                                  hms(8, 34, 57.0896))) < 0.05);
  }

  TEST_CASE("longitude shifts LST by lon/15 hours") {
    const double g = sky::mjd_to_lst(59300.25, 0.0);
    CHECK(std::abs(wrapped_diff_s(sky::mjd_to_lst(59300.25, -71.5), g - 71.5 / 15.0)) < 1e-6);
  }

  TEST_CASE("sidereal periodicity and daily advance") {
    const double t0 = 59300.123;
    const double l0 = sky::mjd_to_lst(t0, -71.5);
    CHECK(std::abs(wrapped_diff_s(sky::mjd_to_lst(t0 + sky::kSiderealDayDays, -71.5), l0)) < 0.1);
    // One solar day advances LST by about 3 min 56.56 s.
    CHECK(wrapped_diff_s(sky::mjd_to_lst(t0 + 1.0, -71.5), l0) == doctest::Approx(236.555).epsilon(1e-4));
    const double half = sky::mjd_to_lst(t0 + 0.5 * sky::kSiderealDayDays, -71.5);
    CHECK(std::abs(std::abs(wrapped_diff_s(half, l0)) - 12 * 3600.0) < 0.1);
  }

  TEST_CASE("out of range MJD") {
    CHECK_THROWS_AS(sky::mjd_to_lst(39999.0, 0.0), RangeError);
    CHECK_THROWS_AS(sky::mjd_to_lst(80001.0, 0.0), RangeError);
    CHECK_THROWS_AS(sky::mjd_to_lst(std::nan(""), 0.0), RangeError);
  }

  TEST_CASE("pointing at a constructed transit") {
    ObservationConfig cfg;
    const double t = sky::next_lst_crossing(cfg.start_mjd, 5.25, cfg.longitude_deg);
    CHECK(t >= cfg.start_mjd);
    CHECK(t < cfg.start_mjd + sky::kSiderealDayDays);
    CHECK(std::abs(wrapped_diff_s(sky::pointing_ra(t, cfg), 5.25)) < 1e-3);
    CHECK(sky::ra_bin(sky::pointing_ra(t, cfg)).index == 17);
  }

  TEST_CASE("RA bin boundaries") {
    CHECK(sky::ra_bin(5.25) == sky::RaBin{17, 5.1, 5.4});
    CHECK(sky::ra_bin(5.1).index == 17);
    CHECK(sky::ra_bin(5.4).index == 18);
    CHECK(sky::ra_bin(std::nextafter(5.4, 0.0)).index == 17);
    CHECK(sky::ra_bin(0.0).index == 0);
    CHECK(sky::ra_bin(24.0).index == 0);
    CHECK(sky::ra_bin(23.999).index == 79);
    CHECK(sky::ra_bin(-0.1).index == 79);
    CHECK(sky::ra_bin(0.3).index == 1);
    CHECK(sky::ra_bin(0.9).index == 3);
    CHECK_THROWS_AS(sky::ra_bin(INFINITY), ArgumentError);
    CHECK_THROWS_AS(sky::ra_bin_by_index(80), ArgumentError);
  }

  TEST_CASE("every decimal edge opens its own bin") {
    for (int i = 0; i < sky::kRaBinCount; ++i) {
      const double edge = i * 3 / 10.0;  // i * 0.3 via an independent decimal route
      CHECK(sky::ra_bin(edge).index == i);
      if (i > 0) CHECK(sky::ra_bin(std::nextafter(edge, -1.0)).index == i - 1);
    }
  }

  TEST_CASE("bins partition [0, 24)") {
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> u(0.0, 24.0);
    std::array<int, sky::kRaBinCount> counts{};
    for (int i = 0; i < 200000; ++i) {
      const double ra = u(gen);
      const auto b = sky::ra_bin(ra);
      REQUIRE(b.lo_hours <= ra);
      REQUIRE(ra < b.hi_hours);
      ++counts[static_cast<std::size_t>(b.index)];
    }
    int total = 0;
    for (int c : counts) total += c;
    CHECK(total == 200000);
  }

  TEST_CASE("pointing RA is uniform over whole sidereal days") {
    ObservationConfig cfg;
    std::mt19937_64 gen(9);
    std::uniform_real_distribution<double> u(0.0, 40.0 * sky::kSiderealDayDays);
    std::array<double, sky::kRaBinCount> counts{};
    const int n = 160000;
    for (int i = 0; i < n; ++i) counts[static_cast<std::size_t>(sky::ra_bin(sky::pointing_ra(cfg.start_mjd + u(gen), cfg)).index)] += 1;
    double chi2 = 0.0;
    const double expect = n / 80.0;
    for (double c : counts) chi2 += (c - expect) * (c - expect) / expect;
    CHECK(boost::math::gamma_q(79.0 / 2.0, chi2 / 2.0) > 0.001);
  }

  TEST_CASE("40-day run visits each bin 40 +- 1 times") {
    ObservationConfig cfg;
    for (int i = 0; i < sky::kRaBinCount; ++i) {
      const auto b = sky::ra_bin_by_index(i);
      const auto windows = scene::transit_windows(0.5 * (b.lo_hours + b.hi_hours), cfg);
      CHECK(std::abs(static_cast<int>(windows.size()) - 40) <= 1);
    }
  }
}
