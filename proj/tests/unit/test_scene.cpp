#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "pulsepair/channelizer.hpp"
#include "pulsepair/ini.hpp"
#include "pulsepair/scene.hpp"
#include "pulsepair/skymodel.hpp"

using namespace pulsepair;
using namespace pulsepair::scene;

namespace {

ObservationConfig small_config(double seconds, std::size_t n = 4096) {
  ObservationConfig o;
  o.sample_rate_hz = static_cast<double>(n) * 3.725;
  o.bandwidth_hz = o.sample_rate_hz;
  o.duration_days = seconds / kSecondsPerDay;
  o.seed = 23;
  return o;
}

// Kolmogorov-Smirnov distance to the unit exponential.
double ks_exponential(std::vector<double> x) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double cdf = 1.0 - std::exp(-x[i]);
    d = std::max({d, std::abs(cdf - static_cast<double>(i) / n), std::abs(cdf - static_cast<double>(i + 1) / n)});
  }
  return d;
}

std::set<std::tuple<std::int64_t, std::int64_t, int>> keys_above(const std::vector<ThresholdEvent>& ev,
                                                                  const ObservationConfig& cfg, double snr) {
  const BandGrid grid(cfg);
  const FrameClock clock(cfg);
  std::set<std::tuple<std::int64_t, std::int64_t, int>> out;
  for (const auto& e : ev) {
    if (e.snr_db >= snr) out.insert({clock.frame_of(e.mjd), grid.bin_of(e.rf_freq_hz), static_cast<int>(e.pol)});
  }
  return out;
}

}  // namespace

TEST_SUITE("scene") {
  TEST_CASE("polarization power split") {
    CHECK(PolarizationState{1.0, Polarization::LCP}.power_fraction(Polarization::LCP) == 1.0);
    CHECK(PolarizationState{1.0, Polarization::LCP}.power_fraction(Polarization::RCP) == 0.0);
    CHECK(PolarizationState{3.0, Polarization::RCP}.power_fraction(Polarization::RCP) == doctest::Approx(0.8));
    CHECK(PolarizationState{1e9, Polarization::RCP}.power_fraction(Polarization::LCP) == doctest::Approx(0.5));
  }

  TEST_CASE("AWGN channel powers are unit exponentials") {
    const auto cfg = small_config(60.0);
    Channelizer ch(cfg.fft_length());
    std::vector<double> powers;
    for (const auto& b : render_iq({}, cfg, 100)) {
      const auto [l, r] = ch.channelize(b);
      powers.insert(powers.end(), l.powers.begin(), l.powers.end());
    }
    const double n = static_cast<double>(powers.size());
    CHECK(ks_exponential(powers) < 1.63 / std::sqrt(n));  // 1% critical value
    double mean = 0.0;
    for (double p : powers) mean += p / n;
    CHECK(mean == doctest::Approx(1.0).epsilon(4.0 / std::sqrt(n)));
  }

  TEST_CASE("IQ frames depend only on (seed, frame)") {
    const auto cfg = small_config(60.0, 256);
    const auto all = render_iq({}, cfg, 10);
    IqRenderOptions opt;
    opt.first_frame = 7;
    const auto tail = render_iq({}, cfg, 3, opt);
    CHECK(tail[0].samples_lcp == all[7].samples_lcp);
    CHECK(tail[2].samples_rcp == all[9].samples_rcp);
    CHECK(tail[1].start_mjd == all[8].start_mjd);
  }

  TEST_CASE("CW tone SNR and power linearity") {
    const auto cfg = small_config(60.0);
    const BandGrid grid(cfg);
    auto measure = [&](double db) {
      SyntheticScene sc;
      CwTone cw;
      cw.freq_hz = grid.freq_of(1000);
      cw.power_db = db;
      cw.polarization = {1.0, Polarization::LCP};
      sc.components.push_back(cw);
      Channelizer ch(cfg.fft_length());
      double sum = 0.0;
      const auto blocks = render_iq(sc, cfg, 40);
      for (const auto& b : blocks) {
        const auto [l, r] = ch.channelize(b);
        sum += l.powers[1000] / estimate_noise_floor(l);
      }
      return ratio_to_db(sum / static_cast<double>(blocks.size()));
    };
    const double s20 = measure(20.0);
    const double s23 = measure(23.0);
    CHECK(std::abs(s20 - 20.0) < 1.0);
    CHECK(std::abs((s23 - s20) - 3.0) < 0.5);
  }

  TEST_CASE("zero-dt train puts L and R in one frame one df apart") {
    auto cfg = small_config(60.0);
    cfg.duration_days = 1.0;
    cfg.sample_rate_hz = 65536 * 3.725;
    cfg.bandwidth_hz = cfg.sample_rate_hz;
    SyntheticScene sc;
    PulsePairTrain t;
    t.freq_hz = 1420.2e6;
    t.dt_s = 0.0;
    t.df_hz = 300.0;
    sc.components.push_back(t);
    const auto placed = place_components(sc, cfg);
    REQUIRE(placed.size() == 2);
    CHECK(placed[0].frame == placed[1].frame);
    CHECK(placed[0].pol != placed[1].pol);
    const BandGrid grid(cfg);
    const double df = grid.freq_of(placed[1].bin) - grid.freq_of(placed[0].bin);
    CHECK(std::abs(std::abs(df) - 300.0) <= grid.bin_width_hz);
  }

  TEST_CASE("train pulses land while the beam is in the target RA bin") {
    ObservationConfig cfg;
    SyntheticScene sc;
    PulsePairTrain t;
    t.freq_hz = 1420.2e6;
    t.pairs_per_transit = 3.0;
    sc.components.push_back(t);
    const auto events = render_events(sc, cfg, 0.0);
    const auto transits = transit_windows(t.ra_hours, cfg).size();
    CHECK(events.size() == 2 * 3 * transits);
    for (const auto& e : events) CHECK(sky::ra_bin(sky::pointing_ra(e.mjd, cfg)).index == 17);
  }

  TEST_CASE("transit windows hug the bin edges") {
    ObservationConfig cfg;
    cfg.duration_days = 3.0;
    const FrameClock clock(cfg);
    for (const auto& [first, last] : transit_windows(12.05, cfg)) {
      CHECK(sky::ra_bin(sky::pointing_ra(clock.mjd_of(first), cfg)).index == 40);
      CHECK(sky::ra_bin(sky::pointing_ra(clock.mjd_of(last), cfg)).index == 40);
      CHECK(sky::ra_bin(sky::pointing_ra(clock.mjd_of(first - 1), cfg)).index == 39);
      CHECK(sky::ra_bin(sky::pointing_ra(clock.mjd_of(last + 1), cfg)).index == 41);
      CHECK(last - first == doctest::Approx(0.3 / 24.0657 * 86400 * 3.725).epsilon(0.002));
    }
  }

  TEST_CASE("background crossings: count and exponential tail") {
    ObservationConfig cfg;
    cfg.duration_days = 1.0;
    const double rate = 1e-6;
    const auto events = render_events({}, cfg, rate);
    const double expect = 2.0 * static_cast<double>(BandGrid(cfg).bins_in_band()) * static_cast<double>(cfg.frame_count()) * rate;
    CHECK(std::abs(static_cast<double>(events.size()) - expect) < 4.0 * std::sqrt(expect));
    double excess = 0.0;
    for (const auto& e : events) excess += db_to_ratio(e.snr_db) - db_to_ratio(cfg.capture_snr_db);
    excess /= static_cast<double>(events.size());
    CHECK(std::abs(excess - 1.0) < 4.0 / std::sqrt(static_cast<double>(events.size())));
    CHECK(std::is_sorted(events.begin(), events.end(), capture_order));
    CHECK(render_events({}, cfg, 0.0).empty());
  }

  TEST_CASE("event rendering is seeded") {
    ObservationConfig cfg;
    cfg.duration_days = 0.5;
    const auto a = render_events({}, cfg, 1e-6);
    CHECK(a == render_events({}, cfg, 1e-6));
    cfg.seed = 2;
    CHECK(a != render_events({}, cfg, 1e-6));
  }

  TEST_CASE("IQ and event paths agree on strong components") {
    const auto cfg = small_config(300.0);
    const BandGrid grid(cfg);
    SyntheticScene sc;
    PulsePairTrain t;
    t.name = "beacon";
    t.ra_hours = sky::pointing_ra(cfg.start_mjd + 150.0 / kSecondsPerDay, cfg);
    t.freq_hz = grid.freq_of(600);
    t.df_hz = 300.0;
    t.snr_lcp_db = t.snr_rcp_db = 26.0;
    t.pairs_per_transit = 4.0;
    sc.components.push_back(t);
    CwTone cw;
    cw.freq_hz = grid.freq_of(2500);
    cw.power_db = 26.0;
    cw.duty_cycle = 0.2;
    cw.polarization = {1.0, Polarization::RCP};
    sc.components.push_back(cw);
    CoincidentBurst burst;
    burst.freq_hz = grid.freq_of(3300);
    burst.bandwidth_hz = 40.0;
    burst.power_db = 29.0;
    burst.count = 3;
    burst.start_s = 20.0;
    burst.interval_s = 60.0;
    sc.components.push_back(burst);

    const auto via_events = render_events(sc, cfg, 0.0);
    const auto via_iq = capture_events(render_iq(sc, cfg, cfg.frame_count()), cfg);
    const auto a = keys_above(via_events, cfg, 11.8);
    const auto b = keys_above(via_iq, cfg, 20.0);
    CHECK(a.size() > 100);
    CHECK(a == b);
  }

  TEST_CASE("out-of-band component names itself") {
    ObservationConfig cfg;
    SyntheticScene sc;
    CwTone cw;
    cw.name = "stray";
    cw.freq_hz = 1421.0e6;
    sc.components.push_back(cw);
    try {
      validate_scene(sc, cfg);
      FAIL("accepted");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("stray") != std::string::npos);
    }
    PulsePairTrain t;
    t.freq_hz = 1420.2e6;
    t.df_hz = 1.0;  // narrower than a channel
    CHECK_THROWS_AS(validate_scene({{t}}, cfg), ConfigError);
  }

  TEST_CASE("scene files round-trip") {
    const auto sc = load_scene_file(std::string(PULSEPAIR_DATA_DIR) + "/demo_scene.ini");
    CHECK(sc.components.size() == 5);
    const auto text = format_scene(sc);
    CHECK(format_scene(load_scene(ini::parse(text, "rt"))) == text);
    try {
      load_scene(ini::parse("[cw_tone]\nfreq_hz = 1420.2e6\nwobble = 3\n", "s.ini"));
      FAIL("accepted");
    } catch (const ParseError& e) {
      CHECK(e.line() == 3);
    }
    CHECK_THROWS_AS(load_scene(ini::parse("[laser]\n", "s.ini")), ParseError);
    CHECK_THROWS_AS(load_scene(ini::parse("[cw_tone]\nfreq_hz = 1420.2e6\nhandedness = X\n", "s.ini")), ParseError);
  }
}
