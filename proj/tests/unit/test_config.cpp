#include <doctest.h>

#include "pulsepair/config.hpp"
#include "pulsepair/ini.hpp"
#include "pulsepair/types.hpp"

using namespace pulsepair;

TEST_SUITE("config") {
  TEST_CASE("ini sections, comments and line numbers") {
    const auto doc = ini::parse("# c\n[a]\nx = 1 ; trailing\n\n[b]\ny=+2.5e3\n", "t.ini");
    REQUIRE(doc.sections.size() == 2);
    CHECK(doc.sections[0].entries[0].line == 3);
    ini::SectionReader r(doc, doc.sections[1]);
    CHECK(r.get_double("y", 0.0) == 2500.0);
    r.finish();
  }

  TEST_CASE("ini errors carry the offending line") {
    try {
      ini::parse("[a]\nx = 1\nx = 2\n", "dup.ini");
      FAIL("duplicate key accepted");
    } catch (const ParseError& e) {
      CHECK(e.line() == 3);
    }
    CHECK_THROWS_AS(ini::parse("key_outside = 1\n", "t"), ParseError);
    CHECK_THROWS_AS(ini::parse("[a\n", "t"), ParseError);
    const auto doc = ini::parse("[observation]\nbogus_hz = 3\n", "cfg.ini");
    try {
      load_run_config(doc);
      FAIL("unknown key accepted");
    } catch (const ParseError& e) {
      CHECK(e.line() == 2);
      CHECK(std::string(e.what()).find("bogus_hz") != std::string::npos);
    }
  }

  TEST_CASE("non-numeric value is a parse error") {
    const auto doc = ini::parse("[pairing]\ndt_max_s = three\n", "cfg.ini");
    CHECK_THROWS_AS(load_run_config(doc), ParseError);
  }

  TEST_CASE("defaults validate and round-trip through text") {
    RunConfig cfg;
    cfg.validate();
    CHECK(cfg.observation.fft_length() == 65536);
    CHECK(cfg.observation.sample_rate_hz / 65536.0 == doctest::Approx(3.725).epsilon(1e-12));
    cfg.pairing.df_max_hz = 1234.5;
    cfg.filters.static_mask_file = "m.csv";
    const auto back = load_run_config(ini::parse(format_run_config(cfg), "rt"));
    CHECK(back.pairing.df_max_hz == 1234.5);
    CHECK(back.observation.integration_s == cfg.observation.integration_s);
    CHECK(back.filters.static_mask_file == "m.csv");
    CHECK(back.simulation.noise_event_rate == cfg.simulation.noise_event_rate);
  }

  TEST_CASE("observation invariants") {
    ObservationConfig o;
    o.sample_rate_hz = 1000.3;
    o.bandwidth_hz = 1000.0;
    o.integration_s = 1.0;
    CHECK_THROWS_AS(o.validate(), ConfigError);  // 1000.3 samples per frame
    o = ObservationConfig{};
    o.bandwidth_hz = o.sample_rate_hz * 1.01;
    CHECK_THROWS_AS(o.validate(), ConfigError);
    o = ObservationConfig{};
    o.duration_days = 0.0;
    CHECK_THROWS_AS(o.validate(), ConfigError);
    o = ObservationConfig{};
    o.integration_s = -1.0;
    CHECK_THROWS_AS(o.validate(), ConfigError);
  }

  TEST_CASE("filter invariants") {
    RunConfig cfg;
    cfg.filters.iir_theta_off = 0.3;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = RunConfig{};
    cfg.pairing.df_max_hz = 50.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
  }

  TEST_CASE("band grid layout") {
    const BandGrid g(8, 8.0, 100.0, 8.0);
    CHECK(g.bin_width_hz == 1.0);
    CHECK(g.freq_of(4) == 100.0);  // DC at n/2
    CHECK(g.bin_of(97.0) == 1);
    CHECK(g.first_bin == 0);
    CHECK(g.last_bin == 7);
    const BandGrid narrow(8, 8.0, 100.0, 4.0);
    CHECK(narrow.first_bin == 2);
    CHECK(narrow.last_bin == 6);
  }

  TEST_CASE("AWGN exceedance rate") {
    CHECK(awgn_exceedance_rate(11.8) == doctest::Approx(std::exp(-std::pow(10.0, 1.18))).epsilon(1e-15));
    CHECK(awgn_exceedance_rate(0.0) == doctest::Approx(std::exp(-1.0)));
  }
}
