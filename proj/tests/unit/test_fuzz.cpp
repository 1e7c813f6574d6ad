#include <doctest.h>

#include <filesystem>
#include <random>
#include <sstream>

#include "pulsepair/config.hpp"
#include "pulsepair/io.hpp"
#include "pulsepair/pipeline.hpp"
#include "pulsepair/scene.hpp"

using namespace pulsepair;
namespace fs = std::filesystem;

namespace {

std::string mutate(std::string s, std::mt19937_64& gen) {
  static const std::string alphabet = ",\"\n\r.-+eE0123456789LRabc \t#[]=;\xEF\xBB\xBF\x00";
  std::uniform_int_distribution<int> op(0, 6);
  const int edits = 1 + static_cast<int>(gen() % 4);
  for (int e = 0; e < edits && !s.empty(); ++e) {
    const std::size_t at = gen() % s.size();
    const char c = alphabet[gen() % alphabet.size()];
    switch (op(gen)) {
      case 0: s[at] = c; break;
      case 1: s.insert(s.begin() + static_cast<long>(at), c); break;
      case 2: s.erase(at, 1 + gen() % 8); break;
      case 3: s.resize(at); break;
      case 4: {
        const auto nl = s.find('\n', at);
        if (nl != std::string::npos) s.insert(nl + 1, s.substr(at, nl + 1 - at));
        break;
      }
      case 5: s.insert(at, "1e999"); break;
      default: s.insert(at, std::string(1 + gen() % 3, c)); break;
    }
  }
  return s;
}

// Runs fn on many mutations of seed_text; only success or ValidationError is acceptable.
template <typename Fn>
void fuzz(const std::string& seed_text, std::uint64_t seed, int rounds, Fn fn) {
  std::mt19937_64 gen(seed);
  int accepted = 0, rejected = 0;
  for (int i = 0; i < rounds; ++i) {
    const auto text = mutate(seed_text, gen);
    try {
      fn(text);
      ++accepted;
    } catch (const ValidationError&) {
      ++rejected;
    } catch (const std::exception& e) {
      FAIL("unexpected " << typeid(e).name() << ": " << e.what() << "\ninput:\n" << text);
    }
  }
  CHECK(rejected > 0);
  MESSAGE(accepted << " accepted, " << rejected << " rejected");
}

const std::string kEvents =
    "mjd,freq_hz,pol,snr_db\n"
    "59300.000003106,1420130000.000,L,13.250000\n"
    "59300.000006212,1420130301.725,R,12.100000\n"
    "59300.125000000,1420200000.500,R,30.000000\n";

const std::string kPairs =
    "trial,mjd_ref,ra_hours,dt_s,df_hz,snr_low_db,snr_high_db,freq_l_hz,freq_r_hz,interarrival_s\n"
    "1,59300.500000000,5.200000000,1.07383,301.725000,13.000000,15.000000,1420210000.000,1420210301.725,\n"
    "2,59301.500000000,5.250000000,-1.07383,-301.725000,12.000000,14.000000,1420210000.000,1420209698.275,86400.0\n";

}  // namespace

TEST_SUITE("fuzz") {
  TEST_CASE("event reader") {
    fuzz(kEvents, 1, 5000, [](const std::string& t) {
      std::istringstream in(t);
      io::read_events(in, "fuzz.csv");
    });
  }

  TEST_CASE("pair reader and analysis") {
    fuzz(kPairs, 2, 5000, [](const std::string& t) {
      std::istringstream in(t);
      const auto pairs = io::read_pairs(in, "fuzz.csv");
      stats::analyze(pairs);
    });
  }

  TEST_CASE("mask reader") {
    fuzz("lo_hz,hi_hz,label\n1420190000,1420210000,\"radar, A\"\n1420300000,1420300100,x\n", 3, 3000,
         [](const std::string& t) {
           std::istringstream in(t);
           io::read_mask(in, "fuzz.csv");
         });
  }

  TEST_CASE("config and scene files") {
    const std::string cfg_text = format_run_config(RunConfig{});
    fuzz(cfg_text, 4, 3000, [](const std::string& t) { load_run_config(ini::parse(t, "fuzz.ini")); });
    const std::string scene_text =
        "[pulse_pair_train]\nname = b\nra_hours = 5.25\nfreq_hz = 1420.21e6\ndt_s = 1\ndf_hz = 300\n"
        "[cw_tone]\nfreq_hz = 1420.3e6\npower_db = 25\nduty_cycle = 0.1\naxial_ratio = 3\nhandedness = R\n";
    ObservationConfig obs;
    obs.duration_days = 0.01;
    fuzz(scene_text, 5, 3000, [&](const std::string& t) {
      const auto sc = scene::load_scene(ini::parse(t, "fuzz.ini"));
      scene::validate_scene(sc, obs);
    });
  }

  TEST_CASE("process run on corrupted events leaves an error manifest") {
    const auto dir = fs::temp_directory_path() / "pulsepair_fuzz_process";
    fs::create_directories(dir);
    std::mt19937_64 gen(6);
    int errors = 0;
    for (int i = 0; i < 60; ++i) {
      const auto events = dir / "events.csv";
      io::write_text_file(events, mutate(kEvents, gen));
      const auto out = dir / "pairs.csv";
      fs::remove(out);
      pipeline::ProcessArgs args;
      args.events = events;
      args.out_pairs = out;
      try {
        pipeline::run_process(args);
        CHECK(fs::exists(out));
      } catch (const ValidationError&) {
        ++errors;
        CHECK_FALSE(fs::exists(out));
        CHECK(io::read_text_file(pipeline::manifest_path_for(out)).find("\"error\": true") != std::string::npos);
      }
    }
    CHECK(errors > 0);
  }
}
