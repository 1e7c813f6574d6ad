#include "pulsepair/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <ctime>
#include <fstream>
#include <json.hpp>
#include <numbers>
#include <sstream>

#include "pulsepair/channelizer.hpp"
#include "pulsepair/io.hpp"
#include "pulsepair/pairing.hpp"
#include "pulsepair/skymodel.hpp"

namespace pulsepair::pipeline {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

class Stopwatch {
 public:
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    return s;
  }

 private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

FileRecord record(const std::string& role, const fs::path& path) {
  return {role, path.string(), io::sha256_file(path)};
}

// Runs body; on failure the manifest is still written, flagged, and the
// exception propagates.
template <class Body>
RunManifest guarded(RunManifest manifest, const fs::path& manifest_path, Body&& body) {
  try {
    body(manifest);
  } catch (const std::exception& e) {
    manifest.error = true;
    manifest.error_message = e.what();
    try {
      if (!manifest_path.empty()) write_manifest(manifest_path, manifest);
    } catch (...) {
    }
    throw;
  }
  write_manifest(manifest_path, manifest);
  return manifest;
}

std::string svg_curve(const stats::BinomialCurve& curve) {
  constexpr double W = 640.0, H = 360.0, M = 40.0;
  double min_log = 0.0;
  for (const auto& pt : curve.points) min_log = std::min(min_log, std::log10(pt.density));
  min_log = std::floor(min_log) - (min_log == 0.0 ? 1.0 : 0.0);
  const double n_max = curve.points.empty() ? 1.0 : static_cast<double>(curve.points.back().n);
  std::ostringstream out;
  out.precision(6);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << M << "\" y=\"20\" font-size=\"14\">RA " << curve.bin.lo_hours << " - " << curve.bin.hi_hours
      << " h: binomial density vs sorted-SNR trial</text>\n"
      << "<line x1=\"" << M << "\" y1=\"" << H - M << "\" x2=\"" << W - M << "\" y2=\"" << H - M
      << "\" stroke=\"black\"/>\n"
      << "<line x1=\"" << M << "\" y1=\"" << M << "\" x2=\"" << M << "\" y2=\"" << H - M << "\" stroke=\"black\"/>\n"
      << "<text x=\"4\" y=\"" << M + 4 << "\" font-size=\"10\">1</text>\n"
      << "<text x=\"4\" y=\"" << H - M << "\" font-size=\"10\">1e" << min_log << "</text>\n"
      << "<text x=\"" << W - M - 20 << "\" y=\"" << H - M + 16 << "\" font-size=\"10\">n=" << n_max << "</text>\n"
      << "<polyline fill=\"none\" stroke=\"steelblue\" points=\"";
  for (const auto& pt : curve.points) {
    const double x = M + (W - 2 * M) * static_cast<double>(pt.n) / n_max;
    const double y = M + (H - 2 * M) * (std::log10(pt.density) / min_log);
    out << x << ',' << y << ' ';
  }
  out << "\"/>\n</svg>\n";
  return out.str();
}

}  // namespace

std::string RunManifest::to_json() const {
  json j;
  j["command"] = command;
  j["version"] = version;
  j["created_utc"] = utc_now();
  j["error"] = error;
  if (error) j["error_message"] = error_message;
  j["config"] = config_snapshot;
  auto files = [](const std::vector<FileRecord>& v) {
    json arr = json::array();
    for (const auto& f : v) arr.push_back({{"role", f.role}, {"path", f.path}, {"sha256", f.sha256}});
    return arr;
  };
  j["inputs"] = files(inputs);
  j["outputs"] = files(outputs);
  json st = json::array();
  for (const auto& s : stages) {
    json row = {{"stage", s.name}, {"events", s.events}};
    if (s.pairs >= 0) row["pairs"] = s.pairs;
    row["seconds"] = s.seconds;
    st.push_back(row);
  }
  j["stages"] = st;
  j["warnings"] = warnings;
  return j.dump(2) + "\n";
}

fs::path manifest_path_for(const fs::path& output) {
  auto p = output;
  p += ".manifest.json";
  return p;
}

void write_manifest(const fs::path& path, const RunManifest& manifest) { io::write_text_file(path, manifest.to_json()); }

std::vector<ThresholdEvent> simulate(const scene::SyntheticScene& scene, const RunConfig& cfg, RenderPath path) {
  cfg.validate();
  if (path == RenderPath::Events) return scene::render_events(scene, cfg.observation, cfg.simulation.noise_event_rate);
  constexpr std::int64_t kChunk = 32;
  const auto frames = cfg.observation.frame_count();
  std::vector<ThresholdEvent> events;
  for (std::int64_t first = 0; first < frames; first += kChunk) {
    const auto count = std::min(kChunk, frames - first);
    const auto blocks = scene::render_iq(scene, cfg.observation, count, {true, first});
    const auto found = capture_events(blocks, cfg.observation);
    events.insert(events.end(), found.begin(), found.end());
  }
  return events;
}

ProcessResult process_events(const std::vector<ThresholdEvent>& events, const RunConfig& cfg,
                             const RfiMask& static_mask) {
  cfg.validate();
  const auto& obs = cfg.observation;
  const BandGrid grid(obs);
  const FrameClock clock(obs);
  ProcessResult r;
  Stopwatch sw;
  auto stage = [&](const std::string& name, std::int64_t n_events, std::int64_t n_pairs = -1) {
    r.stages.push_back({name, n_events, n_pairs, sw.lap()});
  };
  auto count = [](const auto& v) { return static_cast<std::int64_t>(v.size()); };

  for (std::size_t i = 1; i < events.size(); ++i) {
    if (events[i].mjd < events[i - 1].mjd) {
      throw OrderingError("event " + std::to_string(i + 1) + " is earlier than its predecessor");
    }
  }
  stage("input", count(events));
  auto current = apply_mask(events, static_mask);
  stage("static_mask", count(current));
  r.post_mask = build_post_mask(current, grid, clock, obs.frame_count(), cfg.filters.occupancy_threshold);
  current = apply_mask(current, r.post_mask);
  stage("post_mask", count(current));
  DynamicExcisionState state(cfg.filters);
  auto dyn = dynamic_excise(current, state, grid, clock);
  current = std::move(dyn.survivors);
  r.dynamic_trace = std::move(dyn.trace);
  stage("dynamic_iir", count(current));
  current = harmonic_excise(current);
  stage("harmonic", count(current));
  current = edge_dc_excise(current, obs, cfg.filters.resolved_edge_margin(obs), cfg.filters.dc_margin_hz);
  stage("edge_dc", count(current));
  r.matched = match_pairs(current, cfg.pairing, obs);
  stage("pair_match", 2 * count(r.matched), count(r.matched));
  auto spaced = interarrival_filter(r.matched, obs.integration_s);
  stage("interarrival", 2 * count(spaced), count(spaced));
  r.pairs = snr_sort(spaced, cfg.pairing.snr_high_db, cfg.pairing.snr_low_db);
  stage("snr_sort", 2 * count(r.pairs), count(r.pairs));
  return r;
}

RunConfig load_config_or_default(const std::string& path, std::optional<std::uint64_t> seed) {
  RunConfig cfg = path.empty() ? RunConfig{} : load_run_config_file(path);
  if (seed) cfg.observation.seed = *seed;
  cfg.validate();
  return cfg;
}

RunManifest run_simulate(const SimulateArgs& args) {
  RunManifest m;
  m.command = args.path == RenderPath::Iq ? "simulate --iq" : "simulate --events";
  return guarded(std::move(m), manifest_path_for(args.out_events), [&](RunManifest& man) {
    Stopwatch sw;
    const auto cfg = load_config_or_default(args.config_path, args.seed);
    man.config_snapshot = format_run_config(cfg);
    if (!args.config_path.empty()) man.inputs.push_back(record("config", args.config_path));
    scene::SyntheticScene sc;
    if (!args.scene_path.empty()) {
      sc = scene::load_scene_file(args.scene_path);
      man.inputs.push_back(record("scene", args.scene_path));
    }
    scene::validate_scene(sc, cfg.observation);
    const double t_load = sw.lap();
    const auto events = simulate(sc, cfg, args.path);
    man.stages.push_back({"load", 0, -1, t_load});
    man.stages.push_back({"render", static_cast<std::int64_t>(events.size()), -1, sw.lap()});
    io::write_events_file(args.out_events, events);
    man.outputs.push_back(record("events", args.out_events));
  });
}

RunManifest run_process(const ProcessArgs& args) {
  RunManifest m;
  m.command = "process";
  return guarded(std::move(m), manifest_path_for(args.out_pairs), [&](RunManifest& man) {
    const auto cfg = load_config_or_default(args.config_path, args.seed);
    man.config_snapshot = format_run_config(cfg);
    if (!args.config_path.empty()) man.inputs.push_back(record("config", args.config_path));
    std::string mask_path = args.static_mask_path;
    if (mask_path.empty() && !cfg.filters.static_mask_file.empty()) {
      fs::path p = cfg.filters.static_mask_file;
      if (p.is_relative() && !args.config_path.empty()) p = fs::path(args.config_path).parent_path() / p;
      mask_path = p.string();
    }
    RfiMask static_mask;
    if (!mask_path.empty()) {
      static_mask = io::read_mask_file(mask_path, MaskSource::Static);
      man.inputs.push_back(record("static_mask", mask_path));
    }
    const auto events = io::read_events_file(args.events, true);
    man.inputs.push_back(record("events", args.events));
    auto result = process_events(events, cfg, static_mask);
    man.stages = result.stages;

    auto trace_path = args.out_pairs;
    trace_path += ".dynamic_mask.csv";
    auto post_path = args.out_pairs;
    post_path += ".post_mask.csv";
    std::ostringstream trace, post;
    io::write_trace(trace, result.dynamic_trace);
    io::write_mask(post, result.post_mask);
    io::write_pairs_file(args.out_pairs, result.pairs);
    io::write_text_file(trace_path, trace.str());
    io::write_text_file(post_path, post.str());
    man.outputs.push_back(record("pairs", args.out_pairs));
    man.outputs.push_back(record("dynamic_mask_trace", trace_path));
    man.outputs.push_back(record("post_mask", post_path));
  });
}

RunManifest run_analyze(const AnalyzeArgs& args) {
  RunManifest m;
  m.command = "analyze";
  if (args.out_dir.empty()) throw ArgumentError("analyze needs an output directory");
  fs::create_directories(args.out_dir);
  return guarded(std::move(m), args.out_dir / "manifest.json", [&](RunManifest& man) {
    Stopwatch sw;
    const auto cfg = load_config_or_default(args.config_path, std::nullopt);
    man.config_snapshot = format_run_config(cfg);
    if (!args.config_path.empty()) man.inputs.push_back(record("config", args.config_path));
    const auto pairs = io::read_pairs_file(args.pairs);
    man.inputs.push_back(record("pairs", args.pairs));
    man.stages.push_back({"load", 2 * static_cast<std::int64_t>(pairs.size()), static_cast<std::int64_t>(pairs.size()), sw.lap()});

    const auto& a = cfg.analysis;
    const auto report = stats::analyze(pairs, a.event_probability, args.prior);
    man.stages.push_back({"likelihood", 2 * report.total_trials, report.total_trials, sw.lap()});
    if (pairs.empty()) man.warnings.push_back("pair file is empty; every density is 1");

    json rj;
    rj["total_trials"] = report.total_trials;
    rj["event_probability"] = report.p;
    rj["expected_per_bin"] = static_cast<double>(report.total_trials) * report.p;
    if (report.prior) rj["prior"] = *report.prior;
    json bins = json::array();
    for (const auto& b : report.bins) {
      json row = {{"bin", b.bin.index},
                  {"ra_lo_hours", b.bin.lo_hours},
                  {"ra_hi_hours", b.bin.hi_hours},
                  {"min_density", b.min_density},
                  {"n_at_min", b.n_at_min},
                  {"k_at_min", b.k_at_min},
                  {"expected_at_min", static_cast<double>(b.n_at_min) * report.p},
                  {"normalized_likelihood", b.normalized_likelihood},
                  {"direction", b.direction}};
      if (b.posterior) row["posterior"] = *b.posterior;
      bins.push_back(row);
    }
    rj["bins"] = bins;
    const auto counts = stats::bin_counts(pairs);
    rj["bin_counts"] = counts;
    if (report.total_trials >= sky::kRaBinCount) {
      const auto u = stats::uniformity_test(counts);
      rj["uniformity"] = {{"chi_square", u.statistic}, {"dof", u.dof}, {"p_value", u.p_value}};
    } else {
      rj["uniformity"] = nullptr;
      man.warnings.push_back("fewer than 80 trials; uniformity test skipped");
    }
    const auto hist = stats::freq_diff_histogram(pairs, a.freq_diff_bin_hz, a.comb_fundamental_hz, a.comb_tolerance_hz);
    rj["freq_diff"] = {{"differences", hist.differences.size()},
                       {"bin_width_hz", hist.bin_width_hz},
                       {"fundamental_hz", hist.fundamental_hz},
                       {"tolerance_hz", hist.tolerance_hz},
                       {"harmonic_score", hist.harmonic_score}};
    rj["warnings"] = man.warnings;

    std::ostringstream summary, curves, scatter_time, scatter_delta, histogram;
    io::write_summary(summary, report);
    io::write_curves(curves, report.curves);
    scatter_time << "trial,mjd_ref,freq_l_hz,freq_r_hz,ra_hours\n";
    scatter_delta << "trial,dt_s,df_hz\n";
    char buf[160];
    for (const auto& p : pairs) {
      std::snprintf(buf, sizeof buf, "%zu,%.9f,%.3f,%.3f,%.9f\n", p.trial, p.ref_mjd(), p.lcp.rf_freq_hz,
                    p.rcp.rf_freq_hz, p.ra_hours);
      scatter_time << buf;
      std::snprintf(buf, sizeof buf, "%zu,%.5f,%.6f\n", p.trial, p.dt_s, p.df_hz);
      scatter_delta << buf;
    }
    histogram << "lo_hz,count\n";
    for (std::size_t i = 0; i < hist.counts.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.3f,%lld\n", static_cast<double>(i) * hist.bin_width_hz,
                    static_cast<long long>(hist.counts[i]));
      histogram << buf;
    }

    const std::vector<std::pair<std::string, std::string>> files = {
        {"summary.csv", summary.str()},           {"curves.csv", curves.str()},
        {"scatter_mjd_freq.csv", scatter_time.str()}, {"scatter_dt_df.csv", scatter_delta.str()},
        {"freq_diff_hist.csv", histogram.str()},  {"report.json", rj.dump(2) + "\n"}};
    for (const auto& [name, text] : files) {
      io::write_text_file(args.out_dir / name, text);
      man.outputs.push_back(record(name, args.out_dir / name));
    }
    if (args.svg) {
      for (const auto& c : report.curves) {
        if (report.bins[static_cast<std::size_t>(c.bin.index)].k_at_min == 0 && counts[static_cast<std::size_t>(c.bin.index)] == 0) continue;
        char name[32];
        std::snprintf(name, sizeof name, "bin_%02d.svg", c.bin.index);
        io::write_text_file(args.out_dir / name, svg_curve(c));
        man.outputs.push_back(record("svg", args.out_dir / name));
      }
    }
    man.stages.push_back({"report", 2 * report.total_trials, report.total_trials, sw.lap()});
  });
}

CoincidenceReport run_coincidence(const stats::CoincidenceParams& params, std::int64_t trials, std::uint64_t seed) {
  CoincidenceReport r;
  r.mc = stats::df_coincidence_mc(params, trials, seed);
  try {
    r.analytic = stats::df_coincidence_analytic(params);
  } catch (const ArgumentError& e) {
    r.analytic_note = e.what();
  }
  return r;
}

std::vector<std::string> selftest() {
  std::vector<std::string> out;
  auto check = [&](const std::string& name, bool ok, double value) {
    std::ostringstream s;
    s.precision(8);
    s << (ok ? "PASS " : "FAIL ") << name << " (" << value << ")";
    out.push_back(s.str());
  };
  const double p = stats::kDefaultEventProbability;
  const double d = stats::binomial_density(14, 417, p);
  check("binomial_density(14, 417, 1/80) in [6.0e-4, 6.6e-4]", d >= 6.0e-4 && d <= 6.6e-4, d);
  const double nl = stats::normalized_likelihood(14, 417, p);
  check("normalized_likelihood(14, 417, 1/80) in [0.0032, 0.0040]", nl >= 0.0032 && nl <= 0.0040, nl);
  const double post = stats::bayes_update(1e-4, 0.0036);
  check("bayes_update(1e-4, 0.0036) = 3.6e-7 +- 1%", std::abs(post / 3.6e-7 - 1.0) <= 0.01, post);
  check("ra_bin(5.25) is bin 17", sky::ra_bin(5.25).index == 17, sky::ra_bin(5.25).index);
  // Meeus example 12.a: 1987-04-10 0h UT, GMST 13h10m46.3668s.
  const double gmst = sky::mjd_to_lst(46895.0, 0.0);
  const double expect = 13.0 + 10.0 / 60.0 + 46.3668 / 3600.0;
  check("GMST 1987-04-10 0h UT within 1 s", std::abs(gmst - expect) * 3600.0 < 1.0, (gmst - expect) * 3600.0);
  check("1420.000 MHz near a clock harmonic", near_clock_harmonic(1420.0e6), 1420.0e6);
  check("1420.260 MHz clear of clock harmonics", !near_clock_harmonic(1420.26e6), 1420.26e6);

  Channelizer ch(64);
  std::vector<std::complex<double>> tone(64);
  for (std::size_t i = 0; i < tone.size(); ++i) tone[i] = std::polar(1.0, 2.0 * std::numbers::pi * 5.0 * static_cast<double>(i) / 64.0);
  const auto spec = ch.power_spectrum(tone);
  check("DFT tone lands in shifted bin 37", spec[37] > 0.999 * 64.0 * 64.0, spec[37]);

  DynamicExcisionState st(0.02, 0.2, 0.05);
  int passed = 0;
  for (int f = 0; f < 40; ++f) passed += st.observe(0, f) ? 0 : 1;
  check("persistent carrier passes 12 frames", passed == 12, passed);
  return out;
}

}  // namespace pulsepair::pipeline
