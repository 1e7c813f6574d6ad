#include "pulsepair/config.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "pulsepair/types.hpp"

namespace pulsepair {

double db_to_ratio(double db) { return std::pow(10.0, db / 10.0); }
double ratio_to_db(double ratio) { return 10.0 * std::log10(ratio); }

void ObservationConfig::validate() const {
  if (!(integration_s > 0.0)) throw ConfigError("integration_s must be > 0");
  if (!(sample_rate_hz > 0.0)) throw ConfigError("sample_rate_hz must be > 0");
  if (!(bandwidth_hz > 0.0) || bandwidth_hz > sample_rate_hz) {
    throw ConfigError("bandwidth_hz must be in (0, sample_rate_hz]");
  }
  if (!(duration_days > 0.0)) throw ConfigError("duration_days must be > 0");
  if (!(capture_snr_db >= 0.0)) throw ConfigError("capture_snr_db must be >= 0");
  const double n = sample_rate_hz * integration_s;
  if (std::llround(n) < 2) throw ConfigError("FFT length round(sample_rate_hz * integration_s) must be >= 2");
  // Channel width must equal 1/T to 1 part in 1e9.
  const double width = sample_rate_hz / static_cast<double>(std::llround(n));
  if (std::abs(width * integration_s - 1.0) > 1e-9) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "sample_rate_hz * integration_s = %.9f is not an integer FFT length; bin width would differ from 1/T",
                  n);
    throw ConfigError(buf);
  }
  if (start_mjd < 40000.0 || start_mjd > 80000.0) throw ConfigError("start_mjd outside [40000, 80000]");
  if (!(pointing_dec_deg >= -90.0 && pointing_dec_deg <= 90.0)) throw ConfigError("pointing_dec_deg outside [-90, 90]");
}

std::size_t ObservationConfig::fft_length() const {
  return static_cast<std::size_t>(std::llround(sample_rate_hz * integration_s));
}

std::int64_t ObservationConfig::frame_count() const {
  return static_cast<std::int64_t>(std::floor(duration_days * kSecondsPerDay / integration_s + 1e-9));
}

BandGrid::BandGrid(const ObservationConfig& cfg)
    : BandGrid(cfg.fft_length(), cfg.sample_rate_hz, cfg.center_freq_hz, cfg.bandwidth_hz) {}

BandGrid::BandGrid(std::size_t n, double sample_rate_hz, double center, double bandwidth_hz)
    : fft_length(n),
      bin_width_hz(sample_rate_hz / static_cast<double>(n)),
      bin0_freq_hz(center - static_cast<double>(n / 2) * (sample_rate_hz / static_cast<double>(n))),
      center_freq_hz(center),
      band_lo_hz(center - 0.5 * bandwidth_hz),
      band_hi_hz(center + 0.5 * bandwidth_hz) {
  const auto nbins = static_cast<std::int64_t>(n);
  first_bin = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::ceil((band_lo_hz - bin0_freq_hz) / bin_width_hz)) - 1);
  while (first_bin < nbins && !in_band(freq_of(first_bin))) ++first_bin;
  last_bin = std::min<std::int64_t>(nbins - 1, static_cast<std::int64_t>(std::floor((band_hi_hz - bin0_freq_hz) / bin_width_hz)) + 1);
  while (last_bin >= 0 && !in_band(freq_of(last_bin))) --last_bin;
}

void RunConfig::validate() const {
  observation.validate();
  if (!(simulation.noise_event_rate >= 0.0 && simulation.noise_event_rate <= 1.0)) {
    throw ConfigError("noise_event_rate must be in [0, 1]");
  }
  const auto& f = filters;
  if (!(f.iir_alpha > 0.0 && f.iir_alpha <= 1.0)) throw ConfigError("iir_alpha must be in (0, 1]");
  if (!(f.iir_theta_off > 0.0 && f.iir_theta_off < f.iir_theta_on && f.iir_theta_on <= 1.0)) {
    throw ConfigError("require 0 < iir_theta_off < iir_theta_on <= 1");
  }
  if (!(f.occupancy_threshold > 0.0 && f.occupancy_threshold < 1.0)) throw ConfigError("occupancy_threshold must be in (0, 1)");
  const double half_bw = 0.5 * observation.bandwidth_hz;
  const double edge = f.resolved_edge_margin(observation);
  if (!(edge >= 0.0 && edge < half_bw)) throw ConfigError("edge_margin_hz must be in [0, bandwidth/2)");
  if (!(f.dc_margin_hz >= 0.0 && f.dc_margin_hz < half_bw)) throw ConfigError("dc_margin_hz must be in [0, bandwidth/2)");
  const auto& p = pairing;
  if (!(p.dt_max_s > 0.0)) throw ConfigError("dt_max_s must be > 0");
  if (!(p.df_min_hz > 0.0 && p.df_min_hz < p.df_max_hz)) throw ConfigError("require 0 < df_min_hz < df_max_hz");
  if (!(analysis.event_probability > 0.0 && analysis.event_probability < 1.0)) {
    throw ConfigError("event_probability must be in (0, 1)");
  }
  if (!(analysis.freq_diff_bin_hz > 0.0)) throw ConfigError("freq_diff_bin_hz must be > 0");
}

RunConfig load_run_config(const ini::Document& doc) {
  RunConfig cfg;
  bool seen[5] = {false, false, false, false, false};
  auto mark = [&](int idx, const ini::Section& s) {
    if (seen[idx]) throw ParseError(doc.source, s.line, "section [" + s.name + "] appears twice");
    seen[idx] = true;
  };

  for (const auto& section : doc.sections) {
    ini::SectionReader r(doc, section);
    if (section.name == "observation") {
      mark(0, section);
      auto& o = cfg.observation;
      o.center_freq_hz = r.get_double("center_freq_hz", o.center_freq_hz);
      o.bandwidth_hz = r.get_double("bandwidth_hz", o.bandwidth_hz);
      o.sample_rate_hz = r.get_double("sample_rate_hz", o.sample_rate_hz);
      o.integration_s = r.get_double("integration_s", o.integration_s);
      o.longitude_deg = r.get_double("longitude_deg", o.longitude_deg);
      o.latitude_deg = r.get_double("latitude_deg", o.latitude_deg);
      o.pointing_dec_deg = r.get_double("pointing_dec_deg", o.pointing_dec_deg);
      o.start_mjd = r.get_double("start_mjd", o.start_mjd);
      o.duration_days = r.get_double("duration_days", o.duration_days);
      o.capture_snr_db = r.get_double("capture_snr_db", o.capture_snr_db);
      o.seed = r.get_uint("seed", o.seed);
    } else if (section.name == "simulation") {
      mark(1, section);
      cfg.simulation.noise_event_rate = r.get_double("noise_event_rate", cfg.simulation.noise_event_rate);
    } else if (section.name == "filters") {
      mark(2, section);
      auto& f = cfg.filters;
      f.iir_alpha = r.get_double("iir_alpha", f.iir_alpha);
      f.iir_theta_on = r.get_double("iir_theta_on", f.iir_theta_on);
      f.iir_theta_off = r.get_double("iir_theta_off", f.iir_theta_off);
      f.occupancy_threshold = r.get_double("occupancy_threshold", f.occupancy_threshold);
      f.edge_margin_hz = r.get_double("edge_margin_hz", f.edge_margin_hz);
      f.dc_margin_hz = r.get_double("dc_margin_hz", f.dc_margin_hz);
      f.static_mask_file = r.get_string("static_mask_file", f.static_mask_file);
    } else if (section.name == "pairing") {
      mark(3, section);
      auto& p = cfg.pairing;
      p.dt_max_s = r.get_double("dt_max_s", p.dt_max_s);
      p.df_min_hz = r.get_double("df_min_hz", p.df_min_hz);
      p.df_max_hz = r.get_double("df_max_hz", p.df_max_hz);
      p.snr_high_db = r.get_double("snr_high_db", p.snr_high_db);
      p.snr_low_db = r.get_double("snr_low_db", p.snr_low_db);
    } else if (section.name == "analysis") {
      mark(4, section);
      auto& a = cfg.analysis;
      a.event_probability = r.get_double("event_probability", a.event_probability);
      a.freq_diff_bin_hz = r.get_double("freq_diff_bin_hz", a.freq_diff_bin_hz);
      a.comb_fundamental_hz = r.get_double("comb_fundamental_hz", a.comb_fundamental_hz);
      a.comb_tolerance_hz = r.get_double("comb_tolerance_hz", a.comb_tolerance_hz);
    } else {
      throw ParseError(doc.source, section.line, "unknown section [" + section.name + "]");
    }
    r.finish();
  }
  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(doc.source + ": " + e.what());
  }
  return cfg;
}

RunConfig load_run_config_file(const std::string& path) { return load_run_config(ini::parse_file(path)); }

std::string format_run_config(const RunConfig& cfg) {
  std::ostringstream out;
  out.precision(17);
  const auto& o = cfg.observation;
  out << "[observation]\n"
      << "center_freq_hz = " << o.center_freq_hz << "\n"
      << "bandwidth_hz = " << o.bandwidth_hz << "\n"
      << "sample_rate_hz = " << o.sample_rate_hz << "\n"
      << "integration_s = " << o.integration_s << "\n"
      << "longitude_deg = " << o.longitude_deg << "\n"
      << "latitude_deg = " << o.latitude_deg << "\n"
      << "pointing_dec_deg = " << o.pointing_dec_deg << "\n"
      << "start_mjd = " << o.start_mjd << "\n"
      << "duration_days = " << o.duration_days << "\n"
      << "capture_snr_db = " << o.capture_snr_db << "\n"
      << "seed = " << o.seed << "\n\n";
  out << "[simulation]\n"
      << "noise_event_rate = " << cfg.simulation.noise_event_rate << "\n\n";
  const auto& f = cfg.filters;
  out << "[filters]\n"
      << "iir_alpha = " << f.iir_alpha << "\n"
      << "iir_theta_on = " << f.iir_theta_on << "\n"
      << "iir_theta_off = " << f.iir_theta_off << "\n"
      << "occupancy_threshold = " << f.occupancy_threshold << "\n"
      << "edge_margin_hz = " << f.edge_margin_hz << "\n"
      << "dc_margin_hz = " << f.dc_margin_hz << "\n";
  if (!f.static_mask_file.empty()) out << "static_mask_file = " << f.static_mask_file << "\n";
  const auto& p = cfg.pairing;
  out << "\n[pairing]\n"
      << "dt_max_s = " << p.dt_max_s << "\n"
      << "df_min_hz = " << p.df_min_hz << "\n"
      << "df_max_hz = " << p.df_max_hz << "\n"
      << "snr_high_db = " << p.snr_high_db << "\n"
      << "snr_low_db = " << p.snr_low_db << "\n\n";
  const auto& a = cfg.analysis;
  out << "[analysis]\n"
      << "event_probability = " << a.event_probability << "\n"
      << "freq_diff_bin_hz = " << a.freq_diff_bin_hz << "\n"
      << "comb_fundamental_hz = " << a.comb_fundamental_hz << "\n"
      << "comb_tolerance_hz = " << a.comb_tolerance_hz << "\n";
  return out.str();
}

}  // namespace pulsepair
