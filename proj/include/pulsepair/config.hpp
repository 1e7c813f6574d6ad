#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "pulsepair/ini.hpp"

namespace pulsepair {

inline constexpr double kSecondsPerDay = 86400.0;

/// Receiver and observing-run parameters shared by every stage.
///
/// The integration period T sets both the frame cadence and the channel
/// width 1/T, so sample_rate_hz * integration_s must be an integer FFT length.
/// The defaults describe a 244 kHz slice off the 500 kHz clock grid near the
/// hydrogen line, sampled for a 40 day drift scan at -7.6 deg declination.
struct ObservationConfig {
  double center_freq_hz = 1420.25e6;
  double bandwidth_hz = 65536 * 3.725;
  double sample_rate_hz = 65536 * 3.725;
  double integration_s = 1.0 / 3.725;
  double longitude_deg = -71.5;  // east-positive; New Hampshire placeholder
  double latitude_deg = 43.0;
  double pointing_dec_deg = -7.6;
  double start_mjd = 59300.0;
  double duration_days = 40.0;
  double capture_snr_db = 11.8;
  std::uint64_t seed = 1;

  void validate() const;
  std::size_t fft_length() const;
  std::int64_t frame_count() const;
};

/// Frame <-> timestamp conversion at integration-period resolution.
struct FrameClock {
  double start_mjd = 0.0;
  double integration_s = 1.0;

  explicit FrameClock(const ObservationConfig& cfg)
      : start_mjd(cfg.start_mjd), integration_s(cfg.integration_s) {}
  FrameClock(double start, double period) : start_mjd(start), integration_s(period) {}

  double mjd_of(std::int64_t frame) const {
    return start_mjd + static_cast<double>(frame) * integration_s / kSecondsPerDay;
  }
  std::int64_t frame_of(double mjd) const {
    return std::llround((mjd - start_mjd) * kSecondsPerDay / integration_s);
  }
};

/// Channel layout of the channelizer output, ascending in RF frequency with
/// baseband DC at index fft_length/2.
struct BandGrid {
  std::size_t fft_length = 0;
  double bin_width_hz = 0.0;
  double bin0_freq_hz = 0.0;
  double center_freq_hz = 0.0;
  double band_lo_hz = 0.0;
  double band_hi_hz = 0.0;
  std::int64_t first_bin = 0;  // first bin whose center lies in the band
  std::int64_t last_bin = -1;  // last such bin, inclusive

  explicit BandGrid(const ObservationConfig& cfg);
  BandGrid(std::size_t n, double sample_rate_hz, double center_freq_hz, double bandwidth_hz);

  double freq_of(std::int64_t bin) const { return bin0_freq_hz + static_cast<double>(bin) * bin_width_hz; }
  std::int64_t bin_of(double freq_hz) const { return std::llround((freq_hz - bin0_freq_hz) / bin_width_hz); }
  bool bin_in_band(std::int64_t bin) const { return bin >= first_bin && bin <= last_bin; }
  bool in_band(double freq_hz) const { return freq_hz >= band_lo_hz && freq_hz <= band_hi_hz; }
  std::int64_t bins_in_band() const { return last_bin - first_bin + 1; }
};

// Probability that an exponential(mean 1) bin power reaches threshold_db.
inline double awgn_exceedance_rate(double threshold_db) {
  return std::exp(-std::pow(10.0, threshold_db / 10.0));
}

struct SimulationConfig {
  // Background crossings per bin-frame per polarization; defaults to the
  // AWGN exceedance rate at the 11.8 dB capture threshold.
  double noise_event_rate = awgn_exceedance_rate(11.8);
};

struct FilterConfig {
  double iir_alpha = 0.02;
  double iir_theta_on = 0.2;
  double iir_theta_off = 0.05;
  double occupancy_threshold = 0.01;
  double edge_margin_hz = -1.0;  // negative: 1% of bandwidth
  double dc_margin_hz = 100.0;
  std::string static_mask_file;  // empty: no static mask

  double resolved_edge_margin(const ObservationConfig& obs) const {
    return edge_margin_hz < 0.0 ? 0.01 * obs.bandwidth_hz : edge_margin_hz;
  }
};

struct PairingConfig {
  double dt_max_s = 3.0;
  double df_min_hz = 80.0;
  double df_max_hz = 1100.0;
  double snr_high_db = 13.0;
  double snr_low_db = 11.8;
};

struct AnalysisConfig {
  double event_probability = 1.0 / 80.0;
  double freq_diff_bin_hz = 10e3;
  double comb_fundamental_hz = 2.44e6;
  double comb_tolerance_hz = 5e3;
};

struct RunConfig {
  ObservationConfig observation;
  SimulationConfig simulation;
  FilterConfig filters;
  PairingConfig pairing;
  AnalysisConfig analysis;

  void validate() const;
};

// Sections: [observation] [simulation] [filters] [pairing] [analysis]; all
// optional, each at most once, unknown keys rejected.
RunConfig load_run_config(const ini::Document& doc);
RunConfig load_run_config_file(const std::string& path);

// Round-trips through load_run_config.
std::string format_run_config(const RunConfig& cfg);

double db_to_ratio(double db);
double ratio_to_db(double ratio);

}  // namespace pulsepair
