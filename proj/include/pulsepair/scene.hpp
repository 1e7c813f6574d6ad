#pragma once

// Declarative synthetic observations: AWGN plus injected pulse-pair trains and
// RFI archetypes, rendered either as dual-polarization IQ frames or directly
// as the threshold-event stream the channelizer would produce.
//
// Component powers are in dB relative to the mean noise power of one channel,
// so a component's channel SNR does not depend on the receiver configuration.

#include <complex>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "pulsepair/config.hpp"
#include "pulsepair/types.hpp"

namespace pulsepair::scene {

/// Fixed elliptical polarization of an RFI component.
///
/// axial_ratio is the linear major/minor axis ratio (1 = circular in the
/// `handedness` sense, large = nearly linear, i.e. equal power in L and R).
struct PolarizationState {
  double axial_ratio = 3.0;
  Polarization handedness = Polarization::LCP;

  // Fraction of total power landing in the given circular polarization.
  double power_fraction(Polarization pol) const;
};

/// Orthogonally circular pulse pairs emitted while the beam transits the RA
/// bin containing ra_hours. Each pulse lasts one integration period.
struct PulsePairTrain {
  std::string name;
  double ra_hours = 5.25;
  double freq_hz = 0.0;         // LCP pulse frequency
  double freq_spread_hz = 0.0;  // pulse frequencies drawn uniformly over freq_hz +- spread/2
  double dt_s = 1.0;            // t_RCP - t_LCP
  double df_hz = 300.0;         // f_RCP - f_LCP, |df| >= one channel
  double snr_lcp_db = 15.0;
  double snr_rcp_db = 15.0;
  double pairs_per_transit = 1.0;  // fractional rates accumulate across transits
  std::int64_t start_transit = 0;  // transits before this index emit nothing
  std::int64_t max_pairs = 0;      // 0: unlimited
};

struct CwTone {
  std::string name;
  double freq_hz = 0.0;
  double power_db = 20.0;
  double duty_cycle = 1.0;  // per-frame probability of being on
  PolarizationState polarization;
};

/// Carrier with random-walk phase; two-sided spectral width spread_hz.
struct DopplerSpreadTone {
  std::string name;
  double center_hz = 0.0;
  double spread_hz = 60.0;
  double power_db = 20.0;
  double duty_cycle = 1.0;
  PolarizationState polarization;
};

/// Teeth at absolute multiples k * fundamental_hz, k = first_harmonic ...
/// first_harmonic + tooth_count - 1. Each active tooth lands within
/// +- tooth_width_hz/2 of its nominal frequency, independently per polarization.
struct HarmonicComb {
  std::string name;
  double fundamental_hz = 2.44e6;
  std::int64_t first_harmonic = 0;  // 0: lowest harmonic inside the band
  std::int64_t tooth_count = 1;
  double tooth_width_hz = 400.0;
  double power_db = 20.0;
  double duty_cycle = 0.01;
  PolarizationState polarization;
};

/// Broadband burst filling [freq - bw/2, freq + bw/2] in both polarizations
/// within a single frame, repeated `count` times every interval_s.
struct CoincidentBurst {
  std::string name;
  double start_s = 0.0;  // offset from the observation start
  double freq_hz = 0.0;
  double bandwidth_hz = 2000.0;
  double power_db = 20.0;
  std::int64_t count = 1;
  double interval_s = 60.0;
  PolarizationState polarization{1e6, Polarization::LCP};
};

using SceneComponent = std::variant<PulsePairTrain, CwTone, DopplerSpreadTone, HarmonicComb, CoincidentBurst>;

std::string kind_name(const SceneComponent& c);
std::string component_name(const SceneComponent& c, std::size_t index);

struct SyntheticScene {
  std::vector<SceneComponent> components;
};

/// One integration frame of complex baseband samples per polarization.
struct IqBlock {
  double start_mjd = 0.0;
  double sample_rate_hz = 0.0;
  double center_freq_hz = 0.0;
  std::vector<std::complex<double>> samples_lcp;
  std::vector<std::complex<double>> samples_rcp;
};

/// A component contribution at channel resolution: what the channelizer
/// would report for a noise-free render.
struct PlacedEvent {
  std::int64_t frame = 0;
  std::int64_t bin = 0;
  Polarization pol = Polarization::LCP;
  double snr_db = 0.0;
  std::size_t component = 0;
};

/// Throws ConfigError naming the first component outside the band or with
/// invalid parameters.
void validate_scene(const SyntheticScene& scene, const ObservationConfig& cfg);

/// Deterministic channel-level placement of every component over the
/// configured observation, before the capture threshold is applied.
std::vector<PlacedEvent> place_components(const SyntheticScene& scene, const ObservationConfig& cfg);

struct IqRenderOptions {
  bool add_noise = true;
  std::int64_t first_frame = 0;
};

/// Renders `frames` integration frames. AWGN is scaled so channel powers have
/// mean 1; frame i draws its randomness from (seed, i) only.
std::vector<IqBlock> render_iq(const SyntheticScene& scene, const ObservationConfig& cfg, std::int64_t frames,
                               const IqRenderOptions& options = {});

/// Event-level fast path: Bernoulli background crossings at noise_event_rate
/// per bin-frame-polarization with exponential-tail SNRs above the capture
/// threshold, merged with component placements. Sorted in capture order.
std::vector<ThresholdEvent> render_events(const SyntheticScene& scene, const ObservationConfig& cfg,
                                          double noise_event_rate);

/// Frame ranges [first, last] (inclusive) during which the pointing RA lies
/// in the bin containing ra_hours, in transit order.
std::vector<std::pair<std::int64_t, std::int64_t>> transit_windows(double ra_hours, const ObservationConfig& cfg);

// Scene files: one section per component, e.g.
//   [pulse_pair_train]  [cw_tone]  [doppler_spread_tone]  [harmonic_comb]  [coincident_burst]
SyntheticScene load_scene(const ini::Document& doc);
SyntheticScene load_scene_file(const std::string& path);
std::string format_scene(const SyntheticScene& scene);

}  // namespace pulsepair::scene
