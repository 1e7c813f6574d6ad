#include "pulsepair/scene.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <thread>

#include "pulsepair/rng.hpp"
#include "pulsepair/skymodel.hpp"

namespace pulsepair::scene {

namespace {

constexpr std::int64_t kNoiseBlockFrames = 4096;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

[[noreturn]] void reject(const SceneComponent& c, std::size_t index, const std::string& why) {
  throw ConfigError("scene component '" + component_name(c, index) + "' (" + kind_name(c) + "): " + why);
}

void check_in_band(const SceneComponent& c, std::size_t index, const BandGrid& grid, double lo, double hi,
                   const char* what) {
  if (!(std::isfinite(lo) && std::isfinite(hi)) || lo < grid.band_lo_hz || hi > grid.band_hi_hz) {
    std::ostringstream msg;
    msg.precision(12);
    msg << what << " [" << lo << ", " << hi << "] Hz outside band [" << grid.band_lo_hz << ", " << grid.band_hi_hz
        << "] Hz";
    reject(c, index, msg.str());
  }
}

void check_polarization(const SceneComponent& c, std::size_t index, const PolarizationState& p) {
  if (!(p.axial_ratio >= 1.0)) reject(c, index, "axial_ratio must be >= 1");
}

void check_duty(const SceneComponent& c, std::size_t index, double duty) {
  if (!(duty >= 0.0 && duty <= 1.0)) reject(c, index, "duty_cycle must be in [0, 1]");
}

std::int64_t comb_first_harmonic(const HarmonicComb& comb, const BandGrid& grid) {
  if (comb.first_harmonic > 0) return comb.first_harmonic;
  return static_cast<std::int64_t>(std::ceil((grid.band_lo_hz + 0.5 * comb.tooth_width_hz) / comb.fundamental_hz));
}

// Frames at which a duty-cycled component is on, drawn by geometric skipping.
template <class Fn>
void for_each_active_frame(double duty, std::int64_t frames, rng::Engine& eng, Fn&& fn) {
  if (duty <= 0.0) return;
  if (duty >= 1.0) {
    for (std::int64_t f = 0; f < frames; ++f) fn(f);
    return;
  }
  const double log_q = std::log1p(-duty);
  std::int64_t f = -1;
  while (true) {
    const auto skip = rng::geometric_skip(eng, log_q);
    if (skip >= static_cast<std::uint64_t>(frames)) break;
    f += static_cast<std::int64_t>(skip) + 1;
    if (f >= frames) break;
    fn(f);
  }
}

void add_polarized(std::vector<PlacedEvent>& out, std::int64_t frame, std::int64_t bin, double power_db,
                   const PolarizationState& pol, std::size_t comp) {
  for (auto p : {Polarization::LCP, Polarization::RCP}) {
    const double frac = pol.power_fraction(p);
    if (frac <= 0.0) continue;
    out.push_back(PlacedEvent{frame, bin, p, power_db + ratio_to_db(frac), comp});
  }
}

void place_train(const PulsePairTrain& t, std::size_t comp, const ObservationConfig& cfg, const BandGrid& grid,
                 std::vector<PlacedEvent>& out) {
  auto eng = rng::substream(cfg.seed, rng::Stream::ComponentBase, comp);
  const auto dt_frames = std::llround(t.dt_s / cfg.integration_s);
  const auto df_bins = std::llround(t.df_hz / grid.bin_width_hz);
  const auto windows = transit_windows(t.ra_hours, cfg);
  std::int64_t emitted = 0;
  for (std::size_t k = 0; k < windows.size(); ++k) {
    const auto transit = static_cast<std::int64_t>(k);
    if (transit < t.start_transit) continue;
    const auto rel = static_cast<double>(transit - t.start_transit);
    const auto count = static_cast<std::int64_t>(std::floor((rel + 1.0) * t.pairs_per_transit) -
                                                 std::floor(rel * t.pairs_per_transit));
    const auto [first, last] = windows[k];
    const std::int64_t lo = first + std::max<std::int64_t>(0, -dt_frames);
    const std::int64_t hi = last - std::max<std::int64_t>(0, dt_frames);
    if (count <= 0 || lo > hi) continue;
    const std::int64_t span = hi - lo + 1;
    for (std::int64_t j = 0; j < count; ++j) {
      if (t.max_pairs > 0 && emitted >= t.max_pairs) return;
      const std::int64_t anchor =
          lo + static_cast<std::int64_t>(std::floor((static_cast<double>(j) + 0.5) * static_cast<double>(span) /
                                                    static_cast<double>(count)));
      const double f = t.freq_hz + t.freq_spread_hz * (rng::uniform01(eng) - 0.5);
      const auto bin_l = grid.bin_of(f);
      out.push_back(PlacedEvent{anchor, bin_l, Polarization::LCP, t.snr_lcp_db, comp});
      out.push_back(PlacedEvent{anchor + dt_frames, bin_l + df_bins, Polarization::RCP, t.snr_rcp_db, comp});
      ++emitted;
    }
  }
}

std::vector<std::int64_t> burst_frames(const CoincidentBurst& b, const ObservationConfig& cfg) {
  std::vector<std::int64_t> frames;
  const auto total = cfg.frame_count();
  for (std::int64_t i = 0; i < b.count; ++i) {
    const auto f = std::llround((b.start_s + static_cast<double>(i) * b.interval_s) / cfg.integration_s);
    if (f >= 0 && f < total) frames.push_back(f);
  }
  return frames;
}

void place_burst(const CoincidentBurst& b, std::size_t comp, const ObservationConfig& cfg, const BandGrid& grid,
                 std::vector<PlacedEvent>& out) {
  const auto lo = grid.bin_of(b.freq_hz - 0.5 * b.bandwidth_hz);
  const auto hi = grid.bin_of(b.freq_hz + 0.5 * b.bandwidth_hz);
  for (auto f : burst_frames(b, cfg)) {
    for (auto bin = lo; bin <= hi; ++bin) add_polarized(out, f, bin, b.power_db, b.polarization, comp);
  }
}

}  // namespace

double PolarizationState::power_fraction(Polarization pol) const {
  // Circular amplitudes a_major, a_minor with AR = (a_major + a_minor) / (a_major - a_minor).
  const double r = std::isinf(axial_ratio) ? 1.0 : (axial_ratio - 1.0) / (axial_ratio + 1.0);
  const double major = 1.0 / (1.0 + r * r);
  return pol == handedness ? major : 1.0 - major;
}

std::string kind_name(const SceneComponent& c) {
  return std::visit(overloaded{
                        [](const PulsePairTrain&) { return std::string("pulse_pair_train"); },
                        [](const CwTone&) { return std::string("cw_tone"); },
                        [](const DopplerSpreadTone&) { return std::string("doppler_spread_tone"); },
                        [](const HarmonicComb&) { return std::string("harmonic_comb"); },
                        [](const CoincidentBurst&) { return std::string("coincident_burst"); },
                    },
                    c);
}

std::string component_name(const SceneComponent& c, std::size_t index) {
  const std::string name = std::visit([](const auto& x) { return x.name; }, c);
  return name.empty() ? kind_name(c) + "#" + std::to_string(index) : name;
}

void validate_scene(const SyntheticScene& scene, const ObservationConfig& cfg) {
  cfg.validate();
  const BandGrid grid(cfg);
  for (std::size_t i = 0; i < scene.components.size(); ++i) {
    const auto& c = scene.components[i];
    std::visit(overloaded{
                   [&](const PulsePairTrain& t) {
                     if (!std::isfinite(t.ra_hours)) reject(c, i, "ra_hours must be finite");
                     if (!(t.freq_spread_hz >= 0.0)) reject(c, i, "freq_spread_hz must be >= 0");
                     if (!std::isfinite(t.dt_s)) reject(c, i, "dt_s must be finite");
                     if (!(std::abs(t.df_hz) >= grid.bin_width_hz * (1.0 - 1e-9))) {
                       reject(c, i, "|df_hz| must be at least one channel width");
                     }
                     if (!(std::isfinite(t.snr_lcp_db) && std::isfinite(t.snr_rcp_db))) reject(c, i, "SNRs must be finite");
                     if (!(t.pairs_per_transit >= 0.0)) reject(c, i, "pairs_per_transit must be >= 0");
                     if (t.start_transit < 0 || t.max_pairs < 0) reject(c, i, "start_transit and max_pairs must be >= 0");
                     const double h = 0.5 * t.freq_spread_hz;
                     check_in_band(c, i, grid, t.freq_hz - h, t.freq_hz + h, "LCP frequency range");
                     check_in_band(c, i, grid, t.freq_hz + t.df_hz - h, t.freq_hz + t.df_hz + h, "RCP frequency range");
                   },
                   [&](const CwTone& t) {
                     check_in_band(c, i, grid, t.freq_hz, t.freq_hz, "frequency");
                     check_duty(c, i, t.duty_cycle);
                     check_polarization(c, i, t.polarization);
                   },
                   [&](const DopplerSpreadTone& t) {
                     if (!(t.spread_hz >= 0.0)) reject(c, i, "spread_hz must be >= 0");
                     check_in_band(c, i, grid, t.center_hz - 0.5 * t.spread_hz, t.center_hz + 0.5 * t.spread_hz,
                                   "spread range");
                     check_duty(c, i, t.duty_cycle);
                     check_polarization(c, i, t.polarization);
                   },
                   [&](const HarmonicComb& t) {
                     if (!(t.fundamental_hz > 0.0)) reject(c, i, "fundamental_hz must be > 0");
                     if (t.tooth_count < 1) reject(c, i, "tooth_count must be >= 1");
                     if (!(t.tooth_width_hz >= 0.0)) reject(c, i, "tooth_width_hz must be >= 0");
                     const auto k0 = comb_first_harmonic(t, grid);
                     const double lo = static_cast<double>(k0) * t.fundamental_hz - 0.5 * t.tooth_width_hz;
                     const double hi = static_cast<double>(k0 + t.tooth_count - 1) * t.fundamental_hz + 0.5 * t.tooth_width_hz;
                     check_in_band(c, i, grid, lo, hi, "teeth");
                     check_duty(c, i, t.duty_cycle);
                     check_polarization(c, i, t.polarization);
                   },
                   [&](const CoincidentBurst& t) {
                     if (!(t.bandwidth_hz >= 0.0)) reject(c, i, "bandwidth_hz must be >= 0");
                     if (t.count < 1) reject(c, i, "count must be >= 1");
                     if (t.count > 1 && !(t.interval_s > 0.0)) reject(c, i, "interval_s must be > 0 when count > 1");
                     if (!(t.start_s >= 0.0)) reject(c, i, "start_s must be >= 0");
                     check_in_band(c, i, grid, t.freq_hz - 0.5 * t.bandwidth_hz, t.freq_hz + 0.5 * t.bandwidth_hz,
                                   "burst range");
                     check_polarization(c, i, t.polarization);
                   },
               },
               c);
  }
}

std::vector<std::pair<std::int64_t, std::int64_t>> transit_windows(double ra_hours, const ObservationConfig& cfg) {
  const auto bin = sky::ra_bin(ra_hours);
  const FrameClock clock(cfg);
  const auto total = cfg.frame_count();
  const double end_mjd = cfg.start_mjd + cfg.duration_days;
  const double window_days = (bin.hi_hours - bin.lo_hours) / sky::kSiderealRateHoursPerDay;
  const double first_entry = sky::next_lst_crossing(cfg.start_mjd - sky::kSiderealDayDays, bin.lo_hours, cfg.longitude_deg);
  const double frames_per_day = kSecondsPerDay / cfg.integration_s;

  auto in_bin = [&](std::int64_t f) { return sky::ra_bin(sky::pointing_ra(clock.mjd_of(f), cfg)).index == bin.index; };

  std::vector<std::pair<std::int64_t, std::int64_t>> out;
  for (std::int64_t k = 0;; ++k) {
    const double enter = first_entry + static_cast<double>(k) * sky::kSiderealDayDays;
    if (enter >= end_mjd) break;
    const double lo = std::max(enter, cfg.start_mjd);
    const double hi = std::min(enter + window_days, end_mjd);
    if (hi <= lo) continue;
    auto first = static_cast<std::int64_t>(std::ceil((lo - cfg.start_mjd) * frames_per_day)) - 1;
    auto last = static_cast<std::int64_t>(std::ceil((hi - cfg.start_mjd) * frames_per_day));
    first = std::clamp<std::int64_t>(first, 0, total - 1);
    last = std::clamp<std::int64_t>(last, 0, total - 1);
    while (first <= last && !in_bin(first)) ++first;
    while (last >= first && !in_bin(last)) --last;
    if (first <= last) out.emplace_back(first, last);
  }
  return out;
}

std::vector<PlacedEvent> place_components(const SyntheticScene& scene, const ObservationConfig& cfg) {
  validate_scene(scene, cfg);
  const BandGrid grid(cfg);
  const auto frames = cfg.frame_count();
  std::vector<PlacedEvent> out;

  for (std::size_t ci = 0; ci < scene.components.size(); ++ci) {
    auto eng = rng::substream(cfg.seed, rng::Stream::ComponentBase, ci);
    std::visit(overloaded{
                   [&](const PulsePairTrain& t) { place_train(t, ci, cfg, grid, out); },
                   [&](const CwTone& t) {
                     const auto bin = grid.bin_of(t.freq_hz);
                     for_each_active_frame(t.duty_cycle, frames, eng, [&](std::int64_t f) {
                       add_polarized(out, f, bin, t.power_db, t.polarization, ci);
                     });
                   },
                   [&](const DopplerSpreadTone& t) {
                     auto jitter = rng::substream(cfg.seed, rng::Stream::ComponentBase, ci, 1);
                     for_each_active_frame(t.duty_cycle, frames, eng, [&](std::int64_t f) {
                       for (auto p : {Polarization::LCP, Polarization::RCP}) {
                         const double frac = t.polarization.power_fraction(p);
                         const double freq = t.center_hz + t.spread_hz * (rng::uniform01(jitter) - 0.5);
                         if (frac > 0.0) out.push_back(PlacedEvent{f, grid.bin_of(freq), p, t.power_db + ratio_to_db(frac), ci});
                       }
                     });
                   },
                   [&](const HarmonicComb& t) {
                     const auto k0 = comb_first_harmonic(t, grid);
                     for (std::int64_t tooth = 0; tooth < t.tooth_count; ++tooth) {
                       const double nominal = static_cast<double>(k0 + tooth) * t.fundamental_hz;
                       auto duty = rng::substream(cfg.seed, rng::Stream::ComponentBase, ci, 2 + 2 * static_cast<std::uint64_t>(tooth));
                       auto jitter = rng::substream(cfg.seed, rng::Stream::ComponentBase, ci, 3 + 2 * static_cast<std::uint64_t>(tooth));
                       for_each_active_frame(t.duty_cycle, frames, duty, [&](std::int64_t f) {
                         for (auto p : {Polarization::LCP, Polarization::RCP}) {
                           const double frac = t.polarization.power_fraction(p);
                           const double freq = nominal + t.tooth_width_hz * (rng::uniform01(jitter) - 0.5);
                           if (frac > 0.0) out.push_back(PlacedEvent{f, grid.bin_of(freq), p, t.power_db + ratio_to_db(frac), ci});
                         }
                       });
                     }
                   },
                   [&](const CoincidentBurst& t) { place_burst(t, ci, cfg, grid, out); },
               },
               scene.components[ci]);
  }
  return out;
}

namespace {

struct EventKey {
  std::int64_t frame;
  std::int64_t bin;
  Polarization pol;
  double snr_db;
};

bool key_less(const EventKey& a, const EventKey& b) {
  if (a.frame != b.frame) return a.frame < b.frame;
  if (a.bin != b.bin) return a.bin < b.bin;
  if (a.pol != b.pol) return a.pol < b.pol;
  return a.snr_db > b.snr_db;  // strongest first so dedupe keeps it
}

void background_block(std::int64_t block, std::int64_t total_frames, const BandGrid& grid, const ObservationConfig& cfg,
                      double rate, std::vector<EventKey>& out) {
  const std::int64_t f0 = block * kNoiseBlockFrames;
  const std::int64_t nf = std::min(kNoiseBlockFrames, total_frames - f0);
  const auto nbins = static_cast<std::uint64_t>(grid.bins_in_band());
  const std::uint64_t per_frame = 2 * nbins;
  const std::uint64_t space = per_frame * static_cast<std::uint64_t>(nf);
  const double floor_ratio = db_to_ratio(cfg.capture_snr_db);
  const double log_q = std::log1p(-rate);
  auto eng = rng::substream(cfg.seed, rng::Stream::BackgroundEvents, static_cast<std::uint64_t>(block));

  std::uint64_t idx = 0;
  bool first = true;
  while (true) {
    const auto skip = rng::geometric_skip(eng, log_q);
    if (first) {
      if (skip >= space) break;
      idx = skip;
      first = false;
    } else {
      if (skip >= space - idx - 1) break;
      idx += skip + 1;
    }
    const auto frame = f0 + static_cast<std::int64_t>(idx / per_frame);
    const auto rem = idx % per_frame;
    const auto pol = rem < nbins ? Polarization::LCP : Polarization::RCP;
    const auto bin = grid.first_bin + static_cast<std::int64_t>(rem % nbins);
    const double snr = ratio_to_db(floor_ratio + rng::exponential(eng));
    out.push_back(EventKey{frame, bin, pol, snr});
  }
}

}  // namespace

std::vector<ThresholdEvent> render_events(const SyntheticScene& scene, const ObservationConfig& cfg,
                                          double noise_event_rate) {
  if (!(noise_event_rate >= 0.0 && noise_event_rate <= 1.0)) {
    throw ConfigError("noise_event_rate must be in [0, 1]");
  }
  const auto placed = place_components(scene, cfg);
  const BandGrid grid(cfg);
  const FrameClock clock(cfg);
  const auto frames = cfg.frame_count();

  std::vector<EventKey> keys;
  for (const auto& p : placed) {
    if (p.frame < 0 || p.frame >= frames || !grid.bin_in_band(p.bin)) continue;
    if (p.snr_db >= cfg.capture_snr_db) keys.push_back(EventKey{p.frame, p.bin, p.pol, p.snr_db});
  }

  if (noise_event_rate > 0.0 && grid.bins_in_band() > 0) {
    const std::int64_t blocks = (frames + kNoiseBlockFrames - 1) / kNoiseBlockFrames;
    for (std::int64_t b = 0; b < blocks; ++b) background_block(b, frames, grid, cfg, noise_event_rate, keys);
  }

  std::sort(keys.begin(), keys.end(), key_less);
  std::vector<ThresholdEvent> events;
  events.reserve(keys.size());
  for (std::size_t i = 0; i < keys.size(); ++i) {
    const auto& k = keys[i];
    if (i > 0 && keys[i - 1].frame == k.frame && keys[i - 1].bin == k.bin && keys[i - 1].pol == k.pol) continue;
    events.push_back(ThresholdEvent{clock.mjd_of(k.frame), grid.freq_of(k.bin), k.pol, k.snr_db});
  }
  return events;
}

namespace {

// Adds A * exp(i (2 pi f t + phase)) over one frame; t is absolute sample time.
void add_tone(std::vector<std::complex<double>>& buf, double f_bb, double amplitude, double phase0,
              std::int64_t frame, double sample_rate) {
  const auto n = buf.size();
  const double frame_cycles = f_bb * static_cast<double>(frame) * static_cast<double>(n) / sample_rate;
  const double base = 2.0 * std::numbers::pi * (frame_cycles - std::floor(frame_cycles)) + phase0;
  const double w = 2.0 * std::numbers::pi * f_bb / sample_rate;
  for (std::size_t i = 0; i < n; ++i) {
    const double ph = base + w * static_cast<double>(i);
    buf[i] += std::polar(amplitude, ph);
  }
}

}  // namespace

std::vector<IqBlock> render_iq(const SyntheticScene& scene, const ObservationConfig& cfg, std::int64_t frames,
                               const IqRenderOptions& options) {
  if (frames < 1) throw ArgumentError("render_iq: frames must be >= 1");
  validate_scene(scene, cfg);
  const BandGrid grid(cfg);
  const FrameClock clock(cfg);
  const std::size_t n = grid.fft_length;
  const double nd = static_cast<double>(n);
  const std::int64_t f_begin = options.first_frame;
  const std::int64_t f_end = f_begin + frames;

  // Activity and channel placement come from the event-level model, so both
  // render paths agree on which frames each component occupies.
  std::vector<PlacedEvent> placed;
  for (const auto& e : place_components(scene, cfg)) {
    if (e.frame >= f_begin && e.frame < f_end) placed.push_back(e);
  }
  std::stable_sort(placed.begin(), placed.end(), [](const PlacedEvent& a, const PlacedEvent& b) { return a.frame < b.frame; });

  std::vector<IqBlock> blocks(static_cast<std::size_t>(frames));

  auto render_frame = [&](std::int64_t frame) {
    IqBlock& blk = blocks[static_cast<std::size_t>(frame - f_begin)];
    blk.start_mjd = clock.mjd_of(frame);
    blk.sample_rate_hz = cfg.sample_rate_hz;
    blk.center_freq_hz = cfg.center_freq_hz;
    blk.samples_lcp.assign(n, {0.0, 0.0});
    blk.samples_rcp.assign(n, {0.0, 0.0});
    const auto fu = static_cast<std::uint64_t>(frame);
    if (options.add_noise) {
      auto eng = rng::substream(cfg.seed, rng::Stream::IqNoise, fu);
      for (std::size_t i = 0; i < n; ++i) {
        blk.samples_lcp[i] = rng::complex_normal(eng, 1.0 / nd);
        blk.samples_rcp[i] = rng::complex_normal(eng, 1.0 / nd);
      }
    }
    auto buf_for = [&](Polarization p) -> std::vector<std::complex<double>>& {
      return p == Polarization::LCP ? blk.samples_lcp : blk.samples_rcp;
    };
    auto amp = [&](double power_db) { return std::sqrt(db_to_ratio(power_db)) / nd; };

    auto lo = std::lower_bound(placed.begin(), placed.end(), frame,
                               [](const PlacedEvent& e, std::int64_t f) { return e.frame < f; });
    std::vector<bool> active(scene.components.size(), false);
    for (auto it = lo; it != placed.end() && it->frame == frame; ++it) {
      const auto& comp = scene.components[it->component];
      if (std::holds_alternative<CwTone>(comp) || std::holds_alternative<DopplerSpreadTone>(comp)) {
        active[it->component] = true;
        continue;
      }
      auto phase_rng = rng::substream(cfg.seed, rng::Stream::ComponentBase, it->component,
                                      1000 + static_cast<std::uint64_t>(it->bin) * 2 + static_cast<std::uint64_t>(it->pol));
      const double phase = 2.0 * std::numbers::pi * rng::uniform01(phase_rng);
      add_tone(buf_for(it->pol), grid.freq_of(it->bin) - cfg.center_freq_hz, amp(it->snr_db), phase, frame,
               cfg.sample_rate_hz);
    }

    for (std::size_t ci = 0; ci < scene.components.size(); ++ci) {
      if (!active[ci]) continue;
      const auto& comp = scene.components[ci];
      if (const auto* t = std::get_if<CwTone>(&comp)) {
        for (auto p : {Polarization::LCP, Polarization::RCP}) {
          const double frac = t->polarization.power_fraction(p);
          if (frac > 0.0) add_tone(buf_for(p), t->freq_hz - cfg.center_freq_hz, amp(t->power_db + ratio_to_db(frac)), 0.0, frame, cfg.sample_rate_hz);
        }
      } else if (const auto* t = std::get_if<DopplerSpreadTone>(&comp)) {
        auto eng = rng::substream(cfg.seed, rng::Stream::ComponentBase, ci, 1000000 + fu);
        // Phase diffusion with variance 2 pi * width per second gives a
        // Lorentzian line of FWHM equal to width.
        const double step_sd = std::sqrt(2.0 * std::numbers::pi * t->spread_hz / cfg.sample_rate_hz);
        const double w = 2.0 * std::numbers::pi * (t->center_hz - cfg.center_freq_hz) / cfg.sample_rate_hz;
        const double a_l = amp(t->power_db) * std::sqrt(t->polarization.power_fraction(Polarization::LCP));
        const double a_r = amp(t->power_db) * std::sqrt(t->polarization.power_fraction(Polarization::RCP));
        double walk = 2.0 * std::numbers::pi * rng::uniform01(eng);
        for (std::size_t i = 0; i < n; ++i) {
          walk += step_sd * rng::normal(eng);
          const auto z = std::polar(1.0, walk + w * static_cast<double>(i));
          blk.samples_lcp[i] += a_l * z;
          blk.samples_rcp[i] += a_r * z;
        }
      }
    }
  };

  const unsigned workers = std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(), static_cast<unsigned>(frames)));
  if (workers == 1) {
    for (auto f = f_begin; f < f_end; ++f) render_frame(f);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (auto f = f_begin + w; f < f_end; f += workers) render_frame(f);
      });
    }
  }
  return blocks;
}

namespace {

PolarizationState read_polarization(ini::SectionReader& r, const PolarizationState& fallback) {
  PolarizationState p = fallback;
  p.axial_ratio = r.get_double("axial_ratio", p.axial_ratio);
  const auto h = r.get_string("handedness", p.handedness == Polarization::LCP ? "L" : "R");
  if (h == "L") {
    p.handedness = Polarization::LCP;
  } else if (h == "R") {
    p.handedness = Polarization::RCP;
  } else {
    throw ParseError(r.source(), r.line_of("handedness"), "handedness must be L or R");
  }
  return p;
}

}  // namespace

SyntheticScene load_scene(const ini::Document& doc) {
  SyntheticScene scene;
  for (const auto& section : doc.sections) {
    ini::SectionReader r(doc, section);
    const auto name = r.get_string("name", "");
    if (section.name == "pulse_pair_train") {
      PulsePairTrain t;
      t.name = name;
      t.ra_hours = r.get_double("ra_hours", t.ra_hours);
      t.freq_hz = r.require_double("freq_hz");
      t.freq_spread_hz = r.get_double("freq_spread_hz", t.freq_spread_hz);
      t.dt_s = r.get_double("dt_s", t.dt_s);
      t.df_hz = r.get_double("df_hz", t.df_hz);
      t.snr_lcp_db = r.get_double("snr_lcp_db", t.snr_lcp_db);
      t.snr_rcp_db = r.get_double("snr_rcp_db", t.snr_rcp_db);
      t.pairs_per_transit = r.get_double("pairs_per_transit", t.pairs_per_transit);
      t.start_transit = r.get_int("start_transit", t.start_transit);
      t.max_pairs = r.get_int("max_pairs", t.max_pairs);
      scene.components.emplace_back(t);
    } else if (section.name == "cw_tone") {
      CwTone t;
      t.name = name;
      t.freq_hz = r.require_double("freq_hz");
      t.power_db = r.get_double("power_db", t.power_db);
      t.duty_cycle = r.get_double("duty_cycle", t.duty_cycle);
      t.polarization = read_polarization(r, t.polarization);
      scene.components.emplace_back(t);
    } else if (section.name == "doppler_spread_tone") {
      DopplerSpreadTone t;
      t.name = name;
      t.center_hz = r.require_double("center_hz");
      t.spread_hz = r.get_double("spread_hz", t.spread_hz);
      t.power_db = r.get_double("power_db", t.power_db);
      t.duty_cycle = r.get_double("duty_cycle", t.duty_cycle);
      t.polarization = read_polarization(r, t.polarization);
      scene.components.emplace_back(t);
    } else if (section.name == "harmonic_comb") {
      HarmonicComb t;
      t.name = name;
      t.fundamental_hz = r.get_double("fundamental_hz", t.fundamental_hz);
      t.first_harmonic = r.get_int("first_harmonic", t.first_harmonic);
      t.tooth_count = r.get_int("tooth_count", t.tooth_count);
      t.tooth_width_hz = r.get_double("tooth_width_hz", t.tooth_width_hz);
      t.power_db = r.get_double("power_db", t.power_db);
      t.duty_cycle = r.get_double("duty_cycle", t.duty_cycle);
      t.polarization = read_polarization(r, t.polarization);
      scene.components.emplace_back(t);
    } else if (section.name == "coincident_burst") {
      CoincidentBurst t;
      t.name = name;
      t.start_s = r.get_double("start_s", t.start_s);
      t.freq_hz = r.require_double("freq_hz");
      t.bandwidth_hz = r.get_double("bandwidth_hz", t.bandwidth_hz);
      t.power_db = r.get_double("power_db", t.power_db);
      t.count = r.get_int("count", t.count);
      t.interval_s = r.get_double("interval_s", t.interval_s);
      t.polarization = read_polarization(r, t.polarization);
      scene.components.emplace_back(t);
    } else {
      throw ParseError(doc.source, section.line, "unknown scene component [" + section.name + "]");
    }
    r.finish();
  }
  return scene;
}

SyntheticScene load_scene_file(const std::string& path) { return load_scene(ini::parse_file(path)); }

std::string format_scene(const SyntheticScene& scene) {
  std::ostringstream out;
  out.precision(17);
  auto pol = [&](const PolarizationState& p) {
    out << "axial_ratio = " << p.axial_ratio << "\n"
        << "handedness = " << pol_code(p.handedness) << "\n";
  };
  for (const auto& c : scene.components) {
    std::visit(overloaded{
                   [&](const PulsePairTrain& t) {
                     out << "[pulse_pair_train]\n";
                     if (!t.name.empty()) out << "name = " << t.name << "\n";
                     out << "ra_hours = " << t.ra_hours << "\nfreq_hz = " << t.freq_hz
                         << "\nfreq_spread_hz = " << t.freq_spread_hz << "\ndt_s = " << t.dt_s << "\ndf_hz = " << t.df_hz
                         << "\nsnr_lcp_db = " << t.snr_lcp_db << "\nsnr_rcp_db = " << t.snr_rcp_db
                         << "\npairs_per_transit = " << t.pairs_per_transit << "\nstart_transit = " << t.start_transit
                         << "\nmax_pairs = " << t.max_pairs << "\n";
                   },
                   [&](const CwTone& t) {
                     out << "[cw_tone]\n";
                     if (!t.name.empty()) out << "name = " << t.name << "\n";
                     out << "freq_hz = " << t.freq_hz << "\npower_db = " << t.power_db << "\nduty_cycle = " << t.duty_cycle
                         << "\n";
                     pol(t.polarization);
                   },
                   [&](const DopplerSpreadTone& t) {
                     out << "[doppler_spread_tone]\n";
                     if (!t.name.empty()) out << "name = " << t.name << "\n";
                     out << "center_hz = " << t.center_hz << "\nspread_hz = " << t.spread_hz << "\npower_db = " << t.power_db
                         << "\nduty_cycle = " << t.duty_cycle << "\n";
                     pol(t.polarization);
                   },
                   [&](const HarmonicComb& t) {
                     out << "[harmonic_comb]\n";
                     if (!t.name.empty()) out << "name = " << t.name << "\n";
                     out << "fundamental_hz = " << t.fundamental_hz << "\nfirst_harmonic = " << t.first_harmonic
                         << "\ntooth_count = " << t.tooth_count << "\ntooth_width_hz = " << t.tooth_width_hz
                         << "\npower_db = " << t.power_db << "\nduty_cycle = " << t.duty_cycle << "\n";
                     pol(t.polarization);
                   },
                   [&](const CoincidentBurst& t) {
                     out << "[coincident_burst]\n";
                     if (!t.name.empty()) out << "name = " << t.name << "\n";
                     out << "start_s = " << t.start_s << "\nfreq_hz = " << t.freq_hz << "\nbandwidth_hz = " << t.bandwidth_hz
                         << "\npower_db = " << t.power_db << "\ncount = " << t.count << "\ninterval_s = " << t.interval_s
                         << "\n";
                     pol(t.polarization);
                   },
               },
               c);
    out << "\n";
  }
  return out.str();
}

}  // namespace pulsepair::scene
