#include "pulsepair/rfi_filters.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace pulsepair {

const char* mask_source_name(MaskSource s) {
  switch (s) {
    case MaskSource::Static: return "static";
    case MaskSource::Post: return "post";
    case MaskSource::Dynamic: return "dynamic";
    case MaskSource::Harmonic: return "harmonic";
    case MaskSource::EdgeDc: return "edge_dc";
  }
  return "unknown";
}

RfiMask::RfiMask(std::vector<MaskInterval> intervals) : intervals_(std::move(intervals)) { normalize(); }

void RfiMask::add(const MaskInterval& interval) {
  intervals_.push_back(interval);
  normalize();
}

void RfiMask::merge(const RfiMask& other) {
  intervals_.insert(intervals_.end(), other.intervals_.begin(), other.intervals_.end());
  normalize();
}

void RfiMask::normalize() {
  for (const auto& iv : intervals_) {
    if (!(std::isfinite(iv.lo_hz) && std::isfinite(iv.hi_hz)) || iv.lo_hz > iv.hi_hz) {
      throw ArgumentError("mask interval requires finite lo_hz <= hi_hz");
    }
  }
  std::stable_sort(intervals_.begin(), intervals_.end(),
                   [](const MaskInterval& a, const MaskInterval& b) { return a.lo_hz < b.lo_hz; });
  std::vector<MaskInterval> merged;
  for (const auto& iv : intervals_) {
    if (!merged.empty() && iv.lo_hz <= merged.back().hi_hz) {
      auto& m = merged.back();
      m.hi_hz = std::max(m.hi_hz, iv.hi_hz);
      if (!iv.label.empty() && m.label != iv.label && m.label.find(iv.label) == std::string::npos) {
        m.label = m.label.empty() ? iv.label : m.label + "+" + iv.label;
      }
    } else {
      merged.push_back(iv);
    }
  }
  intervals_ = std::move(merged);
}

bool RfiMask::contains(double freq_hz) const {
  auto it = std::upper_bound(intervals_.begin(), intervals_.end(), freq_hz,
                             [](double f, const MaskInterval& iv) { return f < iv.lo_hz; });
  if (it == intervals_.begin()) return false;
  --it;
  return freq_hz <= it->hi_hz;
}

std::vector<ThresholdEvent> apply_mask(const std::vector<ThresholdEvent>& events, const RfiMask& mask) {
  if (mask.empty()) return events;
  std::vector<ThresholdEvent> out;
  out.reserve(events.size());
  std::copy_if(events.begin(), events.end(), std::back_inserter(out),
               [&](const ThresholdEvent& e) { return !mask.contains(e.rf_freq_hz); });
  return out;
}

RfiMask build_post_mask(const std::vector<ThresholdEvent>& events, const BandGrid& grid, const FrameClock& clock,
                        std::int64_t total_frames, double occupancy_threshold) {
  if (total_frames <= 0) throw ArgumentError("build_post_mask: observation has no frames");
  if (!(occupancy_threshold > 0.0 && occupancy_threshold < 1.0)) {
    throw ArgumentError("occupancy_threshold must be in (0, 1)");
  }
  // Ordered so the mask build is deterministic; events need not be sorted.
  std::map<std::int64_t, std::vector<std::int64_t>> frames_by_bin;
  for (const auto& e : events) frames_by_bin[grid.bin_of(e.rf_freq_hz)].push_back(clock.frame_of(e.mjd));

  std::vector<MaskInterval> masked;
  for (auto& [bin, frames] : frames_by_bin) {
    std::sort(frames.begin(), frames.end());
    const auto distinct = std::unique(frames.begin(), frames.end()) - frames.begin();
    const double occupancy = static_cast<double>(distinct) / static_cast<double>(total_frames);
    if (occupancy > occupancy_threshold) {
      const double f = grid.freq_of(bin);
      masked.push_back({f - 0.5 * grid.bin_width_hz, f + 0.5 * grid.bin_width_hz, MaskSource::Post, "post"});
    }
  }
  return RfiMask(std::move(masked));
}

RfiMask build_post_mask(const std::vector<ThresholdEvent>& events, const ObservationConfig& cfg,
                        double occupancy_threshold) {
  return build_post_mask(events, BandGrid(cfg), FrameClock(cfg), cfg.frame_count(), occupancy_threshold);
}

DynamicExcisionState::DynamicExcisionState(double alpha, double theta_on, double theta_off)
    : alpha_(alpha), theta_on_(theta_on), theta_off_(theta_off) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("iir alpha must be in (0, 1]");
  if (!(theta_off > 0.0 && theta_off < theta_on && theta_on <= 1.0)) {
    throw ConfigError("require 0 < theta_off < theta_on <= 1");
  }
}

DynamicExcisionState::DynamicExcisionState(const FilterConfig& f)
    : DynamicExcisionState(f.iir_alpha, f.iir_theta_on, f.iir_theta_off) {}

std::int64_t DynamicExcisionState::frames_until_exit(double s) const {
  const double q = 1.0 - alpha_;
  if (s < theta_off_) return 1;
  auto below = [&](std::int64_t j) { return s * std::pow(q, static_cast<double>(j)) < theta_off_; };
  std::int64_t j = 1;
  if (q > 0.0) j = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(std::log(theta_off_ / s) / std::log(q))));
  while (j > 1 && below(j - 1)) --j;
  while (!below(j)) ++j;
  return j;
}

void DynamicExcisionState::decay(BinState& b, std::int64_t frame, std::int64_t bin,
                                 std::vector<DynamicEpisode>* closed) const {
  const std::int64_t m = frame - b.last_frame;
  if (m <= 0) return;
  if (b.excised) {
    const auto j = frames_until_exit(b.s);
    if (j <= m) {
      b.excised = false;
      if (closed) closed->push_back({bin, b.episode_start, b.last_frame + j});
    }
  }
  b.s *= std::pow(1.0 - alpha_, static_cast<double>(m));
  b.last_frame = frame;
}

bool DynamicExcisionState::observe(std::int64_t bin, std::int64_t frame) {
  if (frame < last_frame_seen_) throw OrderingError("dynamic excision: frame " + std::to_string(frame) + " after frame " +
                                                    std::to_string(last_frame_seen_));
  last_frame_seen_ = frame;
  auto [it, fresh] = bins_.try_emplace(bin, BinState{0.0, frame - 1, false, 0, false});
  BinState& b = it->second;
  if (!fresh && b.last_frame == frame) return b.last_decision;
  decay(b, frame - 1, bin, &episodes_);
  const bool decision = b.excised;
  b.s = std::clamp((1.0 - alpha_) * b.s + alpha_, 0.0, 1.0);
  b.last_frame = frame;
  b.last_decision = decision;
  if (!b.excised && b.s >= theta_on_) {
    b.excised = true;
    b.episode_start = frame + 1;
  }
  return decision;
}

double DynamicExcisionState::smoothed(std::int64_t bin, std::int64_t frame) const {
  auto it = bins_.find(bin);
  if (it == bins_.end()) return 0.0;
  if (frame < it->second.last_frame) throw ArgumentError("smoothed: frame precedes the last observation");
  return it->second.s * std::pow(1.0 - alpha_, static_cast<double>(frame - it->second.last_frame));
}

bool DynamicExcisionState::excised_after(std::int64_t bin, std::int64_t frame) const {
  auto it = bins_.find(bin);
  if (it == bins_.end()) return false;
  if (frame < it->second.last_frame) throw ArgumentError("excised_after: frame precedes the last observation");
  BinState b = it->second;
  decay(b, frame, bin, nullptr);
  return b.excised;
}

std::vector<DynamicEpisode> DynamicExcisionState::episodes(std::int64_t final_frame) const {
  std::vector<DynamicEpisode> out;
  for (const auto& e : episodes_) {
    if (e.start_frame <= final_frame) out.push_back({e.bin, e.start_frame, std::min(e.end_frame, final_frame)});
  }
  for (const auto& [bin, state] : bins_) {
    if (!state.excised) continue;
    BinState b = state;
    std::vector<DynamicEpisode> closed;
    if (final_frame > b.last_frame) decay(b, final_frame, bin, &closed);
    for (const auto& e : closed) {
      if (e.start_frame <= final_frame) out.push_back({e.bin, e.start_frame, std::min(e.end_frame, final_frame)});
    }
    if (b.excised && b.episode_start <= final_frame) out.push_back({bin, b.episode_start, final_frame});
  }
  std::sort(out.begin(), out.end(), [](const DynamicEpisode& a, const DynamicEpisode& b) {
    return a.start_frame != b.start_frame ? a.start_frame < b.start_frame : a.bin < b.bin;
  });
  return out;
}

DynamicExcisionResult dynamic_excise(const std::vector<ThresholdEvent>& events, DynamicExcisionState& state,
                                     const BandGrid& grid, const FrameClock& clock) {
  DynamicExcisionResult result;
  result.survivors.reserve(events.size());
  std::int64_t final_frame = INT64_MIN;
  double last_mjd = -INFINITY;

  std::size_t i = 0;
  std::vector<std::int64_t> bins;
  while (i < events.size()) {
    const auto frame = clock.frame_of(events[i].mjd);
    std::size_t j = i;
    bins.clear();
    for (; j < events.size() && clock.frame_of(events[j].mjd) == frame; ++j) {
      if (events[j].mjd < last_mjd) {
        throw OrderingError("dynamic excision: event " + std::to_string(j + 1) + " is earlier than its predecessor");
      }
      last_mjd = events[j].mjd;
      bins.push_back(grid.bin_of(events[j].rf_freq_hz));
    }
    if (frame < final_frame) {
      throw OrderingError("dynamic excision: event " + std::to_string(i + 1) + " is earlier than its predecessor");
    }
    final_frame = frame;
    // observe() memoizes per (bin, frame), so both polarizations see one update.
    for (std::size_t k = i; k < j; ++k) {
      if (!state.observe(bins[k - i], frame)) result.survivors.push_back(events[k]);
    }
    i = j;
  }

  if (final_frame != INT64_MIN) {
    for (const auto& ep : state.episodes(final_frame)) {
      const double f = grid.freq_of(ep.bin);
      result.trace.push_back({{f - 0.5 * grid.bin_width_hz, f + 0.5 * grid.bin_width_hz, MaskSource::Dynamic, "dynamic"},
                              clock.mjd_of(ep.start_frame),
                              clock.mjd_of(ep.end_frame)});
    }
  }
  return result;
}

bool near_clock_harmonic(double freq_hz) {
  return std::abs(std::remainder(freq_hz, 500e3)) <= 25e3 || std::abs(std::remainder(freq_hz, 100e3)) <= 1e3;
}

std::vector<ThresholdEvent> harmonic_excise(const std::vector<ThresholdEvent>& events) {
  std::vector<ThresholdEvent> out;
  out.reserve(events.size());
  std::copy_if(events.begin(), events.end(), std::back_inserter(out),
               [](const ThresholdEvent& e) { return !near_clock_harmonic(e.rf_freq_hz); });
  return out;
}

std::vector<ThresholdEvent> edge_dc_excise(const std::vector<ThresholdEvent>& events, const ObservationConfig& cfg,
                                           double edge_margin_hz, double dc_margin_hz) {
  const double half = 0.5 * cfg.bandwidth_hz;
  if (!(edge_margin_hz >= 0.0 && edge_margin_hz < half)) throw ArgumentError("edge_margin_hz must be in [0, bandwidth/2)");
  if (!(dc_margin_hz >= 0.0 && dc_margin_hz < half)) throw ArgumentError("dc_margin_hz must be in [0, bandwidth/2)");
  const double lo = cfg.center_freq_hz - half + edge_margin_hz;
  const double hi = cfg.center_freq_hz + half - edge_margin_hz;
  std::vector<ThresholdEvent> out;
  out.reserve(events.size());
  std::copy_if(events.begin(), events.end(), std::back_inserter(out), [&](const ThresholdEvent& e) {
    const double f = e.rf_freq_hz;
    return f > lo && f < hi && std::abs(f - cfg.center_freq_hz) > dc_margin_hz;
  });
  return out;
}

}  // namespace pulsepair
