#pragma once

// Event-level spectral excision: interval masks, the causal per-bin IIR
// crossing-rate filter, clock-harmonic masks and band edge / DC removal.

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "pulsepair/config.hpp"
#include "pulsepair/types.hpp"

namespace pulsepair {

enum class MaskSource : std::uint8_t { Static, Post, Dynamic, Harmonic, EdgeDc };

const char* mask_source_name(MaskSource s);

struct MaskInterval {
  double lo_hz = 0.0;  // closed interval
  double hi_hz = 0.0;
  MaskSource source = MaskSource::Static;
  std::string label;

  bool operator==(const MaskInterval&) const = default;
};

/// Union of closed frequency intervals, kept sorted and disjoint. Overlapping
/// or touching inputs merge; the merged interval keeps the source of its
/// lowest member and joins distinct labels with '+'.
class RfiMask {
 public:
  RfiMask() = default;
  explicit RfiMask(std::vector<MaskInterval> intervals);

  void add(const MaskInterval& interval);
  void merge(const RfiMask& other);
  bool contains(double freq_hz) const;
  bool empty() const { return intervals_.empty(); }
  const std::vector<MaskInterval>& intervals() const { return intervals_; }

 private:
  void normalize();
  std::vector<MaskInterval> intervals_;
};

std::vector<ThresholdEvent> apply_mask(const std::vector<ThresholdEvent>& events, const RfiMask& mask);

/// Masks every bin whose occupancy (frames with an event in either
/// polarization / total_frames) exceeds occupancy_threshold. Each masked bin
/// contributes [center - width/2, center + width/2].
RfiMask build_post_mask(const std::vector<ThresholdEvent>& events, const BandGrid& grid, const FrameClock& clock,
                        std::int64_t total_frames, double occupancy_threshold);
RfiMask build_post_mask(const std::vector<ThresholdEvent>& events, const ObservationConfig& cfg,
                        double occupancy_threshold);

/// One contiguous excision episode of a single bin, frames inclusive.
struct DynamicEpisode {
  std::int64_t bin = 0;
  std::int64_t start_frame = 0;
  std::int64_t end_frame = 0;
};

/// Per-bin smoothed crossing rate s <- (1 - alpha) s + alpha x, updated every
/// frame (lazily: untouched bins decay in closed form). A bin is excised for
/// frame t when the state after frame t - 1 is in excision; it enters when
/// s >= theta_on and leaves when s < theta_off.
class DynamicExcisionState {
 public:
  DynamicExcisionState(double alpha, double theta_on, double theta_off);
  explicit DynamicExcisionState(const FilterConfig& f);

  // Returns the excision decision for (bin, frame), then records a crossing
  // there. Frames must be non-decreasing across calls.
  bool observe(std::int64_t bin, std::int64_t frame);

  // State after `frame` assuming no crossings after the last observation.
  double smoothed(std::int64_t bin, std::int64_t frame) const;
  bool excised_after(std::int64_t bin, std::int64_t frame) const;

  // Completed episodes plus open ones truncated at final_frame, by start
  // frame then bin. Episodes starting after final_frame are omitted.
  std::vector<DynamicEpisode> episodes(std::int64_t final_frame) const;

  double alpha() const { return alpha_; }
  double theta_on() const { return theta_on_; }
  double theta_off() const { return theta_off_; }

 private:
  struct BinState {
    double s = 0.0;
    std::int64_t last_frame = 0;  // s is the state after this frame
    bool excised = false;
    std::int64_t episode_start = 0;
    bool last_decision = false;
  };
  // Applies zero-crossing updates through `frame`; a completed episode is
  // appended to `closed` when given.
  void decay(BinState& b, std::int64_t frame, std::int64_t bin, std::vector<DynamicEpisode>* closed) const;
  std::int64_t frames_until_exit(double s) const;

  double alpha_;
  double theta_on_;
  double theta_off_;
  std::unordered_map<std::int64_t, BinState> bins_;
  std::vector<DynamicEpisode> episodes_;
  std::int64_t last_frame_seen_ = INT64_MIN;
};

struct TimedMaskInterval {
  MaskInterval interval;
  double start_mjd = 0.0;
  double end_mjd = 0.0;
};

struct DynamicExcisionResult {
  std::vector<ThresholdEvent> survivors;
  std::vector<TimedMaskInterval> trace;  // one row per episode, by start then frequency
};

/// Causal single pass. Throws OrderingError on events out of time order.
DynamicExcisionResult dynamic_excise(const std::vector<ThresholdEvent>& events, DynamicExcisionState& state,
                                     const BandGrid& grid, const FrameClock& clock);

// Within 25 kHz of k * 500 kHz or 1 kHz of k * 100 kHz, absolute RF, inclusive.
bool near_clock_harmonic(double freq_hz);
std::vector<ThresholdEvent> harmonic_excise(const std::vector<ThresholdEvent>& events);

/// Removes f <= band_lo + edge, f >= band_hi - edge and |f - center| <= dc.
std::vector<ThresholdEvent> edge_dc_excise(const std::vector<ThresholdEvent>& events, const ObservationConfig& cfg,
                                           double edge_margin_hz, double dc_margin_hz);

}  // namespace pulsepair
