#include "pulsepair/pairing.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pulsepair/skymodel.hpp"

namespace pulsepair {

namespace {

constexpr double kDbSlack = 1e-9;

double round_to(double x, double quantum) { return std::round(x / quantum) * quantum; }

bool ref_before(const PulsePair& a, const PulsePair& b) {
  if (a.ref_mjd() != b.ref_mjd()) return a.ref_mjd() < b.ref_mjd();
  if (a.lcp.rf_freq_hz != b.lcp.rf_freq_hz) return a.lcp.rf_freq_hz < b.lcp.rf_freq_hz;
  return a.rcp.rf_freq_hz < b.rcp.rf_freq_hz;
}

}  // namespace

PulsePair make_pair(const ThresholdEvent& lcp, const ThresholdEvent& rcp, const ObservationConfig& cfg) {
  if (lcp.pol != Polarization::LCP || rcp.pol != Polarization::RCP) throw ArgumentError("make_pair needs an L and an R event");
  PulsePair p;
  p.lcp = lcp;
  p.rcp = rcp;
  p.dt_s = round_to((rcp.mjd - lcp.mjd) * kSecondsPerDay, 1e-5);
  p.df_hz = round_to(rcp.rf_freq_hz - lcp.rf_freq_hz, 1e-6);
  p.snr_low_db = std::min(lcp.snr_db, rcp.snr_db);
  p.snr_high_db = std::max(lcp.snr_db, rcp.snr_db);
  const double ref = p.ref_mjd();
  p.ra_hours = sky::pointing_ra(ref, cfg);
  p.ref_frame = FrameClock(cfg).frame_of(ref);
  return p;
}

std::vector<PulsePair> match_pairs(const std::vector<ThresholdEvent>& events, const PairingConfig& windows,
                                   const ObservationConfig& cfg) {
  if (!(windows.dt_max_s > 0.0)) throw ArgumentError("dt_max_s must be > 0");
  if (!(windows.df_min_hz > 0.0 && windows.df_min_hz < windows.df_max_hz)) {
    throw ArgumentError("require 0 < df_min_hz < df_max_hz");
  }
  std::vector<std::size_t> left, right;
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (i > 0 && events[i].mjd < events[i - 1].mjd) {
      throw OrderingError("match_pairs: event " + std::to_string(i + 1) + " is earlier than its predecessor");
    }
    (events[i].pol == Polarization::LCP ? left : right).push_back(i);
  }

  struct Candidate {
    double abs_dt;
    double abs_df;
    double lower_freq;
    std::size_t l;
    std::size_t r;
  };
  std::vector<Candidate> candidates;
  const double window_days = windows.dt_max_s / kSecondsPerDay;
  std::size_t first_r = 0;
  for (auto li : left) {
    const auto& l = events[li];
    // Right events are time-sorted; skip those too early for this and all later lefts.
    while (first_r < right.size() && events[right[first_r]].mjd < l.mjd - 2.0 * window_days) ++first_r;
    for (std::size_t k = first_r; k < right.size(); ++k) {
      const auto& r = events[right[k]];
      if (r.mjd > l.mjd + 2.0 * window_days) break;
      const double dt = std::abs(round_to((r.mjd - l.mjd) * kSecondsPerDay, 1e-5));
      if (!(dt < windows.dt_max_s)) continue;
      const double df = std::abs(round_to(r.rf_freq_hz - l.rf_freq_hz, 1e-6));
      if (df < windows.df_min_hz || df > windows.df_max_hz) continue;
      candidates.push_back({dt, df, std::min(l.rf_freq_hz, r.rf_freq_hz), li, right[k]});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.abs_dt != b.abs_dt) return a.abs_dt < b.abs_dt;
    if (a.abs_df != b.abs_df) return a.abs_df < b.abs_df;
    if (a.lower_freq != b.lower_freq) return a.lower_freq < b.lower_freq;
    if (a.l != b.l) return a.l < b.l;
    return a.r < b.r;
  });

  std::vector<bool> used(events.size(), false);
  std::vector<PulsePair> pairs;
  for (const auto& c : candidates) {
    if (used[c.l] || used[c.r]) continue;
    used[c.l] = used[c.r] = true;
    pairs.push_back(make_pair(events[c.l], events[c.r], cfg));
  }
  std::sort(pairs.begin(), pairs.end(), ref_before);
  return pairs;
}

std::vector<PulsePair> interarrival_filter(const std::vector<PulsePair>& pairs, double integration_s) {
  for (std::size_t i = 1; i < pairs.size(); ++i) {
    if (pairs[i].ref_frame < pairs[i - 1].ref_frame) {
      throw OrderingError("interarrival_filter: pair " + std::to_string(i + 1) + " precedes its predecessor");
    }
  }
  std::vector<PulsePair> out;
  std::size_t i = 0;
  while (i < pairs.size()) {
    std::size_t j = i + 1;
    while (j < pairs.size() && pairs[j].ref_frame == pairs[i].ref_frame) ++j;
    if (j - i == 1) out.push_back(pairs[i]);
    i = j;
  }
  for (std::size_t k = 0; k < out.size(); ++k) {
    if (k == 0) {
      out[k].interarrival_s.reset();
    } else {
      out[k].interarrival_s = static_cast<double>(out[k].ref_frame - out[k - 1].ref_frame) * integration_s;
    }
  }
  return out;
}

std::vector<PulsePair> snr_sort(const std::vector<PulsePair>& pairs, double high_db, double low_db) {
  std::vector<PulsePair> out;
  for (const auto& p : pairs) {
    if (p.snr_high_db >= high_db - kDbSlack && p.snr_low_db >= low_db - kDbSlack) out.push_back(p);
  }
  std::stable_sort(out.begin(), out.end(), [](const PulsePair& a, const PulsePair& b) {
    if (a.snr_low_db != b.snr_low_db) return a.snr_low_db > b.snr_low_db;
    if (a.snr_high_db != b.snr_high_db) return a.snr_high_db > b.snr_high_db;
    return ref_before(a, b);
  });
  for (std::size_t i = 0; i < out.size(); ++i) out[i].trial = i + 1;
  return out;
}

}  // namespace pulsepair
