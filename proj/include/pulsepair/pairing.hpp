#pragma once

// Cross-polarization pulse-pair matching, zero-interarrival excision and the
// lower-SNR trial ordering.

#include <vector>

#include "pulsepair/config.hpp"
#include "pulsepair/types.hpp"

namespace pulsepair {

/// Builds a pair from an LCP and an RCP event. dt is rounded to 10 us and df
/// to 1 uHz so that values printed in decimal compare exactly against window
/// edges. The reference time min(t_L, t_R) is quantized to frames.
PulsePair make_pair(const ThresholdEvent& lcp, const ThresholdEvent& rcp, const ObservationConfig& cfg);

/// Greedy unique matching of (LCP, RCP) candidates with |dt| < dt_max and
/// df_min <= |df| <= df_max, taken in order of |dt|, then |df|, then lower
/// frequency. Output ordered by reference time. Events must be time-sorted.
std::vector<PulsePair> match_pairs(const std::vector<ThresholdEvent>& events, const PairingConfig& windows,
                                   const ObservationConfig& cfg);

/// Drops every maximal run of >= 2 consecutive pairs sharing a reference
/// frame and recomputes interarrival times (frame-quantized) on the rest.
std::vector<PulsePair> interarrival_filter(const std::vector<PulsePair>& pairs, double integration_s);

/// Keeps pairs with snr_high >= high_db and snr_low >= low_db (inclusive),
/// ordered by snr_low desc, snr_high desc, reference time asc; trials 1..N.
std::vector<PulsePair> snr_sort(const std::vector<PulsePair>& pairs, double high_db = 13.0, double low_db = 11.8);

}  // namespace pulsepair
