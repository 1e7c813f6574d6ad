#pragma once

// Binomial-density likelihoods over SNR-sorted trials per RA bin, the simple
// odds update, delta-f coincidence probabilities and diagnostic histograms.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pulsepair/skymodel.hpp"
#include "pulsepair/types.hpp"

namespace pulsepair::stats {

inline constexpr double kDefaultEventProbability = 1.0 / 80.0;

/// C(n,k) p^k (1-p)^(n-k) in the saddle-point form (Stirling remainders plus
/// deviance terms), accurate to ~1e-13 relative well beyond n = 1e6.
double binomial_density(std::int64_t k, std::int64_t n, double p);
double log_binomial_density(std::int64_t k, std::int64_t n, double p);

/// floor((n + 1) p).
std::int64_t modal_count(std::int64_t n, double p);
double normalized_likelihood(std::int64_t k, std::int64_t n, double p);

double bayes_update(double prior, double likelihood_ratio);

struct CurvePoint {
  std::int64_t n = 0;
  std::int64_t k = 0;
  double density = 1.0;
  bool step = false;  // k incremented at this trial
};

struct BinomialCurve {
  sky::RaBin bin;
  double p = kDefaultEventProbability;
  std::vector<CurvePoint> points;  // n = 1..N
};

std::array<std::int64_t, sky::kRaBinCount> bin_counts(const std::vector<PulsePair>& pairs);

/// One curve per RA bin. Pairs must carry trials 1..N (any order).
std::vector<BinomialCurve> likelihood_curves(const std::vector<PulsePair>& pairs, double p = kDefaultEventProbability);

struct BinSummary {
  sky::RaBin bin;
  double min_density = 1.0;
  std::int64_t n_at_min = 0;
  std::int64_t k_at_min = 0;
  double normalized_likelihood = 1.0;
  std::optional<double> posterior;
  std::string direction = "none";  // "excess" or "deficit" relative to n p at the minimum
};

struct AnalysisReport {
  double p = kDefaultEventProbability;
  std::int64_t total_trials = 0;
  std::optional<double> prior;
  std::vector<BinSummary> bins;  // all 80
  std::vector<BinomialCurve> curves;
};

AnalysisReport analyze(const std::vector<PulsePair>& pairs, double p = kDefaultEventProbability,
                       std::optional<double> prior = std::nullopt);

enum class CoincidenceMode { AnyMatchPair, TargetMatch };

struct CoincidenceParams {
  std::int64_t n_pairs = 14;
  double df_min_hz = 80.0;
  double df_max_hz = 1100.0;
  double tolerance_hz = 3.7;
  CoincidenceMode mode = CoincidenceMode::AnyMatchPair;
  std::vector<double> targets_hz;
  // AnyMatchPair only: compare |df| rather than signed df.
  bool compare_magnitude = false;
};

struct McEstimate {
  double probability = 0.0;
  double standard_error = 0.0;
  std::int64_t trials = 0;
};

/// Draws n_pairs signed df uniform on [-df_max, -df_min] U [df_min, df_max]
/// per experiment. Deterministic for a seed regardless of threading.
McEstimate df_coincidence_mc(const CoincidenceParams& params, std::int64_t trials, std::uint64_t seed);
double df_coincidence_analytic(const CoincidenceParams& params);

struct FreqDiffHistogram {
  double bin_width_hz = 0.0;
  double fundamental_hz = 0.0;
  double tolerance_hz = 0.0;
  std::vector<double> differences;  // sorted
  std::vector<std::int64_t> counts;  // counts[i] covers [i w, (i+1) w)
  double harmonic_score = 0.0;      // fraction within tolerance of k * fundamental, k >= 0
};

FreqDiffHistogram freq_diff_histogram(const std::vector<PulsePair>& pairs, double bin_width_hz,
                                      double fundamental_hz, double tolerance_hz);

struct UniformityResult {
  double statistic = 0.0;
  double p_value = 1.0;
  int dof = sky::kRaBinCount - 1;
};

/// Pearson chi-square against equal expected counts. Requires total >= 80.
UniformityResult uniformity_test(const std::array<std::int64_t, sky::kRaBinCount>& counts);

}  // namespace pulsepair::stats
