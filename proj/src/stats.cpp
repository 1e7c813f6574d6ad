#include "pulsepair/stats.hpp"

#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <numbers>
#include <thread>

#include "pulsepair/rng.hpp"

namespace pulsepair::stats {

namespace {

// log(n!) - log(sqrt(2 pi n) (n/e)^n)
double stirlerr(double n) {
  constexpr double S0 = 1.0 / 12.0;
  constexpr double S1 = 1.0 / 360.0;
  constexpr double S2 = 1.0 / 1260.0;
  constexpr double S3 = 1.0 / 1680.0;
  constexpr double S4 = 1.0 / 1188.0;
  if (n <= 15.0) {
    const long double nl = n;
    const long double r = std::lgamma(nl + 1.0L) - (nl + 0.5L) * std::log(nl) + nl -
                          0.5L * std::log(2.0L * std::numbers::pi_v<long double>);
    return static_cast<double>(r);
  }
  const double nn = n * n;
  return (S0 - (S1 - (S2 - (S3 - S4 / nn) / nn) / nn) / nn) / n;
}

// x log(x / np) + np - x, without cancellation near x = np.
double bd0(double x, double np) {
  if (std::abs(x - np) < 0.1 * (x + np)) {
    const double v = (x - np) / (x + np);
    double s = (x - np) * v;
    double ej = 2.0 * x * v;
    const double v2 = v * v;
    for (int j = 1; j < 1000; ++j) {
      ej *= v2;
      const double s1 = s + ej / (2 * j + 1);
      if (s1 == s) return s1;
      s = s1;
    }
    return s;
  }
  return x * std::log(x / np) + np - x;
}

void check_domain(std::int64_t k, std::int64_t n, double p) {
  if (n < 0 || k < 0 || k > n) throw ArgumentError("binomial density requires 0 <= k <= n");
  if (!(p >= 0.0 && p <= 1.0)) throw ArgumentError("binomial density requires p in [0, 1]");
}

}  // namespace

double log_binomial_density(std::int64_t k, std::int64_t n, double p) {
  check_domain(k, n, p);
  const double q = 1.0 - p;
  if (p == 0.0) return k == 0 ? 0.0 : -INFINITY;
  if (q == 0.0) return k == n ? 0.0 : -INFINITY;
  const auto nd = static_cast<double>(n);
  const auto kd = static_cast<double>(k);
  if (k == 0) return nd * std::log1p(-p);
  if (k == n) return nd * std::log(p);
  const double lc = stirlerr(nd) - stirlerr(kd) - stirlerr(nd - kd) - bd0(kd, nd * p) - bd0(nd - kd, nd * q);
  return lc + 0.5 * std::log(nd / (2.0 * std::numbers::pi * kd * (nd - kd)));
}

double binomial_density(std::int64_t k, std::int64_t n, double p) { return std::exp(log_binomial_density(k, n, p)); }

std::int64_t modal_count(std::int64_t n, double p) {
  if (n < 0) throw ArgumentError("modal_count requires n >= 0");
  if (!(p >= 0.0 && p <= 1.0)) throw ArgumentError("modal_count requires p in [0, 1]");
  return std::min<std::int64_t>(n, static_cast<std::int64_t>(std::floor(static_cast<double>(n + 1) * p)));
}

double normalized_likelihood(std::int64_t k, std::int64_t n, double p) {
  check_domain(k, n, p);
  return std::exp(log_binomial_density(k, n, p) - log_binomial_density(modal_count(n, p), n, p));
}

double bayes_update(double prior, double likelihood_ratio) {
  if (!(prior > 0.0 && prior < 1.0)) throw ArgumentError("prior must be in (0, 1)");
  if (!(likelihood_ratio > 0.0 && likelihood_ratio <= 1.0)) throw ArgumentError("likelihood ratio must be in (0, 1]");
  return prior * likelihood_ratio / (prior * likelihood_ratio + (1.0 - prior));
}

std::array<std::int64_t, sky::kRaBinCount> bin_counts(const std::vector<PulsePair>& pairs) {
  std::array<std::int64_t, sky::kRaBinCount> counts{};
  for (const auto& p : pairs) ++counts[static_cast<std::size_t>(sky::ra_bin(p.ra_hours).index)];
  return counts;
}

std::vector<BinomialCurve> likelihood_curves(const std::vector<PulsePair>& pairs, double p) {
  const auto n_total = static_cast<std::int64_t>(pairs.size());
  // Bin index per trial number.
  std::vector<int> bin_of_trial(pairs.size(), -1);
  for (const auto& pr : pairs) {
    const auto t = static_cast<std::int64_t>(pr.trial);
    if (t < 1 || t > n_total || bin_of_trial[static_cast<std::size_t>(t - 1)] != -1) {
      throw ArgumentError("likelihood_curves: pairs must carry distinct trials 1..N");
    }
    bin_of_trial[static_cast<std::size_t>(t - 1)] = sky::ra_bin(pr.ra_hours).index;
  }
  std::vector<BinomialCurve> curves(sky::kRaBinCount);
  for (int b = 0; b < sky::kRaBinCount; ++b) {
    auto& c = curves[static_cast<std::size_t>(b)];
    c.bin = sky::ra_bin_by_index(b);
    c.p = p;
    c.points.reserve(pairs.size());
    std::int64_t k = 0;
    for (std::int64_t n = 1; n <= n_total; ++n) {
      const bool step = bin_of_trial[static_cast<std::size_t>(n - 1)] == b;
      if (step) ++k;
      c.points.push_back({n, k, binomial_density(k, n, p), step});
    }
  }
  return curves;
}

AnalysisReport analyze(const std::vector<PulsePair>& pairs, double p, std::optional<double> prior) {
  if (!(p > 0.0 && p < 1.0)) throw ArgumentError("event probability must be in (0, 1)");
  if (prior && !(*prior > 0.0 && *prior < 1.0)) throw ArgumentError("prior must be in (0, 1)");
  AnalysisReport report;
  report.p = p;
  report.prior = prior;
  report.total_trials = static_cast<std::int64_t>(pairs.size());
  report.curves = likelihood_curves(pairs, p);
  for (const auto& curve : report.curves) {
    BinSummary s;
    s.bin = curve.bin;
    for (const auto& pt : curve.points) {
      if (pt.density < s.min_density || s.n_at_min == 0) {
        s.min_density = pt.density;
        s.n_at_min = pt.n;
        s.k_at_min = pt.k;
      }
    }
    if (s.n_at_min > 0) {
      s.normalized_likelihood = normalized_likelihood(s.k_at_min, s.n_at_min, p);
      const double mean = static_cast<double>(s.n_at_min) * p;
      const auto k = static_cast<double>(s.k_at_min);
      s.direction = k > mean ? "excess" : (k < mean ? "deficit" : "none");
    }
    if (prior) s.posterior = bayes_update(*prior, s.normalized_likelihood);
    report.bins.push_back(s);
  }
  return report;
}

namespace {

void check_coincidence(const CoincidenceParams& c) {
  if (c.n_pairs < 1) throw ArgumentError("n_pairs must be >= 1");
  if (!(c.df_min_hz >= 0.0 && c.df_min_hz < c.df_max_hz && std::isfinite(c.df_max_hz))) {
    throw ArgumentError("require 0 <= df_min < df_max");
  }
  if (!(c.tolerance_hz >= 0.0 && std::isfinite(c.tolerance_hz))) throw ArgumentError("tolerance must be finite and >= 0");
  if (c.mode == CoincidenceMode::TargetMatch && c.targets_hz.empty()) {
    throw ArgumentError("target_match needs at least one target");
  }
}

double pos_pow(double base, std::int64_t m) { return base <= 0.0 ? 0.0 : std::pow(base, static_cast<double>(m)); }

// m uniform points on an interval of length len: probability that no two are
// within tau (P0) and that the maximum matching of tau-close points is exactly 1 (P1).
double no_match(std::int64_t m, double tau, double len) {
  if (m <= 1) return 1.0;
  return pos_pow(1.0 - static_cast<double>(m - 1) * tau / len, m);
}

// Probability that a given set of `a` spacings are all <= tau and the other
// m - 1 - a spacings all exceed tau.
double exactly_small(std::int64_t m, std::int64_t a, double tau, double len) {
  double sum = 0.0;
  double binom = 1.0;
  for (std::int64_t s = 0; s <= a; ++s) {
    const double sign = (s % 2 == 0) ? 1.0 : -1.0;
    sum += sign * binom * pos_pow(1.0 - static_cast<double>(m - 1 - a + s) * tau / len, m);
    binom = binom * static_cast<double>(a - s) / static_cast<double>(s + 1);
  }
  return sum;
}

double single_match(std::int64_t m, double tau, double len) {
  if (m <= 1) return 0.0;
  double p = static_cast<double>(m - 1) * exactly_small(m, 1, tau, len);
  if (m >= 3) p += static_cast<double>(m - 2) * exactly_small(m, 2, tau, len);
  return p;
}

double target_hit_fraction(const CoincidenceParams& c) {
  // Union of +-t +- tau windows intersected with the two-sided support.
  std::vector<std::pair<double, double>> windows;
  for (double t : c.targets_hz) {
    const double a = std::abs(t);
    windows.emplace_back(a - c.tolerance_hz, a + c.tolerance_hz);
    windows.emplace_back(-a - c.tolerance_hz, -a + c.tolerance_hz);
  }
  std::sort(windows.begin(), windows.end());
  std::vector<std::pair<double, double>> merged;
  for (const auto& w : windows) {
    if (!merged.empty() && w.first <= merged.back().second) {
      merged.back().second = std::max(merged.back().second, w.second);
    } else {
      merged.push_back(w);
    }
  }
  const std::pair<double, double> support[2] = {{-c.df_max_hz, -c.df_min_hz}, {c.df_min_hz, c.df_max_hz}};
  double covered = 0.0;
  for (const auto& w : merged) {
    for (const auto& s : support) covered += std::max(0.0, std::min(w.second, s.second) - std::max(w.first, s.first));
  }
  return std::min(1.0, covered / (2.0 * (c.df_max_hz - c.df_min_hz)));
}

bool experiment_hits(const CoincidenceParams& c, rng::Engine& eng, std::vector<double>& draws) {
  const double len = c.df_max_hz - c.df_min_hz;
  const double tau = c.tolerance_hz;
  draws.resize(static_cast<std::size_t>(c.n_pairs));
  for (auto& d : draws) {
    const bool negative = rng::uniform01(eng) < 0.5;
    const double mag = c.df_min_hz + len * rng::uniform01(eng);
    d = negative ? -mag : mag;
  }
  if (c.mode == CoincidenceMode::TargetMatch) {
    for (double d : draws) {
      for (double t : c.targets_hz) {
        if (std::abs(d - t) <= tau || std::abs(d + t) <= tau) return true;
      }
    }
    return false;
  }
  if (c.compare_magnitude) {
    for (auto& d : draws) d = std::abs(d);
  }
  std::sort(draws.begin(), draws.end());
  int matched = 0;
  for (std::size_t i = 0; i + 1 < draws.size();) {
    if (draws[i + 1] - draws[i] <= tau) {
      if (++matched >= 2) return true;
      i += 2;
    } else {
      ++i;
    }
  }
  return false;
}

}  // namespace

double df_coincidence_analytic(const CoincidenceParams& c) {
  check_coincidence(c);
  const std::int64_t n = c.n_pairs;
  const double tau = c.tolerance_hz;
  if (c.mode == CoincidenceMode::TargetMatch) {
    const double q = target_hit_fraction(c);
    if (q >= 1.0) return 1.0;
    return -std::expm1(static_cast<double>(n) * std::log1p(-q));
  }
  // Two disjoint matches need four draws.
  if (n < 4) return 0.0;
  if (tau == 0.0) return 0.0;
  const double len = c.df_max_hz - c.df_min_hz;
  if (c.compare_magnitude) {
    return std::clamp(1.0 - no_match(n, tau, len) - single_match(n, tau, len), 0.0, 1.0);
  }
  if (tau >= 2.0 * c.df_max_hz) return 1.0;
  if (tau >= 2.0 * c.df_min_hz) {
    throw ArgumentError("signed any_match analytic form needs tolerance < 2 df_min (or >= 2 df_max)");
  }
  // Draws of opposite sign never match; condition on the sign split.
  double fail = 0.0;
  for (std::int64_t a = 0; a <= n; ++a) {
    const double w = std::exp(std::lgamma(static_cast<double>(n + 1)) - std::lgamma(static_cast<double>(a + 1)) -
                              std::lgamma(static_cast<double>(n - a + 1)) - static_cast<double>(n) * std::numbers::ln2);
    const double p0a = no_match(a, tau, len);
    const double p0b = no_match(n - a, tau, len);
    fail += w * (p0a * p0b + p0a * single_match(n - a, tau, len) + single_match(a, tau, len) * p0b);
  }
  return std::clamp(1.0 - fail, 0.0, 1.0);
}

McEstimate df_coincidence_mc(const CoincidenceParams& c, std::int64_t trials, std::uint64_t seed) {
  check_coincidence(c);
  if (trials < 100000) throw ArgumentError("df_coincidence_mc needs at least 1e5 trials");
  constexpr std::int64_t kBlock = 8192;
  const std::int64_t blocks = (trials + kBlock - 1) / kBlock;
  std::vector<std::int64_t> hits(static_cast<std::size_t>(blocks), 0);

  auto run_block = [&](std::int64_t b) {
    auto eng = rng::substream(seed, rng::Stream::Coincidence, static_cast<std::uint64_t>(b));
    std::vector<double> draws;
    const std::int64_t count = std::min(kBlock, trials - b * kBlock);
    std::int64_t h = 0;
    for (std::int64_t i = 0; i < count; ++i) h += experiment_hits(c, eng, draws) ? 1 : 0;
    hits[static_cast<std::size_t>(b)] = h;
  };
  const auto workers = static_cast<std::int64_t>(std::max(1u, std::thread::hardware_concurrency()));
  if (workers == 1 || blocks == 1) {
    for (std::int64_t b = 0; b < blocks; ++b) run_block(b);
  } else {
    std::vector<std::jthread> pool;
    for (std::int64_t w = 0; w < std::min(workers, blocks); ++w) {
      pool.emplace_back([&, w] {
        for (std::int64_t b = w; b < blocks; b += workers) run_block(b);
      });
    }
  }
  std::int64_t total = 0;
  for (auto h : hits) total += h;
  McEstimate est;
  est.trials = trials;
  est.probability = static_cast<double>(total) / static_cast<double>(trials);
  est.standard_error = std::sqrt(est.probability * (1.0 - est.probability) / static_cast<double>(trials));
  return est;
}

FreqDiffHistogram freq_diff_histogram(const std::vector<PulsePair>& pairs, double bin_width_hz,
                                      double fundamental_hz, double tolerance_hz) {
  if (!(bin_width_hz > 0.0)) throw ArgumentError("histogram bin width must be > 0");
  if (!(fundamental_hz > 0.0) || !(tolerance_hz >= 0.0)) throw ArgumentError("invalid harmonic grid");
  FreqDiffHistogram h;
  h.bin_width_hz = bin_width_hz;
  h.fundamental_hz = fundamental_hz;
  h.tolerance_hz = tolerance_hz;
  if (pairs.size() < 2) return h;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    for (std::size_t j = i + 1; j < pairs.size(); ++j) {
      h.differences.push_back(std::abs(pairs[i].mean_freq_hz() - pairs[j].mean_freq_hz()));
    }
  }
  std::sort(h.differences.begin(), h.differences.end());
  h.counts.assign(static_cast<std::size_t>(std::floor(h.differences.back() / bin_width_hz)) + 1, 0);
  std::int64_t on_grid = 0;
  for (double d : h.differences) {
    ++h.counts[static_cast<std::size_t>(std::floor(d / bin_width_hz))];
    const double k = std::round(d / fundamental_hz);
    if (std::abs(d - k * fundamental_hz) <= tolerance_hz) ++on_grid;
  }
  h.harmonic_score = static_cast<double>(on_grid) / static_cast<double>(h.differences.size());
  return h;
}

UniformityResult uniformity_test(const std::array<std::int64_t, sky::kRaBinCount>& counts) {
  std::int64_t total = 0;
  for (auto c : counts) {
    if (c < 0) throw ArgumentError("uniformity_test: negative count");
    total += c;
  }
  if (total < sky::kRaBinCount) throw ArgumentError("uniformity_test needs at least 80 counts");
  const double expected = static_cast<double>(total) / sky::kRaBinCount;
  UniformityResult r;
  for (auto c : counts) {
    const double d = static_cast<double>(c) - expected;
    r.statistic += d * d / expected;
  }
  r.p_value = boost::math::gamma_q(0.5 * r.dof, 0.5 * r.statistic);
  return r;
}

}  // namespace pulsepair::stats
