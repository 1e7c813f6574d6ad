#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <boost/math/distributions/binomial.hpp>

#include "pulsepair/stats.hpp"
#include "pulsepair/types.hpp"

using namespace pulsepair;
using stats::binomial_density;

namespace {

// P(0) = q^n, P(k+1) = P(k) (n-k)/(k+1) p/q, in long double.
std::vector<long double> recurrence(int n, long double p) {
  std::vector<long double> out(static_cast<std::size_t>(n) + 1);
  const long double q = 1.0L - p;
  out[0] = std::pow(q, static_cast<long double>(n));
  for (int k = 0; k < n; ++k) out[static_cast<std::size_t>(k) + 1] = out[static_cast<std::size_t>(k)] * (n - k) / (k + 1) * p / q;
  return out;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

PulsePair pair_at(double ra, std::size_t trial, double df = 300.0) {
  PulsePair p;
  p.ra_hours = ra;
  p.trial = trial;
  p.df_hz = df;
  p.lcp.rf_freq_hz = 1420.2e6;
  p.rcp.rf_freq_hz = 1420.2e6 + df;
  p.rcp.pol = Polarization::RCP;
  return p;
}

}  // namespace

TEST_SUITE("stats") {
  TEST_CASE("binomial density against 40-digit references") {
    const double p = 1.0 / 80.0;
    CHECK(rel(binomial_density(14, 417, p), 0.00063223121490295423912) < 1e-12);
    CHECK(rel(binomial_density(5, 417, p), 0.17574527801079228595) < 1e-12);
    CHECK(rel(binomial_density(0, 417, p), 0.0052719646857383677842) < 1e-12);
    CHECK(rel(binomial_density(100, 10000, p), 0.0026462925935428299915) < 1e-12);
    CHECK(rel(binomial_density(125, 10000, p), 0.035883676464245539293) < 1e-12);
    CHECK(rel(binomial_density(3, 10, p), 0.0002146204075160510838) < 1e-12);
    CHECK(rel(binomial_density(12500, 1000000, p), 0.0035907371206649301298) < 1e-12);
    CHECK(rel(binomial_density(13000, 1000000, p), 1.6055499844225202487e-7) < 1e-11);
    CHECK(binomial_density(3, 10, 0.5) == doctest::Approx(0.1171875).epsilon(1e-14));
  }

  TEST_CASE("binomial density edge cases") {
    CHECK(binomial_density(0, 0, 0.3) == 1.0);
    CHECK(binomial_density(0, 5, 0.0) == 1.0);
    CHECK(binomial_density(1, 5, 0.0) == 0.0);
    CHECK(binomial_density(5, 5, 1.0) == 1.0);
    CHECK_THROWS_AS(binomial_density(6, 5, 0.5), ArgumentError);
    CHECK_THROWS_AS(binomial_density(-1, 5, 0.5), ArgumentError);
    CHECK_THROWS_AS(binomial_density(1, -1, 0.5), ArgumentError);
    CHECK_THROWS_AS(binomial_density(1, 5, 1.5), ArgumentError);
  }

  TEST_CASE("normalization to 1e-10") {
    for (double p : {1.0 / 80.0, 0.3, 0.97}) {
      for (std::int64_t n : {10, 100, 417, 10000}) {
        long double sum = 0.0L;
        for (std::int64_t k = 0; k <= n; ++k) sum += binomial_density(k, n, p);
        CHECK(std::abs(static_cast<double>(sum) - 1.0) < 1e-10);
      }
    }
  }

  TEST_CASE("exact recurrence for every n <= 60") {
    for (double p : {1.0 / 80.0, 0.1, 0.5, 0.9}) {
      for (int n = 0; n <= 60; ++n) {
        const auto ref = recurrence(n, p);
        for (int k = 0; k <= n; ++k) {
          const auto r = static_cast<double>(ref[static_cast<std::size_t>(k)]);
          if (r < 1e-290) continue;
          INFO("n=" << n << " k=" << k << " p=" << p);
          REQUIRE(rel(binomial_density(k, n, p), r) < 1e-10);
        }
      }
    }
  }

  TEST_CASE("agrees with the Boost binomial pmf") {
    for (std::int64_t n : {417, 2000, 50000}) {
      boost::math::binomial_distribution<double> dist(static_cast<double>(n), 1.0 / 80.0);
      const auto mode = stats::modal_count(n, 1.0 / 80.0);
      for (std::int64_t k = std::max<std::int64_t>(0, mode - 40); k <= mode + 40; ++k) {
        REQUIRE(rel(binomial_density(k, n, 1.0 / 80.0), boost::math::pdf(dist, static_cast<double>(k))) < 1e-11);
      }
    }
  }

  TEST_CASE("log density is the log of the density") {
    CHECK(stats::log_binomial_density(14, 417, 0.0125) == doctest::Approx(std::log(0.00063223121490295423912)).epsilon(1e-13));
    CHECK(stats::log_binomial_density(1, 5, 0.0) == -INFINITY);
  }

  TEST_CASE("modal count") {
    CHECK(stats::modal_count(417, 0.0125) == 5);
    CHECK(stats::modal_count(79, 0.0125) == 1);
    CHECK(stats::modal_count(78, 0.0125) == 0);
    CHECK(stats::modal_count(10, 1.0) == 10);
    // The modal count maximizes the density.
    for (std::int64_t n : {1, 7, 80, 417, 999}) {
      const auto m = stats::modal_count(n, 0.0125);
      for (std::int64_t k = 0; k <= std::min<std::int64_t>(n, 40); ++k) {
        REQUIRE(binomial_density(k, n, 0.0125) <= binomial_density(m, n, 0.0125) * (1 + 1e-12));
      }
    }
  }

  TEST_CASE("normalized likelihood") {
    CHECK(rel(stats::normalized_likelihood(14, 417, 0.0125), 0.0035974293139422485836) < 1e-12);
    CHECK(stats::normalized_likelihood(5, 417, 0.0125) == 1.0);
    for (std::int64_t n = 1; n <= 200; n += 7) {
      for (std::int64_t k = 0; k <= n; ++k) REQUIRE(stats::normalized_likelihood(k, n, 0.0125) <= 1.0 + 1e-12);
    }
  }

  TEST_CASE("Bayes odds update") {
    CHECK(rel(stats::bayes_update(1e-4, 0.0036), 3.6003587397448281747e-7) < 1e-12);
    CHECK(stats::bayes_update(0.5, 1.0) == doctest::Approx(0.5));
    CHECK_THROWS_AS(stats::bayes_update(0.0, 0.5), ArgumentError);
    CHECK_THROWS_AS(stats::bayes_update(1.0, 0.5), ArgumentError);
    CHECK_THROWS_AS(stats::bayes_update(0.1, 0.0), ArgumentError);
    CHECK_THROWS_AS(stats::bayes_update(0.1, 1.5), ArgumentError);
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
      const double prior = std::max(1e-12, u(gen));
      const double lr = std::exp(-20.0 * u(gen));
      const double post = stats::bayes_update(prior, lr);
      REQUIRE(post > 0.0);
      REQUIRE(post <= prior);
    }
  }

  TEST_CASE("likelihood curve of a single bin") {
    std::vector<PulsePair> pairs{pair_at(5.2, 1), pair_at(5.3, 2), pair_at(1.0, 3)};
    const auto curves = stats::likelihood_curves(pairs);
    REQUIRE(curves.size() == 80);
    const auto& c17 = curves[17].points;
    REQUIRE(c17.size() == 3);
    CHECK(c17[0].k == 1);
    CHECK(c17[0].step);
    CHECK(c17[1].k == 2);
    CHECK(c17[2].k == 2);
    CHECK_FALSE(c17[2].step);
    CHECK(c17[2].density == doctest::Approx(3 * 0.0125 * 0.0125 * 0.9875).epsilon(1e-13));
    CHECK(curves[0].points[2].density == doctest::Approx(std::pow(0.9875, 3)).epsilon(1e-13));
  }

  TEST_CASE("final curve point ignores trial order within a bin") {
    std::mt19937_64 gen(4);
    std::uniform_real_distribution<double> u(0.0, 24.0);
    std::vector<PulsePair> pairs;
    for (std::size_t i = 1; i <= 300; ++i) pairs.push_back(pair_at(u(gen), i));
    const auto a = stats::likelihood_curves(pairs);
    std::shuffle(pairs.begin(), pairs.end(), gen);
    const auto b = stats::likelihood_curves(pairs);
    for (std::size_t i = 0; i < 80; ++i) CHECK(a[i].points.back().density == b[i].points.back().density);
  }

  TEST_CASE("trial numbers must be 1..N") {
    CHECK_THROWS_AS(stats::likelihood_curves({pair_at(1.0, 1), pair_at(1.0, 1)}), ArgumentError);
    CHECK_THROWS_AS(stats::likelihood_curves({pair_at(1.0, 2)}), ArgumentError);
    CHECK(stats::likelihood_curves({}).front().points.empty());
  }

  TEST_CASE("analyze picks the minimum and labels its direction") {
    std::vector<PulsePair> pairs;
    for (std::size_t i = 1; i <= 40; ++i) pairs.push_back(pair_at(i % 2 ? 5.25 : 12.0, i));
    const auto rep = stats::analyze(pairs, 0.0125, 1e-4);
    CHECK(rep.total_trials == 40);
    const auto& b17 = rep.bins[17];
    CHECK(b17.direction == "excess");
    CHECK(b17.n_at_min >= 1);
    CHECK(b17.min_density == doctest::Approx(binomial_density(b17.k_at_min, b17.n_at_min, 0.0125)));
    REQUIRE(b17.posterior.has_value());
    CHECK(*b17.posterior == doctest::Approx(stats::bayes_update(1e-4, b17.normalized_likelihood)));
    const auto& empty = rep.bins[30];
    CHECK(empty.direction == "deficit");
    CHECK(empty.min_density == doctest::Approx(std::pow(0.9875, 40)));
  }

  TEST_CASE("analyze with no pairs") {
    const auto rep = stats::analyze({});
    CHECK(rep.total_trials == 0);
    for (const auto& b : rep.bins) {
      CHECK(b.min_density == 1.0);
      CHECK(b.direction == "none");
    }
  }

  TEST_CASE("uniformity chi-square") {
    std::array<std::int64_t, 80> flat;
    flat.fill(5);
    const auto u = stats::uniformity_test(flat);
    CHECK(u.statistic == 0.0);
    CHECK(u.p_value == doctest::Approx(1.0));
    std::array<std::int64_t, 80> spike{};
    spike[3] = 80;
    // (80 - 1)^2 / 1 + 79 * 1
    CHECK(stats::uniformity_test(spike).statistic == doctest::Approx(6320.0));
    CHECK(stats::uniformity_test(spike).p_value < 1e-100);
    std::array<std::int64_t, 80> few{};
    few[0] = 79;
    CHECK_THROWS_AS(stats::uniformity_test(few), ArgumentError);
  }

  TEST_CASE("coincidence closed forms at the extremes") {
    stats::CoincidenceParams p;
    p.tolerance_hz = 0.0;
    CHECK(stats::df_coincidence_analytic(p) == 0.0);
    p.tolerance_hz = 3.7;
    p.n_pairs = 1;
    CHECK(stats::df_coincidence_analytic(p) == 0.0);
    p.n_pairs = 14;
    p.compare_magnitude = true;
    p.tolerance_hz = 2000.0;
    CHECK(stats::df_coincidence_analytic(p) == doctest::Approx(1.0));
    p.compare_magnitude = false;
    p.tolerance_hz = 2200.0;
    CHECK(stats::df_coincidence_analytic(p) == doctest::Approx(1.0));
    p.tolerance_hz = 500.0;  // between 2 df_min and 2 df_max: no closed form
    CHECK_THROWS_AS(stats::df_coincidence_analytic(p), ArgumentError);
  }

  TEST_CASE("single-target closed form") {
    stats::CoincidenceParams p;
    p.mode = stats::CoincidenceMode::TargetMatch;
    p.targets_hz = {500.0};
    p.n_pairs = 1;
    // Both signed windows of width 2 tol over a support of 2 (df_max - df_min).
    CHECK(stats::df_coincidence_analytic(p) == doctest::Approx(2 * 7.4 / 2040.0).epsilon(1e-12));
    p.n_pairs = 14;
    CHECK(stats::df_coincidence_analytic(p) == doctest::Approx(1 - std::pow(1 - 7.4 / 1020.0, 14)).epsilon(1e-12));
    p.targets_hz = {82.0};  // window clipped at df_min
    p.n_pairs = 1;
    CHECK(stats::df_coincidence_analytic(p) == doctest::Approx(5.7 / 1020.0).epsilon(1e-12));
  }

  TEST_CASE("Monte Carlo is seeded and agrees with the closed forms") {
    stats::CoincidenceParams p;
    const auto a = stats::df_coincidence_mc(p, 200000, 11);
    const auto b = stats::df_coincidence_mc(p, 200000, 11);
    CHECK(a.probability == b.probability);
    CHECK(a.trials == 200000);
    CHECK(std::abs(a.probability - stats::df_coincidence_analytic(p)) < 3.5 * a.standard_error);
    p.compare_magnitude = true;
    const auto m = stats::df_coincidence_mc(p, 200000, 12);
    CHECK(std::abs(m.probability - stats::df_coincidence_analytic(p)) < 3.5 * m.standard_error);
    CHECK_THROWS_AS(stats::df_coincidence_mc(p, 1000, 1), ArgumentError);
  }

  TEST_CASE("frequency difference histogram") {
    CHECK(stats::freq_diff_histogram({}, 10e3, 2.44e6, 5e3).differences.empty());
    std::vector<PulsePair> comb;
    for (int k = 0; k < 6; ++k) {
      auto p = pair_at(1.0, static_cast<std::size_t>(k + 1));
      p.lcp.rf_freq_hz = 1.4e9 + k * 2.44e6 + (k % 3) * 700.0;
      p.rcp.rf_freq_hz = p.lcp.rf_freq_hz + 300.0;
      comb.push_back(p);
    }
    const auto h = stats::freq_diff_histogram(comb, 10e3, 2.44e6, 5e3);
    CHECK(h.differences.size() == 15);
    CHECK(h.harmonic_score == 1.0);
    CHECK(std::is_sorted(h.differences.begin(), h.differences.end()));
    std::int64_t total = 0;
    for (auto c : h.counts) total += c;
    CHECK(total == 15);
  }

  TEST_CASE("harmonic score of unrelated frequencies sits at chance") {
    // Two uniform points on [0, S]: |d| has density 2 (S - d) / S^2.
    const double S = 2.5e6, F = 2.44e6, tol = 5e3;
    auto cdf = [&](double d) { d = std::clamp(d, 0.0, S); return (2 * S * d - d * d) / (S * S); };
    const double chance = cdf(tol) + cdf(F + tol) - cdf(F - tol);
    std::mt19937_64 gen(21);
    std::uniform_real_distribution<double> u(0.0, S);
    const int runs = 20000;
    int hits = 0;
    for (int i = 0; i < runs; ++i) {
      std::vector<PulsePair> two{pair_at(1.0, 1), pair_at(1.0, 2)};
      two[0].lcp.rf_freq_hz = 1.4e9 + u(gen);
      two[0].rcp.rf_freq_hz = two[0].lcp.rf_freq_hz;
      two[1].lcp.rf_freq_hz = 1.4e9 + u(gen);
      two[1].rcp.rf_freq_hz = two[1].lcp.rf_freq_hz;
      hits += stats::freq_diff_histogram(two, 10e3, F, tol).harmonic_score > 0.5;
    }
    const double sigma = std::sqrt(chance * (1 - chance) / runs);
    CHECK(std::abs(hits / double(runs) - chance) < 4 * sigma);
  }
}
