#include "pulsepair/channelizer.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <string>

namespace pulsepair {

namespace {

// FFTW's planner is not reentrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

constexpr double kThresholdSlackDb = 1e-9;

}  // namespace

struct Channelizer::Plan {
  std::size_t n = 0;
  fftw_complex* in = nullptr;
  fftw_complex* out = nullptr;
  fftw_plan plan = nullptr;

  explicit Plan(std::size_t len) : n(len) {
    in = fftw_alloc_complex(n);
    out = fftw_alloc_complex(n);
    if (!in || !out) {
      release();
      throw std::bad_alloc();
    }
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft_1d(static_cast<int>(n), in, out, FFTW_FORWARD, FFTW_ESTIMATE);
    if (!plan) {
      release();
      throw std::runtime_error("fftw plan creation failed for length " + std::to_string(len));
    }
  }
  ~Plan() { release(); }
  Plan(const Plan&) = delete;
  Plan& operator=(const Plan&) = delete;

  void release() {
    if (plan) {
      std::lock_guard lock(planner_mutex());
      fftw_destroy_plan(plan);
    }
    fftw_free(in);
    fftw_free(out);
    plan = nullptr;
    in = out = nullptr;
  }
};

Channelizer::Channelizer(std::size_t fft_length) {
  if (fft_length < 2) throw ArgumentError("fft length must be >= 2");
  plan_ = std::make_unique<Plan>(fft_length);
}

Channelizer::~Channelizer() = default;
Channelizer::Channelizer(Channelizer&&) noexcept = default;
Channelizer& Channelizer::operator=(Channelizer&&) noexcept = default;

std::size_t Channelizer::fft_length() const { return plan_->n; }

std::vector<double> Channelizer::power_spectrum(const std::vector<std::complex<double>>& samples) {
  const std::size_t n = plan_->n;
  if (samples.size() != n) {
    throw FrameSizeError("frame has " + std::to_string(samples.size()) + " samples, expected " + std::to_string(n));
  }
  for (std::size_t i = 0; i < n; ++i) {
    plan_->in[i][0] = samples[i].real();
    plan_->in[i][1] = samples[i].imag();
  }
  fftw_execute(plan_->plan);
  // fftshift: output index i holds DFT bin (i + n/2) mod n.
  std::vector<double> powers(n);
  const std::size_t half = n / 2;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& c = plan_->out[(i + n - half) % n];
    powers[i] = c[0] * c[0] + c[1] * c[1];
  }
  return powers;
}

std::pair<Spectrum, Spectrum> Channelizer::channelize(const scene::IqBlock& block) {
  if (block.samples_lcp.size() != block.samples_rcp.size()) {
    throw FrameSizeError("LCP and RCP streams differ in length");
  }
  if (!(block.sample_rate_hz > 0.0)) throw ArgumentError("block sample rate must be > 0");
  const double width = block.sample_rate_hz / static_cast<double>(plan_->n);
  const double bin0 = block.center_freq_hz - static_cast<double>(plan_->n / 2) * width;
  auto make = [&](Polarization pol, const std::vector<std::complex<double>>& s) {
    Spectrum spec;
    spec.frame_mjd = block.start_mjd;
    spec.pol = pol;
    spec.bin_width_hz = width;
    spec.bin0_freq_hz = bin0;
    spec.powers = power_spectrum(s);
    return spec;
  };
  return {make(Polarization::LCP, block.samples_lcp), make(Polarization::RCP, block.samples_rcp)};
}

double estimate_noise_floor(const Spectrum& spec) {
  if (spec.powers.empty()) throw ArgumentError("estimate_noise_floor: empty spectrum");
  std::vector<double> work = spec.powers;
  const auto mid = work.begin() + static_cast<std::ptrdiff_t>(work.size() / 2);
  std::nth_element(work.begin(), mid, work.end());
  return *mid / std::numbers::ln2;
}

std::vector<ThresholdEvent> detect_events(const Spectrum& lcp, const Spectrum& rcp, double floor_lcp,
                                          double floor_rcp, double threshold_db, const BandGrid* band) {
  if (!(threshold_db >= 0.0)) throw ArgumentError("threshold must be >= 0 dB");
  std::vector<ThresholdEvent> out;
  auto scan = [&](const Spectrum& spec, double floor) {
    if (!(floor > 0.0) || !std::isfinite(floor)) return;
    const double min_ratio = std::pow(10.0, (threshold_db - kThresholdSlackDb) / 10.0);
    for (std::size_t i = 0; i < spec.powers.size(); ++i) {
      const double ratio = spec.powers[i] / floor;
      if (!(ratio >= min_ratio)) continue;
      const double f = spec.freq_of(i);
      if (band && !band->in_band(f)) continue;
      const double snr = std::max(10.0 * std::log10(ratio), threshold_db);
      out.push_back(ThresholdEvent{spec.frame_mjd, f, spec.pol, snr});
    }
  };
  scan(lcp, floor_lcp);
  scan(rcp, floor_rcp);
  std::sort(out.begin(), out.end(), capture_order);
  return out;
}

std::vector<ThresholdEvent> capture_events(const std::vector<scene::IqBlock>& blocks, const ObservationConfig& cfg) {
  const BandGrid grid(cfg);
  Channelizer ch(cfg.fft_length());
  std::vector<ThresholdEvent> events;
  for (const auto& block : blocks) {
    auto [l, r] = ch.channelize(block);
    auto found = detect_events(l, r, estimate_noise_floor(l), estimate_noise_floor(r), cfg.capture_snr_db, &grid);
    events.insert(events.end(), found.begin(), found.end());
  }
  std::stable_sort(events.begin(), events.end(), capture_order);
  return events;
}

}  // namespace pulsepair
