#pragma once

// One-frame rectangular-window DFT per polarization, median noise floor and
// inclusive SNR thresholding.

#include <complex>
#include <cstdint>
#include <memory>
#include <utility>
#include <vector>

#include "pulsepair/config.hpp"
#include "pulsepair/scene.hpp"
#include "pulsepair/types.hpp"

namespace pulsepair {

struct Spectrum {
  double frame_mjd = 0.0;
  Polarization pol = Polarization::LCP;
  double bin_width_hz = 0.0;
  double bin0_freq_hz = 0.0;
  std::vector<double> powers;  // ascending RF, baseband DC at size()/2

  double freq_of(std::size_t bin) const { return bin0_freq_hz + static_cast<double>(bin) * bin_width_hz; }
};

/// Owns an FFTW plan for a fixed transform length. Not thread-safe; use one
/// instance per thread.
class Channelizer {
 public:
  explicit Channelizer(std::size_t fft_length);
  ~Channelizer();
  Channelizer(const Channelizer&) = delete;
  Channelizer& operator=(const Channelizer&) = delete;
  Channelizer(Channelizer&&) noexcept;
  Channelizer& operator=(Channelizer&&) noexcept;

  std::size_t fft_length() const;

  // |DFT|^2 of one polarization stream, shifted to ascending RF order.
  std::vector<double> power_spectrum(const std::vector<std::complex<double>>& samples);

  // Throws FrameSizeError when the block is not exactly one frame long.
  std::pair<Spectrum, Spectrum> channelize(const scene::IqBlock& block);

 private:
  struct Plan;
  std::unique_ptr<Plan> plan_;
};

/// median(powers) / ln 2, the mean of an exponential law with that median.
double estimate_noise_floor(const Spectrum& spec);

/// Events with 10 log10(power / floor) >= threshold_db, restricted to bins
/// whose center lies in the band when a grid is given. Sorted in capture order.
std::vector<ThresholdEvent> detect_events(const Spectrum& lcp, const Spectrum& rcp, double floor_lcp,
                                          double floor_rcp, double threshold_db, const BandGrid* band = nullptr);

/// channelize + floor + detect over a sequence of frames, re-sorted into
/// capture order.
std::vector<ThresholdEvent> capture_events(const std::vector<scene::IqBlock>& blocks, const ObservationConfig& cfg);

}  // namespace pulsepair
