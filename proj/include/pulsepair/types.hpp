#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace pulsepair {

// Validation failures map to exit code 2 in the CLI; anything else is internal.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Parse failure in a text input; line is 1-based, 0 when unknown.
class ParseError : public ValidationError {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : ValidationError(source + ":" + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class FrameSizeError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class OrderingError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ArgumentError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class RangeError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

enum class Polarization : std::uint8_t { LCP = 0, RCP = 1 };

inline char pol_code(Polarization p) { return p == Polarization::LCP ? 'L' : 'R'; }

/// One SNR threshold crossing in a single channel of a single integration frame.
struct ThresholdEvent {
  double mjd = 0.0;         // frame timestamp, days
  double rf_freq_hz = 0.0;  // bin center
  Polarization pol = Polarization::LCP;
  double snr_db = 0.0;

  bool operator==(const ThresholdEvent&) const = default;
};

// Capture ordering: (mjd, rf_freq, pol).
inline bool capture_order(const ThresholdEvent& a, const ThresholdEvent& b) {
  if (a.mjd != b.mjd) return a.mjd < b.mjd;
  if (a.rf_freq_hz != b.rf_freq_hz) return a.rf_freq_hz < b.rf_freq_hz;
  return a.pol < b.pol;
}

/// A cross-polarization event pair. dt and df are RCP minus LCP.
struct PulsePair {
  ThresholdEvent lcp;
  ThresholdEvent rcp;
  double dt_s = 0.0;
  double df_hz = 0.0;
  double snr_low_db = 0.0;
  double snr_high_db = 0.0;
  double ra_hours = 0.0;
  std::int64_t ref_frame = 0;             // frame of min(t_L, t_R)
  std::optional<double> interarrival_s;   // unset for the first pair
  std::size_t trial = 0;                  // 1-based after snr_sort, 0 before

  double ref_mjd() const { return lcp.mjd < rcp.mjd ? lcp.mjd : rcp.mjd; }
  double mean_freq_hz() const { return 0.5 * (lcp.rf_freq_hz + rcp.rf_freq_hz); }
};

}  // namespace pulsepair
