#pragma once

// CSV interchange (header row, LF, quoted fields where needed) and SHA-256
// content digests. Readers are strict: any malformed row is a ParseError
// carrying its 1-based line number.

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "pulsepair/rfi_filters.hpp"
#include "pulsepair/stats.hpp"
#include "pulsepair/types.hpp"

namespace pulsepair::io {

inline constexpr const char* kEventHeader = "mjd,freq_hz,pol,snr_db";
inline constexpr const char* kPairHeader =
    "trial,mjd_ref,ra_hours,dt_s,df_hz,snr_low_db,snr_high_db,freq_l_hz,freq_r_hz,interarrival_s";
inline constexpr const char* kMaskHeader = "lo_hz,hi_hz,label";
inline constexpr const char* kTraceHeader = "lo_hz,hi_hz,label,start_mjd,end_mjd";
inline constexpr const char* kCurveHeader = "bin,n,k,density";
inline constexpr const char* kSummaryHeader = "bin,min_density,n_at_min,k_at_min,normalized_likelihood,posterior";

std::vector<std::string> split_csv_line(const std::string& line, const std::string& source, std::size_t line_no);
std::string csv_quote(const std::string& field);

std::string format_event(const ThresholdEvent& e);

/// Append-only capture file: header on open, one flushed row per append.
class EventWriter {
 public:
  explicit EventWriter(const std::filesystem::path& path);
  ~EventWriter();
  EventWriter(const EventWriter&) = delete;
  EventWriter& operator=(const EventWriter&) = delete;

  void append(const ThresholdEvent& e);
  void append(const std::vector<ThresholdEvent>& events);
  void close();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

void write_events(std::ostream& out, const std::vector<ThresholdEvent>& events);
void write_events_file(const std::filesystem::path& path, const std::vector<ThresholdEvent>& events);
// require_sorted: OrderingError naming the first out-of-order line.
std::vector<ThresholdEvent> read_events(std::istream& in, const std::string& source, bool require_sorted = true);
std::vector<ThresholdEvent> read_events_file(const std::filesystem::path& path, bool require_sorted = true);

void write_pairs(std::ostream& out, const std::vector<PulsePair>& pairs);
void write_pairs_file(const std::filesystem::path& path, const std::vector<PulsePair>& pairs);
// Rebuilds pairs as far as the columns allow: the earlier member sits at
// mjd_ref, the LCP member carries snr_low and the RCP member snr_high.
std::vector<PulsePair> read_pairs(std::istream& in, const std::string& source);
std::vector<PulsePair> read_pairs_file(const std::filesystem::path& path);

void write_mask(std::ostream& out, const RfiMask& mask);
RfiMask read_mask(std::istream& in, const std::string& source, MaskSource as = MaskSource::Static);
RfiMask read_mask_file(const std::filesystem::path& path, MaskSource as = MaskSource::Static);
void write_trace(std::ostream& out, const std::vector<TimedMaskInterval>& trace);

void write_curves(std::ostream& out, const std::vector<stats::BinomialCurve>& curves);
void write_summary(std::ostream& out, const stats::AnalysisReport& report);

std::string sha256_hex(const std::string& data);
std::string sha256_file(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
// Writes via a temporary sibling and rename, so readers never see partial files.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace pulsepair::io
