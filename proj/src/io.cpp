#include "pulsepair/io.hpp"

#include <openssl/evp.h>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

namespace pulsepair::io {

namespace {

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

double parse_number(const std::string& field, const std::string& source, std::size_t line, const char* column) {
  double v = 0.0;
  const char* first = field.data();
  const char* last = first + field.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (field.empty() || ec != std::errc() || ptr != last || !std::isfinite(v)) {
    throw ParseError(source, line, std::string("column ") + column + ": '" + field + "' is not a finite number");
  }
  return v;
}

std::int64_t parse_integer(const std::string& field, const std::string& source, std::size_t line, const char* column) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (field.empty() || ec != std::errc() || ptr != field.data() + field.size()) {
    throw ParseError(source, line, std::string("column ") + column + ": '" + field + "' is not an integer");
  }
  return v;
}

// Reads lines, dropping one trailing CR and a UTF-8 BOM on the first line.
class LineReader {
 public:
  LineReader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

  bool next(std::string& line) {
    if (!std::getline(in_, line)) return false;
    ++line_no_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no_ == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    return true;
  }

  void expect_header(const char* header) {
    std::string line;
    if (!next(line)) throw ParseError(source_, 1, std::string("missing header '") + header + "'");
    if (line != header) throw ParseError(source_, line_no_, std::string("expected header '") + header + "'");
  }

  std::size_t line_no() const { return line_no_; }
  const std::string& source() const { return source_; }

 private:
  std::istream& in_;
  std::string source_;
  std::size_t line_no_ = 0;
};

std::vector<std::string> fields_of(const std::string& line, const LineReader& r, std::size_t expected) {
  auto f = split_csv_line(line, r.source(), r.line_no());
  if (f.size() != expected) {
    throw ParseError(r.source(), r.line_no(),
                     "expected " + std::to_string(expected) + " fields, found " + std::to_string(f.size()));
  }
  return f;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path.string() + "' for reading");
  return in;
}

}  // namespace

std::vector<std::string> split_csv_line(const std::string& line, const std::string& source, std::size_t line_no) {
  std::vector<std::string> out;
  std::string field;
  std::size_t i = 0;
  while (true) {
    field.clear();
    if (i < line.size() && line[i] == '"') {
      ++i;
      while (true) {
        if (i >= line.size()) throw ParseError(source, line_no, "unterminated quoted field");
        if (line[i] == '"') {
          if (i + 1 < line.size() && line[i + 1] == '"') {
            field += '"';
            i += 2;
            continue;
          }
          ++i;
          break;
        }
        field += line[i++];
      }
      if (i < line.size() && line[i] != ',') throw ParseError(source, line_no, "text after closing quote");
    } else {
      while (i < line.size() && line[i] != ',') {
        if (line[i] == '"') throw ParseError(source, line_no, "stray quote in unquoted field");
        field += line[i++];
      }
    }
    out.push_back(field);
    if (i >= line.size()) break;
    ++i;  // comma
  }
  return out;
}

std::string csv_quote(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string format_event(const ThresholdEvent& e) {
  return fmt("%.9f", e.mjd) + "," + fmt("%.3f", e.rf_freq_hz) + "," + pol_code(e.pol) + "," + fmt("%.6f", e.snr_db);
}

struct EventWriter::Impl {
  std::ofstream out;
};

EventWriter::EventWriter(const std::filesystem::path& path) : impl_(std::make_unique<Impl>()) {
  impl_->out.open(path, std::ios::binary | std::ios::trunc);
  if (!impl_->out) throw ValidationError("cannot open '" + path.string() + "' for writing");
  impl_->out << kEventHeader << '\n' << std::flush;
}

EventWriter::~EventWriter() = default;

void EventWriter::append(const ThresholdEvent& e) {
  impl_->out << format_event(e) << '\n' << std::flush;
}

void EventWriter::append(const std::vector<ThresholdEvent>& events) {
  for (const auto& e : events) impl_->out << format_event(e) << '\n';
  impl_->out.flush();
  if (!impl_->out) throw std::runtime_error("event file write failed");
}

void EventWriter::close() { impl_->out.close(); }

void write_events(std::ostream& out, const std::vector<ThresholdEvent>& events) {
  out << kEventHeader << '\n';
  for (const auto& e : events) out << format_event(e) << '\n';
}

void write_events_file(const std::filesystem::path& path, const std::vector<ThresholdEvent>& events) {
  std::ostringstream out;
  write_events(out, events);
  write_text_file(path, out.str());
}

std::vector<ThresholdEvent> read_events(std::istream& in, const std::string& source, bool require_sorted) {
  LineReader r(in, source);
  r.expect_header(kEventHeader);
  std::vector<ThresholdEvent> events;
  std::string line;
  while (r.next(line)) {
    if (line.empty()) throw ParseError(source, r.line_no(), "empty line");
    const auto f = fields_of(line, r, 4);
    ThresholdEvent e;
    e.mjd = parse_number(f[0], source, r.line_no(), "mjd");
    e.rf_freq_hz = parse_number(f[1], source, r.line_no(), "freq_hz");
    if (f[2] == "L") {
      e.pol = Polarization::LCP;
    } else if (f[2] == "R") {
      e.pol = Polarization::RCP;
    } else {
      throw ParseError(source, r.line_no(), "column pol: expected L or R, found '" + f[2] + "'");
    }
    e.snr_db = parse_number(f[3], source, r.line_no(), "snr_db");
    if (!(e.rf_freq_hz > 0.0)) throw ParseError(source, r.line_no(), "column freq_hz: must be > 0");
    if (require_sorted && !events.empty() && e.mjd < events.back().mjd) {
      throw OrderingError(source + ":" + std::to_string(r.line_no()) + ": event earlier than the previous line");
    }
    events.push_back(e);
  }
  return events;
}

std::vector<ThresholdEvent> read_events_file(const std::filesystem::path& path, bool require_sorted) {
  auto in = open_in(path);
  return read_events(in, path.string(), require_sorted);
}

void write_pairs(std::ostream& out, const std::vector<PulsePair>& pairs) {
  out << kPairHeader << '\n';
  for (const auto& p : pairs) {
    out << p.trial << ',' << fmt("%.9f", p.ref_mjd()) << ',' << fmt("%.9f", p.ra_hours) << ',' << fmt("%.5f", p.dt_s)
        << ',' << fmt("%.6f", p.df_hz) << ',' << fmt("%.6f", p.snr_low_db) << ',' << fmt("%.6f", p.snr_high_db) << ','
        << fmt("%.3f", p.lcp.rf_freq_hz) << ',' << fmt("%.3f", p.rcp.rf_freq_hz) << ','
        << (p.interarrival_s ? fmt("%.6f", *p.interarrival_s) : std::string()) << '\n';
  }
}

void write_pairs_file(const std::filesystem::path& path, const std::vector<PulsePair>& pairs) {
  std::ostringstream out;
  write_pairs(out, pairs);
  write_text_file(path, out.str());
}

std::vector<PulsePair> read_pairs(std::istream& in, const std::string& source) {
  LineReader r(in, source);
  r.expect_header(kPairHeader);
  std::vector<PulsePair> pairs;
  std::string line;
  while (r.next(line)) {
    if (line.empty()) throw ParseError(source, r.line_no(), "empty line");
    const auto f = fields_of(line, r, 10);
    const auto ln = r.line_no();
    PulsePair p;
    const auto trial = parse_integer(f[0], source, ln, "trial");
    if (trial < 0) throw ParseError(source, ln, "column trial: must be >= 0");
    p.trial = static_cast<std::size_t>(trial);
    const double ref = parse_number(f[1], source, ln, "mjd_ref");
    p.ra_hours = parse_number(f[2], source, ln, "ra_hours");
    if (p.ra_hours < 0.0 || p.ra_hours >= 24.0) throw ParseError(source, ln, "column ra_hours: must be in [0, 24)");
    p.dt_s = parse_number(f[3], source, ln, "dt_s");
    p.df_hz = parse_number(f[4], source, ln, "df_hz");
    p.snr_low_db = parse_number(f[5], source, ln, "snr_low_db");
    p.snr_high_db = parse_number(f[6], source, ln, "snr_high_db");
    if (p.snr_low_db > p.snr_high_db) throw ParseError(source, ln, "snr_low_db exceeds snr_high_db");
    const double fl = parse_number(f[7], source, ln, "freq_l_hz");
    const double fr = parse_number(f[8], source, ln, "freq_r_hz");
    if (!f[9].empty()) {
      p.interarrival_s = parse_number(f[9], source, ln, "interarrival_s");
      if (*p.interarrival_s < 0.0) throw ParseError(source, ln, "column interarrival_s: must be >= 0");
    }
    const double dt_days = p.dt_s / kSecondsPerDay;
    p.lcp = ThresholdEvent{p.dt_s >= 0.0 ? ref : ref - dt_days, fl, Polarization::LCP, p.snr_low_db};
    p.rcp = ThresholdEvent{p.dt_s >= 0.0 ? ref + dt_days : ref, fr, Polarization::RCP, p.snr_high_db};
    pairs.push_back(p);
  }
  return pairs;
}

std::vector<PulsePair> read_pairs_file(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_pairs(in, path.string());
}

void write_mask(std::ostream& out, const RfiMask& mask) {
  out << kMaskHeader << '\n';
  for (const auto& iv : mask.intervals()) {
    out << fmt("%.3f", iv.lo_hz) << ',' << fmt("%.3f", iv.hi_hz) << ','
        << csv_quote(iv.label.empty() ? mask_source_name(iv.source) : iv.label) << '\n';
  }
}

RfiMask read_mask(std::istream& in, const std::string& source, MaskSource as) {
  LineReader r(in, source);
  r.expect_header(kMaskHeader);
  std::vector<MaskInterval> intervals;
  std::string line;
  while (r.next(line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto f = fields_of(line, r, 3);
    MaskInterval iv;
    iv.lo_hz = parse_number(f[0], source, r.line_no(), "lo_hz");
    iv.hi_hz = parse_number(f[1], source, r.line_no(), "hi_hz");
    if (iv.lo_hz > iv.hi_hz) throw ParseError(source, r.line_no(), "lo_hz exceeds hi_hz");
    iv.source = as;
    iv.label = f[2];
    intervals.push_back(iv);
  }
  return RfiMask(std::move(intervals));
}

RfiMask read_mask_file(const std::filesystem::path& path, MaskSource as) {
  auto in = open_in(path);
  return read_mask(in, path.string(), as);
}

void write_trace(std::ostream& out, const std::vector<TimedMaskInterval>& trace) {
  out << kTraceHeader << '\n';
  for (const auto& t : trace) {
    out << fmt("%.3f", t.interval.lo_hz) << ',' << fmt("%.3f", t.interval.hi_hz) << ',' << csv_quote(t.interval.label)
        << ',' << fmt("%.9f", t.start_mjd) << ',' << fmt("%.9f", t.end_mjd) << '\n';
  }
}

void write_curves(std::ostream& out, const std::vector<stats::BinomialCurve>& curves) {
  out << kCurveHeader << '\n';
  for (const auto& c : curves) {
    for (const auto& pt : c.points) {
      out << c.bin.index << ',' << pt.n << ',' << pt.k << ',' << fmt("%.12e", pt.density) << '\n';
    }
  }
}

void write_summary(std::ostream& out, const stats::AnalysisReport& report) {
  out << kSummaryHeader << '\n';
  for (const auto& b : report.bins) {
    out << b.bin.index << ',' << fmt("%.12e", b.min_density) << ',' << b.n_at_min << ',' << b.k_at_min << ','
        << fmt("%.12e", b.normalized_likelihood) << ',' << (b.posterior ? fmt("%.12e", *b.posterior) : std::string())
        << '\n';
  }
}

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 digest failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 0xf];
  }
  return out;
}

std::string sha256_file(const std::filesystem::path& path) { return sha256_hex(read_text_file(path)); }

std::string read_text_file(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot open '" + tmp.string() + "' for writing");
    out << text;
    out.flush();
    if (!out) throw std::runtime_error("write to '" + tmp.string() + "' failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw std::filesystem::filesystem_error("cannot replace output", tmp, path, ec);
  }
}

}  // namespace pulsepair::io
