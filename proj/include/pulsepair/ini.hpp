#pragma once

// Sectioned "key = value" text used by scene and config files.
//
//   # comment
//   [section]
//   key_with_unit_hz = 1420.25e6   ; trailing comment
//
// Sections may repeat (scene files use one section per component). Readers
// must consume every key; leftover keys are reported as errors with their line.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace pulsepair::ini {

struct Entry {
  std::string key;
  std::string value;
  std::size_t line = 0;
};

struct Section {
  std::string name;
  std::size_t line = 0;
  std::vector<Entry> entries;
};

struct Document {
  std::string source;  // file name for diagnostics
  std::vector<Section> sections;
};

Document parse(std::string_view text, const std::string& source);
Document parse_file(const std::string& path);

// Typed, consuming view over one section.
class SectionReader {
 public:
  SectionReader(const Document& doc, const Section& section);

  bool has(std::string_view key) const;
  double get_double(std::string_view key, double fallback);
  double require_double(std::string_view key);
  std::int64_t get_int(std::string_view key, std::int64_t fallback);
  std::uint64_t get_uint(std::string_view key, std::uint64_t fallback);
  std::string get_string(std::string_view key, const std::string& fallback);
  std::vector<double> get_double_list(std::string_view key, const std::vector<double>& fallback);

  // Throws ParseError naming the first key that was never read.
  void finish() const;

  std::size_t line() const { return section_.line; }
  std::size_t line_of(std::string_view key) const;
  const std::string& source() const { return doc_.source; }

 private:
  const Entry* find(std::string_view key);

  const Document& doc_;
  const Section& section_;
  std::vector<bool> used_;
};

}  // namespace pulsepair::ini
