#include "pulsepair/ini.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "pulsepair/types.hpp"

namespace pulsepair::ini {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string_view strip_comment(std::string_view s) {
  const auto pos = s.find_first_of("#;");
  return pos == std::string_view::npos ? s : s.substr(0, pos);
}

bool valid_key(std::string_view k) {
  if (k.empty()) return false;
  for (char c : k) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.')) return false;
  }
  return true;
}

}  // namespace

Document parse(std::string_view text, const std::string& source) {
  Document doc;
  doc.source = source;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto raw = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
    pos = (nl == std::string_view::npos) ? text.size() + 1 : nl + 1;
    ++line_no;

    const auto line = trim(strip_comment(raw));
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(source, line_no, "unterminated section header");
      const auto name = trim(line.substr(1, line.size() - 2));
      if (!valid_key(name)) throw ParseError(source, line_no, "invalid section name");
      doc.sections.push_back(Section{std::string(name), line_no, {}});
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(source, line_no, "expected 'key = value'");
    if (doc.sections.empty()) throw ParseError(source, line_no, "key outside of any section");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (!valid_key(key)) throw ParseError(source, line_no, "invalid key '" + std::string(key) + "'");
    if (value.empty()) throw ParseError(source, line_no, "empty value for '" + std::string(key) + "'");
    auto& entries = doc.sections.back().entries;
    for (const auto& e : entries) {
      if (e.key == key) throw ParseError(source, line_no, "duplicate key '" + std::string(key) + "'");
    }
    entries.push_back(Entry{std::string(key), std::string(value), line_no});
  }
  return doc;
}

Document parse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

SectionReader::SectionReader(const Document& doc, const Section& section)
    : doc_(doc), section_(section), used_(section.entries.size(), false) {}

const Entry* SectionReader::find(std::string_view key) {
  for (std::size_t i = 0; i < section_.entries.size(); ++i) {
    if (section_.entries[i].key == key) {
      used_[i] = true;
      return &section_.entries[i];
    }
  }
  return nullptr;
}

bool SectionReader::has(std::string_view key) const {
  for (const auto& e : section_.entries) {
    if (e.key == key) return true;
  }
  return false;
}

std::size_t SectionReader::line_of(std::string_view key) const {
  for (const auto& e : section_.entries) {
    if (e.key == key) return e.line;
  }
  return section_.line;
}

namespace {

double to_double(const std::string& source, const Entry& e) {
  double v = 0.0;
  const char* first = e.value.data();
  const char* last = first + e.value.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
    throw ParseError(source, e.line, "'" + e.key + "' is not a finite number: " + e.value);
  }
  return v;
}

}  // namespace

double SectionReader::get_double(std::string_view key, double fallback) {
  const Entry* e = find(key);
  return e ? to_double(doc_.source, *e) : fallback;
}

double SectionReader::require_double(std::string_view key) {
  const Entry* e = find(key);
  if (!e) throw ParseError(doc_.source, section_.line, "[" + section_.name + "] missing required key '" + std::string(key) + "'");
  return to_double(doc_.source, *e);
}

std::int64_t SectionReader::get_int(std::string_view key, std::int64_t fallback) {
  const Entry* e = find(key);
  if (!e) return fallback;
  std::int64_t v = 0;
  const char* first = e->value.data();
  const char* last = first + e->value.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) throw ParseError(doc_.source, e->line, "'" + e->key + "' is not an integer: " + e->value);
  return v;
}

std::uint64_t SectionReader::get_uint(std::string_view key, std::uint64_t fallback) {
  const Entry* e = find(key);
  if (!e) return fallback;
  std::uint64_t v = 0;
  const char* first = e->value.data();
  const char* last = first + e->value.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) throw ParseError(doc_.source, e->line, "'" + e->key + "' is not an unsigned integer: " + e->value);
  return v;
}

std::string SectionReader::get_string(std::string_view key, const std::string& fallback) {
  const Entry* e = find(key);
  return e ? e->value : fallback;
}

std::vector<double> SectionReader::get_double_list(std::string_view key, const std::vector<double>& fallback) {
  const Entry* e = find(key);
  if (!e) return fallback;
  std::vector<double> out;
  std::string_view rest = e->value;
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const auto item = trim(rest.substr(0, comma));
    Entry tmp{e->key, std::string(item), e->line};
    out.push_back(to_double(doc_.source, tmp));
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
  }
  return out;
}

void SectionReader::finish() const {
  for (std::size_t i = 0; i < used_.size(); ++i) {
    if (!used_[i]) {
      const auto& e = section_.entries[i];
      throw ParseError(doc_.source, e.line, "unknown key '" + e.key + "' in [" + section_.name + "]");
    }
  }
}

}  // namespace pulsepair::ini
