#include "gridsiem/events.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <vector>

#include "gridsiem/errors.hpp"

namespace gridsiem {

namespace {

constexpr std::array<std::string_view, 10> kSourceKindNames = {
    "WsnProbe",   "AppProbe",       "TrafficProbe",  "HostProbe", "GpsAbsProbe",
    "GpsRelProbe", "GpsPerSatProbe", "GpsConstProbe", "Simulator", "Engine"};

constexpr std::array<std::string_view, 3> kSeverityNames = {"Info", "Warning", "Alarm"};

}  // namespace

std::string_view to_string(SourceKind k) { return kSourceKindNames[static_cast<std::size_t>(k)]; }

std::string_view to_string(Severity s) { return kSeverityNames[static_cast<std::size_t>(s)]; }

std::optional<SourceKind> parse_source_kind(std::string_view s) {
  for (std::size_t i = 0; i < kSourceKindNames.size(); ++i) {
    if (kSourceKindNames[i] == s) return static_cast<SourceKind>(i);
  }
  return std::nullopt;
}

std::optional<Severity> parse_severity(std::string_view s) {
  for (std::size_t i = 0; i < kSeverityNames.size(); ++i) {
    if (kSeverityNames[i] == s) return static_cast<Severity>(i);
  }
  return std::nullopt;
}

ScalarKind kind_of(const Scalar& v) { return static_cast<ScalarKind>(v.index()); }

const std::string& NormalizedEvent::get_string(const std::string& key) const {
  return std::get<std::string>(attrs.at(key));
}

std::int64_t NormalizedEvent::get_int(const std::string& key) const {
  return std::get<std::int64_t>(attrs.at(key));
}

double NormalizedEvent::get_real(const std::string& key) const {
  const auto& v = attrs.at(key);
  if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
  return std::get<double>(v);
}

bool EventQuery::matches(const NormalizedEvent& e) const {
  if (e.ts_us < t_start_us || e.ts_us > t_end_us) return false;
  if (source_kinds && !source_kinds->count(e.source_kind)) return false;
  if (event_types && !event_types->count(e.event_type)) return false;
  for (const auto& [key, value] : attr_equals) {
    auto it = e.attrs.find(key);
    if (it == e.attrs.end() || it->second != value) return false;
  }
  return true;
}

std::string format_real(double d) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), d);
  return std::string(buf.data(), ptr);
}

std::optional<double> parse_real(std::string_view text) {
  if (text.empty()) return std::nullopt;
  double d = 0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, d);
  if (ec != std::errc{} || ptr != last) return std::nullopt;
  return d;
}

std::string render_scalar(const Scalar& v) {
  switch (kind_of(v)) {
    case ScalarKind::Integer:
      return std::to_string(std::get<std::int64_t>(v));
    case ScalarKind::Real: {
      const double d = std::get<double>(v);
      std::string out = format_real(d);
      if (std::isfinite(d) && out.find_first_of(".e") == std::string::npos) out += ".0";
      return out;
    }
    case ScalarKind::String: {
      const auto& s = std::get<std::string>(v);
      std::string out;
      out.reserve(s.size() + 2);
      out += '"';
      for (char c : s) {
        switch (c) {
          case '"': out += "\\\""; break;
          case '\\': out += "\\\\"; break;
          case '\t': out += "\\t"; break;
          case '\n': out += "\\n"; break;
          default: out += c;
        }
      }
      out += '"';
      return out;
    }
  }
  return {};
}

std::optional<Scalar> parse_scalar(std::string_view text) {
  if (text.empty()) return std::nullopt;
  if (text.front() == '"') {
    if (text.size() < 2 || text.back() != '"') return std::nullopt;
    std::string out;
    for (std::size_t i = 1; i + 1 < text.size(); ++i) {
      char c = text[i];
      if (c == '"') return std::nullopt;
      if (c != '\\') {
        out += c;
        continue;
      }
      if (i + 2 >= text.size()) return std::nullopt;
      switch (text[++i]) {
        case '"': out += '"'; break;
        case '\\': out += '\\'; break;
        case 't': out += '\t'; break;
        case 'n': out += '\n'; break;
        default: return std::nullopt;
      }
    }
    return Scalar{std::move(out)};
  }
  const char* first = text.data();
  const char* last = text.data() + text.size();
  const bool looks_real = text.find_first_of(".eEna") != std::string_view::npos;
  if (!looks_real) {
    std::int64_t i = 0;
    auto [ptr, ec] = std::from_chars(first, last, i);
    if (ec != std::errc{} || ptr != last) return std::nullopt;
    return Scalar{i};
  }
  double d = 0;
  auto [ptr, ec] = std::from_chars(first, last, d);
  if (ec != std::errc{} || ptr != last) return std::nullopt;
  return Scalar{d};
}

std::string to_log_line(const NormalizedEvent& e) {
  std::string line;
  line += std::to_string(e.event_id);
  line += '\t';
  line += std::to_string(e.ts_us);
  line += '\t';
  line += e.source_id;
  line += '\t';
  line += to_string(e.source_kind);
  line += '\t';
  line += e.event_type;
  line += '\t';
  line += to_string(e.severity);
  line += '\t';
  bool first = true;
  for (const auto& [key, value] : e.attrs) {
    if (!first) line += ';';
    first = false;
    line += key;
    line += '=';
    line += render_scalar(value);
  }
  return line;
}

namespace {

// Splits on `sep` outside of double-quoted runs.
std::vector<std::string_view> split_unquoted(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  bool in_quotes = false;
  std::size_t start = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (in_quotes && c == '\\') {
      ++i;
      continue;
    }
    if (c == '"') in_quotes = !in_quotes;
    if (!in_quotes && c == sep) {
      parts.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  parts.push_back(s.substr(start));
  return parts;
}

template <typename Int>
bool parse_int(std::string_view s, Int& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size() && !s.empty();
}

}  // namespace

NormalizedEvent parse_log_line(std::string_view line, std::size_t line_no) {
  auto fields = split_unquoted(line, '\t');
  if (fields.size() != 7) {
    throw LogCorrupt(line_no, "expected 7 tab-separated fields, got " + std::to_string(fields.size()));
  }
  NormalizedEvent e;
  if (!parse_int(fields[0], e.event_id)) throw LogCorrupt(line_no, "bad event_id");
  if (!parse_int(fields[1], e.ts_us) || e.ts_us < 0) throw LogCorrupt(line_no, "bad ts_us");
  e.source_id = std::string(fields[2]);
  if (e.source_id.empty()) throw LogCorrupt(line_no, "empty source_id");
  auto kind = parse_source_kind(fields[3]);
  if (!kind) throw LogCorrupt(line_no, "unknown source_kind");
  e.source_kind = *kind;
  e.event_type = std::string(fields[4]);
  if (e.event_type.empty()) throw LogCorrupt(line_no, "empty event_type");
  auto sev = parse_severity(fields[5]);
  if (!sev) throw LogCorrupt(line_no, "unknown severity");
  e.severity = *sev;
  if (!fields[6].empty()) {
    for (auto pair : split_unquoted(fields[6], ';')) {
      const auto eq = pair.find('=');
      if (eq == std::string_view::npos || eq == 0) throw LogCorrupt(line_no, "bad attribute");
      auto value = parse_scalar(pair.substr(eq + 1));
      if (!value) throw LogCorrupt(line_no, "bad attribute value");
      e.attrs.emplace(std::string(pair.substr(0, eq)), std::move(*value));
    }
  }
  return e;
}

}  // namespace gridsiem
