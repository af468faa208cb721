#include "gridsiem/normalize.hpp"

#include <cctype>
#include <charconv>
#include <cmath>

#include "gridsiem/errors.hpp"

namespace gridsiem {

namespace {

std::vector<std::string_view> tokens(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && s[i] == ' ') ++i;
    if (i >= s.size()) break;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ') ++j;
    out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

double real_at(const std::vector<std::string_view>& t, std::size_t i, const RawRecord& r) {
  auto v = parse_real(t[i]);
  if (!v) throw ParseError("bad number '" + std::string(t[i]) + "' in '" + r.native_payload + "'");
  return *v;
}

std::int64_t int_at(const std::vector<std::string_view>& t, std::size_t i, const RawRecord& r) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(t[i].data(), t[i].data() + t[i].size(), v);
  if (ec != std::errc{} || ptr != t[i].data() + t[i].size()) {
    throw ParseError("bad integer '" + std::string(t[i]) + "' in '" + r.native_payload + "'");
  }
  return v;
}

void expect(const std::vector<std::string_view>& t, std::size_t n, const RawRecord& r) {
  if (t.size() != n) {
    throw ParseError("expected " + std::to_string(n) + " fields in '" + r.native_payload + "'");
  }
}

bool is_id(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.' ||
          c == '*')) {
      return false;
    }
  }
  return true;
}

std::string id_at(const std::vector<std::string_view>& t, std::size_t i, const RawRecord& r) {
  if (!is_id(t[i])) throw ParseError("bad identifier in '" + r.native_payload + "'");
  return std::string(t[i]);
}

}  // namespace

bool has_parser(SourceKind kind) {
  return kind != SourceKind::Simulator && kind != SourceKind::Engine;
}

Normalizer::Normalizer(NormalizerContext ctx, const SchemaRegistry& registry)
    : ctx_(std::move(ctx)), registry_(registry) {}

const ThresholdProfile* Normalizer::profile(const std::string& signal) const {
  auto it = ctx_.profiles.find(signal);
  return it == ctx_.profiles.end() ? nullptr : &it->second;
}

NormalizedEvent Normalizer::normalize(const RawRecord& r) const {
  if (!has_parser(r.source_kind)) {
    throw ParseError("no parser for source kind " + std::string(to_string(r.source_kind)));
  }
  const auto t = tokens(r.native_payload);
  if (t.empty()) throw ParseError("empty payload from '" + r.source_id + "'");

  NormalizedEvent e;
  e.ts_us = r.ts_us;
  e.source_id = r.source_id;
  e.source_kind = r.source_kind;
  e.severity = Severity::Info;
  const std::string_view tag = t[0];
  const SourceKind k = r.source_kind;
  auto wrong_tag = [&] {
    return ParseError("record '" + std::string(tag) + "' not valid for source kind " +
                      std::string(to_string(k)));
  };

  if (tag == "RATE") {
    if (k != SourceKind::WsnProbe) throw wrong_tag();
    expect(t, 3, r);
    const auto node = id_at(t, 1, r);
    const double rate = real_at(t, 2, r);
    e.event_type = "packet_rate_report";
    e.attrs = {{"node_id", node}, {"rate_pps", rate}, {"reporting_period_us", ctx_.wsn_period_us}};
    if (const auto* p = profile(wsn_rate_signal(node))) {
      e.attrs["baseline_pps"] = p->mean;
      e.attrs["threshold_pps"] = p->threshold;
      if (rate > p->threshold) e.severity = Severity::Warning;
    }
  } else if (tag == "ARRIVAL") {
    if (k != SourceKind::AppProbe) throw wrong_tag();
    expect(t, 3, r);
    e.event_type = "arrival_rate_alarm";
    e.severity = Severity::Alarm;
    e.attrs = {{"server_id", r.source_id},
               {"rate_pps", real_at(t, 1, r)},
               {"threshold_pps", real_at(t, 2, r)},
               {"window_us", ctx_.app_window_us}};
  } else if (tag == "TRAF") {
    if (k != SourceKind::TrafficProbe) throw wrong_tag();
    expect(t, 4, r);
    const double syn = real_at(t, 1, r), synack = real_at(t, 2, r), ack = real_at(t, 3, r);
    if (syn < 0 || synack < 0 || ack < 0) throw ParseError("negative rate in '" + r.native_payload + "'");
    const double ratio = syn_to_ack_ratio(syn, ack);
    e.event_type = "traffic_report";
    e.attrs = {{"router_id", r.source_id}, {"syn_pps", syn},   {"synack_pps", synack},
               {"ack_pps", ack},           {"syn_to_ack_ratio", ratio},
               {"window_us", ctx_.traffic_window_us}};
    if (const auto* p = profile(traffic_ratio_signal(r.source_id))) {
      const bool anomaly = ratio > p->threshold;
      e.attrs["threshold"] = p->threshold;
      e.attrs["anomaly"] = std::int64_t{anomaly};
      if (anomaly) e.severity = Severity::Warning;
    }
  } else if (tag == "HOST") {
    if (k != SourceKind::HostProbe) throw wrong_tag();
    expect(t, 3, r);
    const auto half_open = int_at(t, 1, r);
    const auto capacity = int_at(t, 2, r);
    if (capacity <= 0 || half_open < 0 || half_open > capacity) {
      throw ParseError("inconsistent half-open counts in '" + r.native_payload + "'");
    }
    const double occupancy = static_cast<double>(half_open) / static_cast<double>(capacity);
    e.event_type = "host_report";
    e.attrs = {{"server_id", r.source_id},
               {"half_open_count", half_open},
               {"half_open_capacity", capacity},
               {"occupancy", occupancy}};
    if (const auto* p = profile(host_occupancy_signal(r.source_id))) {
      const bool anomaly = occupancy > p->threshold;
      e.attrs["threshold"] = p->threshold;
      e.attrs["anomaly"] = std::int64_t{anomaly};
      if (anomaly) e.severity = Severity::Warning;
    }
  } else if (tag == "SAT") {
    if (k != SourceKind::GpsPerSatProbe) throw wrong_tag();
    expect(t, 4, r);
    if (t[2] != "CN0") throw ParseError("expected CN0 in '" + r.native_payload + "'");
    e.event_type = "sat_observation";
    e.attrs = {{"receiver_id", gps_receiver_of(r.source_id)},
               {"sat_id", id_at(t, 1, r)},
               {"cn0_dbhz", real_at(t, 3, r)}};
  } else if (tag == "CONST") {
    if (k != SourceKind::GpsConstProbe) throw wrong_tag();
    expect(t, 3, r);
    const auto n = int_at(t, 1, r);
    std::int64_t listed = 0;
    if (t[2] != "-") {
      std::size_t start = 0;
      const std::string_view ids = t[2];
      while (true) {
        const auto comma = ids.find(',', start);
        if (!is_id(ids.substr(start, comma - start))) {
          throw ParseError("bad satellite list in '" + r.native_payload + "'");
        }
        ++listed;
        if (comma == std::string_view::npos) break;
        start = comma + 1;
      }
    }
    if (listed != n) throw ParseError("satellite count mismatch in '" + r.native_payload + "'");
    e.event_type = "constellation_report";
    e.attrs = {{"receiver_id", gps_receiver_of(r.source_id)},
               {"n_sats", n},
               {"sat_ids", std::string(t[2] == "-" ? "" : t[2])}};
  } else if (tag == "ABSALARM") {
    if (k != SourceKind::GpsAbsProbe) throw wrong_tag();
    expect(t, 3, r);
    e.event_type = "gps_abs_alarm";
    e.severity = Severity::Alarm;
    e.attrs = {{"receiver_id", gps_receiver_of(r.source_id)},
               {"mean_cn0_dbhz", real_at(t, 1, r)},
               {"threshold", real_at(t, 2, r)}};
  } else if (tag == "RELALARM") {
    if (k != SourceKind::GpsRelProbe) throw wrong_tag();
    expect(t, 3, r);
    e.event_type = "gps_rel_alarm";
    e.severity = Severity::Alarm;
    e.attrs = {{"receiver_id", gps_receiver_of(r.source_id)},
               {"delta_dbhz", real_at(t, 1, r)},
               {"threshold", real_at(t, 2, r)}};
  } else if (tag == "SATALARM") {
    if (k != SourceKind::GpsPerSatProbe) throw wrong_tag();
    expect(t, 5, r);
    const auto test = std::string(t[2]);
    if (test != "abs" && test != "rel" && test != "flat") {
      throw ParseError("unknown per-satellite test '" + test + "'");
    }
    e.event_type = "gps_persat_alarm";
    e.severity = Severity::Alarm;
    e.attrs = {{"receiver_id", gps_receiver_of(r.source_id)},
               {"sat_id", id_at(t, 1, r)},
               {"test", test},
               {"value", real_at(t, 3, r)},
               {"threshold", real_at(t, 4, r)}};
  } else if (tag == "CONSTALARM") {
    if (k != SourceKind::GpsConstProbe) throw wrong_tag();
    expect(t, 4, r);
    e.event_type = "gps_const_alarm";
    e.severity = Severity::Alarm;
    e.attrs = {{"receiver_id", gps_receiver_of(r.source_id)},
               {"churn", int_at(t, 1, r)},
               {"n_prev", int_at(t, 2, r)},
               {"n_now", int_at(t, 3, r)}};
  } else {
    throw ParseError("unknown record tag '" + std::string(tag) + "'");
  }

  try {
    registry_.validate(e);
  } catch (const SchemaViolation& ex) {
    throw ParseError(std::string("normalized record rejected: ") + ex.what());
  }
  return e;
}

NormalizedEvent normalize(const RawRecord& r) {
  static const Normalizer plain;
  return plain.normalize(r);
}

}  // namespace gridsiem
