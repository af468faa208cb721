#include "gridsiem/probes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gridsiem/errors.hpp"

namespace gridsiem {

ThresholdProfile train_threshold(std::span<const double> samples, double k, std::string signal_name) {
  if (samples.empty()) throw EmptyTraining("no training samples for '" + signal_name + "'");
  if (k < 0) throw Error("k must be non-negative");
  std::vector<double> xs(samples.begin(), samples.end());
  std::sort(xs.begin(), xs.end());
  long double sum = 0;
  for (double x : xs) sum += x;
  const long double n = static_cast<long double>(xs.size());
  const long double mean = sum / n;
  long double sq = 0;
  for (double x : xs) sq += (x - mean) * (x - mean);
  ThresholdProfile p;
  p.signal_name = std::move(signal_name);
  p.mean = static_cast<double>(mean);
  p.stddev = static_cast<double>(std::sqrt(sq / n));
  p.k = k;
  p.threshold = p.mean + k * p.stddev;
  return p;
}

std::string wsn_rate_signal(const std::string& node) { return "wsn.rate." + node; }
std::string app_arrival_signal(const std::string& server) { return "app.arrival." + server; }
std::string traffic_ratio_signal(const std::string& router) { return "traffic.ratio." + router; }
std::string host_occupancy_signal(const std::string& server) { return "host.occupancy." + server; }

double syn_to_ack_ratio(double syn, double ack) {
  if (ack > 0) return syn / ack;
  return syn > 0 ? std::numeric_limits<double>::infinity() : 1.0;
}

std::vector<RawRecord> WsnProbe::fire(const WsnSim& sim, TimeUs now_us, TimeUs period_us) {
  std::vector<RawRecord> out;
  const double seconds = static_cast<double>(period_us) / static_cast<double>(kUsPerSecond);
  for (const auto& [id, node] : sim.nodes()) {
    if (id == sim.config().base_station) continue;
    const std::int64_t delta = node.originated - last_[id];
    last_[id] = node.originated;
    if (!node.alive) continue;
    const double rate = static_cast<double>(delta) / seconds;
    out.push_back({source_id_, SourceKind::WsnProbe, "RATE " + id + " " + format_real(rate), now_us});
  }
  return out;
}

std::optional<RawRecord> app_probe(std::int64_t arrival_count, TimeUs window_us,
                                   const ThresholdProfile* profile, const std::string& server_id,
                                   TimeUs now_us) {
  if (profile == nullptr) throw NotTrained("app probe for '" + server_id + "' has no profile");
  if (window_us <= 0) throw Error("window must be positive");
  const double rate = static_cast<double>(arrival_count) * static_cast<double>(kUsPerSecond) /
                      static_cast<double>(window_us);
  if (!(rate > profile->threshold)) return std::nullopt;
  return RawRecord{server_id, SourceKind::AppProbe,
                   "ARRIVAL " + format_real(rate) + " " + format_real(profile->threshold), now_us};
}

RawRecord traffic_probe(const LinkSample& s, TimeUs now_us) {
  const double seconds = static_cast<double>(s.window_us) / static_cast<double>(kUsPerSecond);
  auto pps = [&](std::int64_t n) { return format_real(static_cast<double>(n) / seconds); };
  return {s.router_id, SourceKind::TrafficProbe,
          "TRAF " + pps(s.syn) + " " + pps(s.synack) + " " + pps(s.ack), now_us};
}

LinkSample TrafficMeter::sample(const Router& r, TimeUs window_us) {
  auto& last = last_[r.router_id];
  LinkSample s{r.router_id, r.syn - last[0], r.synack - last[1], r.ack - last[2], window_us};
  last = {r.syn, r.synack, r.ack};
  return s;
}

RawRecord host_probe(const ServerState& s, TimeUs now_us) {
  return {s.server_id, SourceKind::HostProbe,
          "HOST " + std::to_string(s.half_open) + " " + std::to_string(s.half_open_capacity), now_us};
}

std::string gps_receiver_of(const std::string& source_id) {
  return source_id.substr(0, source_id.find(':'));
}

std::vector<RawRecord> GpsProbeBank::observe(const GpsSnapshot& snap) {
  std::vector<RawRecord> out;
  const auto& rx = snap.receiver_id;
  const TimeUs ts = snap.epoch_us;
  auto& h = history_[rx];

  std::vector<std::string> ids;
  double sum = 0;
  for (const auto& o : snap.visible) {
    ids.push_back(o.sat_id);
    sum += o.cn0_dbhz;
    out.push_back({rx + ":persat", SourceKind::GpsPerSatProbe,
                   "SAT " + o.sat_id + " CN0 " + format_real(o.cn0_dbhz), ts});
  }
  std::string joined;
  for (const auto& id : ids) joined += (joined.empty() ? "" : ",") + id;
  out.push_back({rx + ":const", SourceKind::GpsConstProbe,
                 "CONST " + std::to_string(ids.size()) + " " + (joined.empty() ? "-" : joined), ts});

  const std::size_t n = snap.visible.size();
  const double mean = n ? sum / static_cast<double>(n) : 0.0;

  // Absolute strength.
  if (n && mean > cfg_.abs_threshold_dbhz) {
    out.push_back({rx + ":abs", SourceKind::GpsAbsProbe,
                   "ABSALARM " + format_real(mean) + " " + format_real(cfg_.abs_threshold_dbhz), ts});
  }
  // Relative jump of the mean between consecutive epochs.
  if (n && h.seen && std::abs(mean - h.mean) > cfg_.rel_threshold_dbhz) {
    out.push_back({rx + ":rel", SourceKind::GpsRelProbe,
                   "RELALARM " + format_real(mean - h.mean) + " " +
                       format_real(cfg_.rel_threshold_dbhz),
                   ts});
  }
  // Per-satellite tests: the strongest satellite against the absolute
  // threshold, the largest per-satellite rise, and the spread across
  // satellites against the "too perfect" floor.
  if (n) {
    const auto strongest = std::max_element(
        snap.visible.begin(), snap.visible.end(),
        [](const auto& a, const auto& b) { return a.cn0_dbhz < b.cn0_dbhz; });
    if (strongest->cn0_dbhz > cfg_.abs_threshold_dbhz) {
      out.push_back({rx + ":persat", SourceKind::GpsPerSatProbe,
                     "SATALARM " + strongest->sat_id + " abs " + format_real(strongest->cn0_dbhz) +
                         " " + format_real(cfg_.abs_threshold_dbhz),
                     ts});
    }
    std::optional<std::pair<double, std::string>> rise;
    for (const auto& o : snap.visible) {
      auto it = h.cn0.find(o.sat_id);
      if (it == h.cn0.end()) continue;
      const double d = o.cn0_dbhz - it->second;
      if (!rise || d > rise->first) rise = std::make_pair(d, o.sat_id);
    }
    if (rise && rise->first > cfg_.rel_threshold_dbhz) {
      out.push_back({rx + ":persat", SourceKind::GpsPerSatProbe,
                     "SATALARM " + rise->second + " rel " + format_real(rise->first) + " " +
                         format_real(cfg_.rel_threshold_dbhz),
                     ts});
    }
    if (n >= 2) {
      double var = 0;
      for (const auto& o : snap.visible) var += (o.cn0_dbhz - mean) * (o.cn0_dbhz - mean);
      var /= static_cast<double>(n);
      if (var < cfg_.flat_variance_floor) {
        out.push_back({rx + ":persat", SourceKind::GpsPerSatProbe,
                       "SATALARM * flat " + format_real(var) + " " +
                           format_real(cfg_.flat_variance_floor),
                       ts});
      }
    }
  }
  // Constellation tracking.
  if (h.seen) {
    std::set<std::string> prev;
    for (const auto& [id, v] : h.cn0) prev.insert(id);
    const std::set<std::string> now(ids.begin(), ids.end());
    int removed = 0, added = 0;
    for (const auto& id : prev) removed += now.count(id) ? 0 : 1;
    for (const auto& id : now) added += prev.count(id) ? 0 : 1;
    const int churn = std::max(removed, added);
    const int n_prev = static_cast<int>(prev.size());
    const int n_now = static_cast<int>(now.size());
    if (churn > cfg_.allowed_churn || std::abs(n_now - n_prev) > cfg_.allowed_churn) {
      out.push_back({rx + ":const", SourceKind::GpsConstProbe,
                     "CONSTALARM " + std::to_string(churn) + " " + std::to_string(n_prev) + " " +
                         std::to_string(n_now),
                     ts});
    }
  }

  h.seen = true;
  h.mean = mean;
  h.cn0.clear();
  for (const auto& o : snap.visible) h.cn0[o.sat_id] = o.cn0_dbhz;
  return out;
}

}  // namespace gridsiem
