#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "gridsiem/collect.hpp"
#include "gridsiem/errors.hpp"
#include "gridsiem/gps.hpp"
#include "gridsiem/ipnet.hpp"
#include "gridsiem/normalize.hpp"
#include "gridsiem/probes.hpp"
#include "gridsiem/wsn.hpp"

using namespace gridsiem;

namespace {

RawRecord raw(SourceKind k, std::string payload, std::string src = "src", TimeUs ts = 0) {
  return {std::move(src), k, std::move(payload), ts};
}

ThresholdProfile profile_at(double threshold) {
  ThresholdProfile p;
  p.mean = threshold;
  p.threshold = threshold;
  return p;
}

}  // namespace

TEST(TrainThreshold, HandExamples) {
  const std::vector<double> flat{5, 5, 5, 5};
  auto p = train_threshold(flat, 3);
  EXPECT_EQ(p.mean, 5);
  EXPECT_EQ(p.stddev, 0);
  EXPECT_EQ(p.threshold, 5);

  const std::vector<double> two{4, 6};
  p = train_threshold(two, 1);
  EXPECT_DOUBLE_EQ(p.mean, 5);
  EXPECT_DOUBLE_EQ(p.stddev, 1);
  EXPECT_DOUBLE_EQ(p.threshold, 6);

  EXPECT_THROW(train_threshold(std::vector<double>{}, 3), EmptyTraining);
}

TEST(TrainThresholdProperty, PermutationInvariantAndAboveMean) {
  std::mt19937_64 g(5);
  std::uniform_real_distribution<double> d(0, 1000);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> xs(1 + g() % 50);
    for (auto& x : xs) x = d(g);
    const double k = static_cast<double>(g() % 5);
    const auto a = train_threshold(xs, k);
    std::shuffle(xs.begin(), xs.end(), g);
    const auto b = train_threshold(xs, k);
    EXPECT_EQ(a.mean, b.mean);
    EXPECT_EQ(a.stddev, b.stddev);
    EXPECT_EQ(a.threshold, b.threshold);
    EXPECT_GE(a.stddev, 0);
    EXPECT_GE(a.threshold, a.mean);
  }
}

TEST(Normalize, WsnRateLine) {
  auto e = normalize(raw(SourceKind::WsnProbe, "RATE n7 2.00", "wsn", 60'000'000));
  EXPECT_EQ(e.event_type, "packet_rate_report");
  EXPECT_EQ(e.ts_us, 60'000'000);
  EXPECT_EQ(e.source_id, "wsn");
  const Attrs expected{{"node_id", std::string("n7")},
                       {"rate_pps", 2.0},
                       {"reporting_period_us", std::int64_t{60'000'000}}};
  EXPECT_EQ(e.attrs, expected);
}

TEST(Normalize, SatelliteLine) {
  auto e = normalize(raw(SourceKind::GpsPerSatProbe, "SAT G12 CN0 45.0", "pmu1:persat"));
  EXPECT_EQ(e.event_type, "sat_observation");
  EXPECT_EQ(e.attrs.at("sat_id"), Scalar{std::string("G12")});
  EXPECT_EQ(e.attrs.at("cn0_dbhz"), Scalar{45.0});
  EXPECT_EQ(e.attrs.at("receiver_id"), Scalar{std::string("pmu1")});
}

TEST(Normalize, MalformedPayloadsAreParseErrors) {
  EXPECT_THROW(normalize(raw(SourceKind::WsnProbe, "")), ParseError);
  EXPECT_THROW(normalize(raw(SourceKind::WsnProbe, "RATE n1")), ParseError);
  EXPECT_THROW(normalize(raw(SourceKind::WsnProbe, "RATE n1 fast")), ParseError);
  EXPECT_THROW(normalize(raw(SourceKind::AppProbe, "RATE n1 2.0")), ParseError);
  EXPECT_THROW(normalize(raw(SourceKind::HostProbe, "HOST 5 0")), ParseError);
  EXPECT_THROW(normalize(raw(SourceKind::HostProbe, "HOST 9 4")), ParseError);
  EXPECT_THROW(normalize(raw(SourceKind::GpsConstProbe, "CONST 3 G01,G02")), ParseError);
  EXPECT_THROW(normalize(raw(SourceKind::Simulator, "RATE n1 2.0")), ParseError);
}

// Corrupted versions of every native line either normalize cleanly or raise
// ParseError; nothing else escapes.
TEST(NormalizeProperty, FuzzedPayloadsNeverCrash) {
  const std::vector<RawRecord> seeds = {
      raw(SourceKind::WsnProbe, "RATE n7 2.0"),
      raw(SourceKind::AppProbe, "ARRIVAL 80.5 52.0"),
      raw(SourceKind::TrafficProbe, "TRAF 100 100 100"),
      raw(SourceKind::HostProbe, "HOST 10 1024"),
      raw(SourceKind::GpsPerSatProbe, "SAT G12 CN0 45.0", "pmu1:persat"),
      raw(SourceKind::GpsConstProbe, "CONST 2 G01,G02", "pmu1:const"),
      raw(SourceKind::GpsAbsProbe, "ABSALARM 55 50", "pmu1:abs"),
      raw(SourceKind::GpsRelProbe, "RELALARM 11 6", "pmu1:rel"),
      raw(SourceKind::GpsPerSatProbe, "SATALARM * flat 0 0.01", "pmu1:persat"),
      raw(SourceKind::GpsConstProbe, "CONSTALARM 8 8 8", "pmu1:const"),
  };
  const std::string alphabet = " ,.-+e0123456789GNRATSHOCxyz*\"\t;=";
  std::mt19937_64 g(99);
  for (const auto& s : seeds) {
    EXPECT_NO_THROW(normalize(s)) << s.native_payload;
    for (int i = 0; i < 500; ++i) {
      auto r = s;
      auto& p = r.native_payload;
      const int edits = 1 + static_cast<int>(g() % 3);
      for (int k = 0; k < edits; ++k) {
        const auto pos = p.empty() ? 0 : g() % (p.size() + 1);
        switch (g() % 3) {
          case 0:
            if (!p.empty() && pos < p.size()) p.erase(pos, 1);
            break;
          case 1: p.insert(pos, 1, alphabet[g() % alphabet.size()]); break;
          default:
            if (pos < p.size()) p[pos] = alphabet[g() % alphabet.size()];
        }
      }
      try {
        normalize(r);
      } catch (const ParseError&) {
      } catch (const std::exception& e) {
        ADD_FAILURE() << "'" << p << "' escaped with " << e.what();
      }
    }
  }
}

TEST(WsnProbe, RateIsOriginationOverPeriodAndSkipsDeadNodes) {
  WsnSim sim(wsn_fixture_config(), 1);
  WsnProbe probe;
  for (int i = 0; i < 600; ++i) sim.step(100'000);
  const auto recs = probe.fire(sim, sim.now(), 60 * kUsPerSecond);
  ASSERT_EQ(recs.size(), 10u);
  for (const auto& r : recs) {
    auto e = normalize(r);
    EXPECT_EQ(e.attrs.at("rate_pps"), Scalar{5.0}) << r.native_payload;
  }

  auto cfg = wsn_fixture_config();
  cfg.battery_units = 0.5;  // n1 relays for n4, n5, n9 and dies first
  WsnSim dying(cfg, 1);
  WsnProbe p2;
  for (int i = 0; i < 600; ++i) dying.step(100'000);
  const auto alive = std::count_if(dying.nodes().begin(), dying.nodes().end(), [&](const auto& kv) {
    return kv.first != "bs" && kv.second.alive;
  });
  EXPECT_LT(alive, 10);
  EXPECT_EQ(static_cast<long>(p2.fire(dying, dying.now(), 60 * kUsPerSecond).size()), alive);
}

TEST(WsnProbe, OneHundredTwentyPacketsInAMinuteIsTwoPps) {
  auto cfg = wsn_fixture_config();
  cfg.nodes = {{"a", "bs", 2.0}};
  cfg.extra_links.clear();
  cfg.loop_nodes.clear();
  WsnSim sim(cfg, 1);
  for (int i = 0; i < 600; ++i) sim.step(100'000);
  EXPECT_EQ(sim.node("a").originated, 120);
  WsnProbe probe;
  const auto recs = probe.fire(sim, sim.now(), 60 * kUsPerSecond);
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_EQ(recs[0].native_payload, "RATE a 2");
}

TEST(AppProbe, StrictlyGreaterThanThreshold) {
  const auto p21 = profile_at(21), p20 = profile_at(20), p19 = profile_at(19.999);
  const TimeUs w = 10 * kUsPerSecond;
  EXPECT_FALSE(app_probe(200, w, &p21, "appsrv", w).has_value());
  EXPECT_FALSE(app_probe(200, w, &p20, "appsrv", w).has_value());
  auto rec = app_probe(200, w, &p19, "appsrv", w);
  ASSERT_TRUE(rec.has_value());
  auto e = normalize(*rec);
  EXPECT_EQ(e.event_type, "arrival_rate_alarm");
  EXPECT_EQ(e.attrs.at("rate_pps"), Scalar{20.0});
  EXPECT_EQ(e.attrs.at("threshold_pps"), Scalar{19.999});
  EXPECT_THROW(app_probe(1, w, nullptr, "appsrv", w), NotTrained);
}

TEST(AppProbeProperty, AlarmIffRateAboveThreshold) {
  std::mt19937_64 g(17);
  for (int i = 0; i < 2000; ++i) {
    const std::int64_t count = static_cast<std::int64_t>(g() % 1000);
    const TimeUs w = (1 + static_cast<TimeUs>(g() % 20)) * kUsPerSecond;
    const double rate = static_cast<double>(count) * 1e6 / static_cast<double>(w);
    // Thresholds just below, at and above the observed rate.
    for (double thr : {std::nextafter(rate, -1.0), rate, std::nextafter(rate, 1e9)}) {
      const auto p = profile_at(thr);
      EXPECT_EQ(app_probe(count, w, &p, "s", w).has_value(), rate > thr);
    }
  }
}

TEST(TrafficProbe, RatioAndAnomaly) {
  Normalizer n;
  n.context().profiles[traffic_ratio_signal("r2")] = profile_at(1.5);
  auto balanced = n.normalize(traffic_probe({"r2", 500, 500, 500, 5 * kUsPerSecond}, 0));
  EXPECT_EQ(balanced.attrs.at("syn_to_ack_ratio"), Scalar{1.0});
  EXPECT_EQ(balanced.attrs.at("anomaly"), Scalar{std::int64_t{0}});
  auto flood = n.normalize(traffic_probe({"r2", 5000, 5000, 50, 5 * kUsPerSecond}, 0));
  EXPECT_EQ(flood.attrs.at("syn_to_ack_ratio"), Scalar{100.0});
  EXPECT_EQ(flood.attrs.at("anomaly"), Scalar{std::int64_t{1}});
  auto idle = n.normalize(traffic_probe({"r2", 0, 0, 0, 5 * kUsPerSecond}, 0));
  EXPECT_EQ(idle.attrs.at("syn_to_ack_ratio"), Scalar{1.0});
  EXPECT_EQ(idle.attrs.at("anomaly"), Scalar{std::int64_t{0}});
  EXPECT_TRUE(std::isinf(syn_to_ack_ratio(10, 0)));
}

TEST(HostProbe, Occupancy) {
  Normalizer n;
  n.context().profiles[host_occupancy_signal("websrv")] = profile_at(0.05);
  ServerState s;
  s.server_id = "websrv";
  s.half_open = 0;
  auto idle = n.normalize(host_probe(s, 0));
  EXPECT_EQ(idle.attrs.at("occupancy"), Scalar{0.0});
  EXPECT_EQ(idle.attrs.at("anomaly"), Scalar{std::int64_t{0}});
  s.half_open = 1024;
  auto full = n.normalize(host_probe(s, 0));
  EXPECT_EQ(full.attrs.at("occupancy"), Scalar{1.0});
  EXPECT_EQ(full.attrs.at("anomaly"), Scalar{std::int64_t{1}});
}

TEST(HostProbe, FloodFillsTableWithinClosedFormTime) {
  auto cfg = ipnet_fixture_config();
  cfg.flows.clear();
  IpNetSim net(cfg);
  net.launch_ddos({"master", {"agent1"}, "websrv", 800, 0, 60 * kUsPerSecond});
  const auto& srv = net.server("websrv");
  const double bound_s = 1024.0 / (800.0 - 1024.0 / 3.0);
  TimeUs t = 0;
  while (host_probe(srv, t).native_payload != "HOST 1024 1024" && t < 60 * kUsPerSecond) {
    net.step(100'000);
    t += 100'000;
  }
  EXPECT_LE(static_cast<double>(t) / 1e6, bound_s);
}

TEST(GpsProbes, BenignSnapshotIsQuiet) {
  GpsSim sim(GpsConfig{}, 3);
  GpsProbeBank bank;
  for (int i = 0; i < 50; ++i) {
    for (const auto& snap : sim.step()) {
      for (const auto& r : bank.observe(snap)) {
        EXPECT_TRUE(r.native_payload.rfind("SAT ", 0) == 0 || r.native_payload.rfind("CONST ", 0) == 0)
            << r.native_payload;
      }
    }
  }
}

TEST(GpsProbes, FlatButInBandTripsOnlyTheVarianceFloor) {
  GpsProbeBank bank;
  GpsSnapshot a{"pmu1", 1'000'000, {}}, b{"pmu1", 2'000'000, {}};
  for (int i = 0; i < 8; ++i) {
    a.visible.push_back({"G0" + std::to_string(i + 1), 43.0 + 0.25 * i, 1'000'000});
    b.visible.push_back({"G0" + std::to_string(i + 1), 44.0, 2'000'000});
  }
  bank.observe(a);
  const auto recs = bank.observe(b);
  std::vector<std::string> alarms;
  for (const auto& r : recs) {
    if (r.native_payload.find("ALARM") != std::string::npos) alarms.push_back(r.native_payload);
  }
  ASSERT_EQ(alarms.size(), 1u);
  EXPECT_EQ(alarms[0].rfind("SATALARM * flat", 0), 0u);
}

TEST(Collect, PushHandsOverEverything) {
  ProbeSource src("wsn", SourceKind::WsnProbe);
  for (int i = 0; i < 3; ++i) src.emit(raw(SourceKind::WsnProbe, "RATE n1 1", "wsn", i));
  EXPECT_EQ(collect({}, src, 0).size(), 3u);
  EXPECT_EQ(src.pending(), 0u);
}

TEST(Collect, PullWaitsForBoundaryAndBatches) {
  CollectorConfig pull{CollectMode::Pull, 60 * kUsPerSecond, 2};
  ProbeSource src("wsn", SourceKind::WsnProbe);
  for (int i = 0; i < 5; ++i) src.emit(raw(SourceKind::WsnProbe, "RATE n1 1", "wsn", i));
  EXPECT_TRUE(collect(pull, src, 30 * kUsPerSecond).empty());
  EXPECT_EQ(collect(pull, src, 60 * kUsPerSecond).size(), 2u);
  EXPECT_TRUE(collect(pull, src, 61 * kUsPerSecond).empty());  // same period
  EXPECT_EQ(collect(pull, src, 120 * kUsPerSecond).size(), 2u);
  EXPECT_EQ(src.pending(), 1u);
}

TEST(Collect, OfflineSourceKeepsItsBacklog) {
  ProbeSource src("wsn", SourceKind::WsnProbe);
  src.emit(raw(SourceKind::WsnProbe, "RATE n1 1"));
  src.set_online(false);
  EXPECT_THROW(collect({}, src, 0), SourceUnavailable);
  EXPECT_EQ(src.pending(), 1u);
  src.set_online(true);
  EXPECT_EQ(collect({}, src, 0).size(), 1u);
}

TEST(Collect, OverflowDropsOldestAndCounts) {
  ProbeSource src("wsn", SourceKind::WsnProbe, 3);
  for (int i = 0; i < 5; ++i) src.emit(raw(SourceKind::WsnProbe, "RATE n1 " + std::to_string(i)));
  EXPECT_EQ(src.dropped(), 2);
  EXPECT_EQ(src.take_new_drops(), 2);
  EXPECT_EQ(src.take_new_drops(), 0);
  const auto got = collect({}, src, 0);
  ASSERT_EQ(got.size(), 3u);
  EXPECT_EQ(got.front().native_payload, "RATE n1 2");
}

TEST(Collect, ConfigInvariants) {
  EXPECT_THROW(validate(CollectorConfig{CollectMode::Pull, 0, 1}), Error);
  EXPECT_THROW(validate(CollectorConfig{CollectMode::Push, 0, 0}), Error);
  EXPECT_THROW(ProbeSource("x", SourceKind::Simulator), Error);
}
