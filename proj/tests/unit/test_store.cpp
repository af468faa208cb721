#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "gridsiem/errors.hpp"
#include "gridsiem/runner.hpp"
#include "gridsiem/scenario.hpp"
#include "gridsiem/store.hpp"
#include "oracles.hpp"

using namespace gridsiem;

namespace {

NormalizedEvent rate_report(TimeUs ts, const std::string& node, double rate) {
  NormalizedEvent e;
  e.ts_us = ts;
  e.source_id = "wsn";
  e.source_kind = SourceKind::WsnProbe;
  e.event_type = "packet_rate_report";
  e.attrs = {{"node_id", node}, {"rate_pps", rate}};
  return e;
}

// Linear scan with the query's predicates spelled out by hand.
std::vector<NormalizedEvent> scan(const std::vector<NormalizedEvent>& log, const EventQuery& q) {
  std::vector<NormalizedEvent> out;
  for (const auto& e : log) {
    if (e.ts_us < q.t_start_us || e.ts_us > q.t_end_us) continue;
    if (q.source_kinds && !q.source_kinds->count(e.source_kind)) continue;
    if (q.event_types && !q.event_types->count(e.event_type)) continue;
    bool ok = true;
    for (const auto& [k, v] : q.attr_equals) {
      auto it = e.attrs.find(k);
      ok = ok && it != e.attrs.end() && it->second == v;
    }
    if (ok) out.push_back(e);
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.ts_us != b.ts_us ? a.ts_us < b.ts_us : a.event_id < b.event_id;
  });
  return out;
}

}  // namespace

TEST(Scalars, RenderAndParseRoundTrip) {
  EXPECT_EQ(render_scalar(Scalar{std::int64_t{42}}), "42");
  EXPECT_EQ(render_scalar(Scalar{2.0}), "2.0");
  EXPECT_EQ(render_scalar(Scalar{0.1}), "0.1");
  EXPECT_EQ(render_scalar(Scalar{std::string("a \"b\"")}), "\"a \\\"b\\\"\"");
  for (const Scalar& v : {Scalar{std::int64_t{-7}}, Scalar{1e-300}, Scalar{3.141592653589793},
                          Scalar{std::string("x;y=z\tq")}, Scalar{std::string()}}) {
    auto back = parse_scalar(render_scalar(v));
    ASSERT_TRUE(back.has_value());
    EXPECT_EQ(*back, v);
  }
  EXPECT_FALSE(parse_scalar("12abc").has_value());
  EXPECT_FALSE(parse_scalar("\"open").has_value());
}

TEST(Scalars, RandomRealsRoundTripExactly) {
  std::mt19937_64 g(11);
  std::uniform_real_distribution<double> d(-1e6, 1e6);
  for (int i = 0; i < 2000; ++i) {
    const double x = d(g);
    auto back = parse_scalar(render_scalar(Scalar{x}));
    ASSERT_TRUE(back && std::holds_alternative<double>(*back));
    EXPECT_EQ(std::get<double>(*back), x);
  }
}

TEST(LogLine, FixedFieldOrder) {
  auto e = rate_report(60'000'000, "n7", 2.0);
  e.event_id = 3;
  EXPECT_EQ(to_log_line(e), "3\t60000000\twsn\tWsnProbe\tpacket_rate_report\tInfo\tnode_id=\"n7\";rate_pps=2.0");
  EXPECT_EQ(parse_log_line(to_log_line(e), 1), e);
}

TEST(LogLine, MalformedLineNamesItsNumber) {
  try {
    parse_log_line("1\tnot-a-number\twsn", 17);
    FAIL();
  } catch (const LogCorrupt& err) {
    EXPECT_EQ(err.line(), 17u);
  }
}

TEST(Schema, RejectsUnknownTypesMissingKeysAndWrongKinds) {
  auto reg = SchemaRegistry::builtin();
  auto e = rate_report(0, "n1", 1.0);
  EXPECT_NO_THROW(reg.validate(e));
  auto unknown = e;
  unknown.event_type = "mystery";
  EXPECT_THROW(reg.validate(unknown), SchemaViolation);
  auto missing = e;
  missing.attrs.erase("rate_pps");
  EXPECT_THROW(reg.validate(missing), SchemaViolation);
  auto wrong = e;
  wrong.attrs["rate_pps"] = std::string("fast");
  EXPECT_THROW(reg.validate(wrong), SchemaViolation);
  auto extra = e;
  extra.attrs["colour"] = std::string("red");
  EXPECT_THROW(reg.validate(extra), SchemaViolation);
}

TEST(Schema, ExtensionAddsOptionalKeysOnly) {
  auto reg = SchemaRegistry::builtin();
  reg.register_type("packet_rate_report", {{"colour", {ScalarKind::String, false}}});
  auto e = rate_report(0, "n1", 1.0);
  e.attrs["colour"] = std::string("red");
  EXPECT_NO_THROW(reg.validate(e));
  EXPECT_THROW(reg.register_type("packet_rate_report", {{"rate_pps", {ScalarKind::String, true}}}),
               SchemaViolation);
  reg.register_type("custom_report", {{"x", {ScalarKind::Integer, true}}});
  EXPECT_TRUE(reg.knows("custom_report"));
}

TEST(Store, EmptyQueryIsEmpty) {
  EventStore s;
  EXPECT_TRUE(s.query({0, 0}).empty());
}

TEST(Store, AssignsIdsAndRejectsSchemaViolations) {
  EventStore s;
  EXPECT_EQ(s.append(rate_report(5, "n1", 1.0)), 0u);
  EXPECT_EQ(s.append(rate_report(6, "n2", 1.0)), 1u);
  auto bad = rate_report(7, "n3", 1.0);
  bad.attrs.erase("node_id");
  EXPECT_THROW(s.append(bad), SchemaViolation);
  EXPECT_EQ(s.size(), 2u);
  EXPECT_EQ(s.log()[1].event_id, 1u);
}

TEST(Store, ReorderToleranceIsTwoSeconds) {
  EventStore s;
  s.append(rate_report(10 * kUsPerSecond, "n1", 1.0));
  EXPECT_NO_THROW(s.append(rate_report(8 * kUsPerSecond, "n2", 1.0)));
  EXPECT_THROW(s.append(rate_report(8 * kUsPerSecond - 1, "n3", 1.0)), OutOfOrder);
  s.advance_watermark(20 * kUsPerSecond);
  EXPECT_THROW(s.append(rate_report(17 * kUsPerSecond, "n4", 1.0)), OutOfOrder);
  auto q = s.query({0, 100 * kUsPerSecond});
  ASSERT_EQ(q.size(), 2u);
  EXPECT_EQ(q[0].attrs.at("node_id"), Scalar{std::string("n2")});
}

TEST(Store, AttrFilterIsASubsetInTheSameOrder) {
  EventStore s;
  std::mt19937_64 g(3);
  for (int i = 0; i < 200; ++i) {
    s.append(rate_report(i * 100'000, "n" + std::to_string(g() % 5), static_cast<double>(g() % 7)));
  }
  EventQuery all{0, 1'000'000'000};
  EventQuery n3 = all;
  n3.attr_equals = {{"node_id", std::string("n3")}};
  const auto a = s.query(all);
  const auto b = s.query(n3);
  std::vector<NormalizedEvent> expected;
  std::copy_if(a.begin(), a.end(), std::back_inserter(expected),
               [](const auto& e) { return e.attrs.at("node_id") == Scalar{std::string("n3")}; });
  EXPECT_EQ(b, expected);
}

// Random appends (some late, some too late) and random queries: every query
// equals a linear scan, is ordered by (ts, id), and returns each matching
// event exactly once.
TEST(StoreProperty, QueryEqualsLinearScan) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    std::mt19937_64 g(seed);
    EventStore s;
    TimeUs clock = 0;
    for (int i = 0; i < 300; ++i) {
      clock += static_cast<TimeUs>(g() % 400'000);
      const TimeUs ts = std::max<TimeUs>(0, clock - static_cast<TimeUs>(g() % 2'600'000));
      NormalizedEvent e;
      if (g() % 3 == 0) {
        e.ts_us = ts;
        e.source_id = "srv";
        e.source_kind = SourceKind::AppProbe;
        e.event_type = "arrival_rate_alarm";
        e.severity = Severity::Alarm;
        e.attrs = {{"server_id", std::string("srv")}, {"rate_pps", 9.0}, {"threshold_pps", 5.0}};
      } else {
        e = rate_report(ts, "n" + std::to_string(g() % 4), static_cast<double>(g() % 3));
      }
      try {
        s.append(e);
      } catch (const OutOfOrder&) {
      }
    }
    for (int k = 0; k < 50; ++k) {
      EventQuery q;
      q.t_start_us = static_cast<TimeUs>(g() % static_cast<std::uint64_t>(clock + 1));
      q.t_end_us = q.t_start_us + static_cast<TimeUs>(g() % 20'000'000);
      if (g() % 2) q.event_types = std::set<std::string>{"packet_rate_report"};
      if (g() % 3 == 0) q.source_kinds = std::set<SourceKind>{SourceKind::AppProbe};
      if (g() % 2) q.attr_equals = {{"node_id", std::string("n" + std::to_string(g() % 4))}};
      const auto got = s.query(q);
      EXPECT_EQ(got, scan(s.log(), q));
      for (std::size_t i = 1; i < got.size(); ++i) {
        EXPECT_TRUE(got[i - 1].ts_us < got[i].ts_us ||
                    (got[i - 1].ts_us == got[i].ts_us && got[i - 1].event_id < got[i].event_id));
      }
    }
    for (const auto& e : s.log()) {
      EventQuery q{e.ts_us, e.ts_us};
      q.event_types = std::set<std::string>{e.event_type};
      const auto got = s.query(q);
      EXPECT_EQ(std::count(got.begin(), got.end(), e), 1);
    }
  }
}

TEST(Store, PersistedLogReadsBackIdentically) {
  const auto path = std::filesystem::temp_directory_path() / "gridsiem_store_test.log";
  std::filesystem::remove(path);
  {
    EventStore s;
    s.persist_to(path);
    s.append(rate_report(1, "n1", 0.25));
    s.append(rate_report(2, "n2", 1e-7));
    const auto back = read_log_file(path, &s.registry());
    EXPECT_EQ(back, s.log());
  }
  std::filesystem::remove(path);
}

TEST(Store, TruncatedLastLineIsCorrupt) {
  EventStore s;
  s.append(rate_report(1, "n1", 1.0));
  s.append(rate_report(2, "n2", 1.0));
  std::ostringstream os;
  s.write_log(os);
  auto text = os.str();
  text.pop_back();  // drop the final newline
  std::istringstream in(text);
  try {
    read_log(in);
    FAIL();
  } catch (const LogCorrupt& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  std::istringstream cut(os.str().substr(0, os.str().size() - 5));
  EXPECT_THROW(read_log(cut), LogCorrupt);
}

// The alarm records in the store are exactly the ones the app probe emitted:
// rebuild the emission trace from the raw log and compare.
TEST(Store, ArrivalAlarmQueryMatchesEmissionTrace) {
  auto cfg = load_scenario(oracle::scenario("sleep_deprivation.broadcast"));
  const auto res = run(cfg, {});
  EventStore s;
  for (auto e : res.log) s.append(std::move(e));
  EventQuery q{0, cfg.duration_us};
  q.event_types = std::set<std::string>{"arrival_rate_alarm"};
  const auto got = s.query(q);
  std::vector<NormalizedEvent> trace;
  for (const auto& e : res.log) {
    if (e.source_kind == SourceKind::AppProbe) trace.push_back(e);
  }
  EXPECT_FALSE(got.empty());
  EXPECT_EQ(got, trace);
}
