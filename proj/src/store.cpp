#include "gridsiem/store.hpp"

#include <algorithm>
#include <istream>
#include <string>

#include "gridsiem/errors.hpp"

namespace gridsiem {

EventStore::EventStore(SchemaRegistry registry, TimeUs reorder_tolerance_us)
    : registry_(std::move(registry)), tolerance_(reorder_tolerance_us) {}

void EventStore::persist_to(const std::filesystem::path& path) {
  sink_ = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc);
  if (!*sink_) throw Error("cannot open event log '" + path.string() + "' for writing");
  for (const auto& e : log_) *sink_ << to_log_line(e) << '\n';
  sink_->flush();
}

std::size_t EventStore::append(NormalizedEvent event) {
  registry_.validate(event);
  if (event.ts_us < 0) throw OutOfOrder("negative timestamp");
  if (event.ts_us < watermark_ - tolerance_) {
    throw OutOfOrder("ts " + std::to_string(event.ts_us) + " older than watermark " +
                     std::to_string(watermark_) + " minus tolerance");
  }
  const std::size_t offset = log_.size();
  event.event_id = offset;
  watermark_ = std::max(watermark_, event.ts_us);

  // Equal timestamps keep append order, so (ts, id) stays sorted.
  auto pos = std::upper_bound(order_.begin(), order_.end(), event.ts_us,
                              [this](TimeUs ts, std::size_t idx) { return ts < log_[idx].ts_us; });
  order_.insert(pos, offset);
  if (sink_) *sink_ << to_log_line(event) << '\n' << std::flush;
  log_.push_back(std::move(event));
  return offset;
}

void EventStore::advance_watermark(TimeUs now_us) { watermark_ = std::max(watermark_, now_us); }

std::vector<NormalizedEvent> EventStore::query(const EventQuery& q) const {
  std::vector<NormalizedEvent> out;
  if (q.t_start_us > q.t_end_us) return out;
  auto it = std::lower_bound(order_.begin(), order_.end(), q.t_start_us,
                             [this](std::size_t idx, TimeUs ts) { return log_[idx].ts_us < ts; });
  for (; it != order_.end(); ++it) {
    const auto& e = log_[*it];
    if (e.ts_us > q.t_end_us) break;
    if (q.matches(e)) out.push_back(e);
  }
  return out;
}

void EventStore::write_log(std::ostream& os) const {
  for (const auto& e : log_) os << to_log_line(e) << '\n';
}

std::vector<NormalizedEvent> read_log(std::istream& is, const SchemaRegistry* registry) {
  std::vector<NormalizedEvent> out;
  std::string line;
  std::size_t line_no = 0;
  while (true) {
    line.clear();
    int c;
    bool terminated = false;
    while ((c = is.get()) != std::char_traits<char>::eof()) {
      if (c == '\n') {
        terminated = true;
        break;
      }
      line.push_back(static_cast<char>(c));
    }
    if (!terminated && line.empty()) break;
    ++line_no;
    if (!terminated) throw LogCorrupt(line_no, "truncated line (missing newline)");
    auto e = parse_log_line(line, line_no);
    if (registry) {
      try {
        registry->validate(e);
      } catch (const SchemaViolation& v) {
        throw LogCorrupt(line_no, v.what());
      }
    }
    if (!out.empty() && e.event_id <= out.back().event_id) {
      throw LogCorrupt(line_no, "event_id not increasing");
    }
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<NormalizedEvent> read_log_file(const std::filesystem::path& path,
                                           const SchemaRegistry* registry) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open event log '" + path.string() + "'");
  return read_log(in, registry);
}

}  // namespace gridsiem
