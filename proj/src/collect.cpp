#include "gridsiem/collect.hpp"

#include "gridsiem/errors.hpp"
#include "gridsiem/normalize.hpp"

namespace gridsiem {

void validate(const CollectorConfig& cfg) {
  if (cfg.batch_max < 1) throw Error("batch_max must be at least 1");
  if (cfg.mode == CollectMode::Pull && cfg.pull_period_us <= 0) {
    throw Error("pull_period_us must be positive in pull mode");
  }
}

ProbeSource::ProbeSource(std::string source_id, SourceKind kind, std::size_t backlog_max)
    : source_id_(std::move(source_id)), kind_(kind), backlog_max_(backlog_max) {
  if (!has_parser(kind)) {
    throw Error("no parser registered for source kind " + std::string(to_string(kind)));
  }
  if (backlog_max_ == 0) throw Error("backlog must hold at least one record");
}

void ProbeSource::emit(RawRecord r) {
  if (backlog_.size() == backlog_max_) {
    backlog_.pop_front();
    ++dropped_;
  }
  backlog_.push_back(std::move(r));
}

std::int64_t ProbeSource::take_new_drops() {
  const std::int64_t n = dropped_ - reported_drops_;
  reported_drops_ = dropped_;
  return n;
}

std::vector<RawRecord> collect(const CollectorConfig& cfg, ProbeSource& source, TimeUs now_us) {
  validate(cfg);
  if (!source.online()) {
    throw SourceUnavailable("source '" + source.source_id() + "' is offline");
  }
  std::size_t take = source.backlog_.size();
  if (cfg.mode == CollectMode::Pull) {
    const std::int64_t boundary = now_us / cfg.pull_period_us;
    if (boundary <= source.last_boundary_) return {};
    source.last_boundary_ = boundary;
  }
  take = std::min(take, cfg.batch_max);
  std::vector<RawRecord> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) {
    out.push_back(std::move(source.backlog_.front()));
    source.backlog_.pop_front();
  }
  return out;
}

}  // namespace gridsiem
