#include "gridsiem/gps.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gridsiem/errors.hpp"

namespace gridsiem {

std::string_view to_string(SpoofMode m) {
  switch (m) {
    case SpoofMode::OverrideStrength: return "override_strength";
    case SpoofMode::TooPerfect: return "too_perfect";
    case SpoofMode::ConstellationSwap: return "constellation_swap";
  }
  return "?";
}

std::optional<SpoofMode> parse_spoof_mode(std::string_view s) {
  if (s == "override_strength") return SpoofMode::OverrideStrength;
  if (s == "too_perfect") return SpoofMode::TooPerfect;
  if (s == "constellation_swap") return SpoofMode::ConstellationSwap;
  return std::nullopt;
}

GpsSim::GpsSim(GpsConfig config, std::uint64_t seed)
    : config_(std::move(config)),
      rng_(Rng::derived(seed, "gps")),
      spoof_rng_(Rng::derived(seed, "gps.spoof")) {
  if (config_.n_visible < 0 || config_.n_visible > config_.pool_size) {
    throw Error("n_visible must lie in [0, pool_size]");
  }
  if (config_.epoch_us <= 0) throw Error("epoch must be positive");
  for (int i = 0; i < config_.n_visible; ++i) sky_.push_back(i);
  next_rise_ = config_.n_visible % std::max(config_.pool_size, 1);
  auto ids = config_.receivers;
  std::sort(ids.begin(), ids.end());
  for (const auto& r : ids) {
    auto& b = baseline_[r];
    for (int i = 0; i < config_.pool_size; ++i) {
      b.push_back(rng_.uniform(config_.baseline_lo_dbhz, config_.baseline_hi_dbhz));
    }
    GpsReceiverState st;
    st.receiver_id = r;
    st.locked = config_.n_visible >= 4;
    receivers_[r] = st;
  }
}

std::string GpsSim::sat_name(int i) const {
  const std::string n = std::to_string(i + 1);
  return (n.size() < 2 ? "G0" : "G") + n;
}

const GpsReceiverState& GpsSim::receiver(const std::string& id) const {
  auto it = receivers_.find(id);
  if (it == receivers_.end()) throw UnknownNode("unknown receiver '" + id + "'");
  return it->second;
}

void GpsSim::inject_spoof(const SpoofConfig& cfg) {
  receiver(cfg.target_receiver);
  if (cfg.stop_us <= cfg.start_us) throw Error("spoof stop must follow start");
  spoof_ = cfg;
}

void GpsSim::flag_holdover(const std::string& id) {
  receiver(id);
  auto& st = receivers_[id];
  if (st.holdover) return;
  st.holdover = true;
  st.held_offset_us = 0;  // only a spoof ever moves the offset, so last good is 0
}

void GpsSim::rise_set() {
  if (config_.rise_set_every <= 0 || sky_.empty()) return;
  if (epoch_index_ % config_.rise_set_every != 0) return;
  ++passes_;
  const int swaps =
      (config_.double_pass_every > 0 && passes_ % config_.double_pass_every == 0) ? 2 : 1;
  for (int s = 0; s < swaps; ++s) {
    sky_.pop_front();
    while (std::find(sky_.begin(), sky_.end(), next_rise_) != sky_.end()) {
      next_rise_ = (next_rise_ + 1) % config_.pool_size;
    }
    sky_.push_back(next_rise_);
    next_rise_ = (next_rise_ + 1) % config_.pool_size;
  }
}

std::vector<GpsSnapshot> GpsSim::step() {
  now_us_ += config_.epoch_us;
  ++epoch_index_;
  rise_set();

  const bool spoofing = spoof_ && now_us_ >= spoof_->start_us && now_us_ < spoof_->stop_us;
  const bool accepted = spoofing && now_us_ >= spoof_->start_us + config_.epoch_us;
  if (spoofing && spoof_->mode == SpoofMode::ConstellationSwap && swap_ids_.empty()) {
    for (int i = config_.pool_size - 1; i >= 0 && static_cast<int>(swap_ids_.size()) < config_.n_visible; --i) {
      if (std::find(sky_.begin(), sky_.end(), i) == sky_.end()) swap_ids_.push_back(i);
    }
    std::sort(swap_ids_.begin(), swap_ids_.end());
  }
  if (!spoofing) swap_ids_.clear();

  std::vector<GpsSnapshot> out;
  for (auto& [id, st] : receivers_) {
    GpsSnapshot snap;
    snap.receiver_id = id;
    snap.epoch_us = now_us_;
    const auto& base = baseline_[id];
    // The true sky is always drawn, so a spoof never shifts the benign stream.
    for (int sat : sky_) {
      const double cn0 = base[sat] + rng_.uniform(-config_.jitter_dbhz, config_.jitter_dbhz);
      snap.visible.push_back({sat_name(sat), cn0, now_us_});
    }
    const bool target = spoofing && spoof_->target_receiver == id;
    if (target) {
      switch (spoof_->mode) {
        case SpoofMode::OverrideStrength:
          for (auto& o : snap.visible) o.cn0_dbhz = spoof_->strength_dbhz;
          break;
        case SpoofMode::TooPerfect:
          for (auto& o : snap.visible) o.cn0_dbhz = spoof_->flat_dbhz;
          break;
        case SpoofMode::ConstellationSwap:
          snap.visible.clear();
          for (int sat : swap_ids_) {
            const double cn0 =
                base[sat] + spoof_rng_.uniform(-config_.jitter_dbhz, config_.jitter_dbhz);
            snap.visible.push_back({sat_name(sat), cn0, now_us_});
          }
          break;
      }
    }
    st.visible = snap.visible;
    st.locked = st.visible.size() >= 4;
    st.clock_offset_us = (target && accepted) ? spoof_->injected_offset_us : 0.0;
    out.push_back(std::move(snap));
  }
  return out;
}

double GpsSim::pmu_timestamp(const std::string& id, TimeUs true_time_us) const {
  const auto& st = receiver(id);
  if (!st.locked) throw NotLocked("receiver '" + id + "' sees fewer than 4 satellites");
  const double offset = st.holdover ? st.held_offset_us : st.clock_offset_us;
  return static_cast<double>(true_time_us) + offset;
}

std::string GpsSim::digest() const {
  std::ostringstream os;
  os.precision(17);
  os << "t=" << now_us_ << " epoch=" << epoch_index_ << " sky=";
  for (int s : sky_) os << s << ',';
  os << '\n';
  for (const auto& [id, st] : receivers_) {
    os << id << " locked=" << st.locked << " off=" << st.clock_offset_us << " hold=" << st.holdover;
    for (const auto& o : st.visible) os << ' ' << o.sat_id << ':' << o.cn0_dbhz;
    os << '\n';
  }
  return os.str();
}

std::vector<PdcDiscrepancy> pdc_compare(const std::vector<PmuReport>& reports) {
  auto sorted = reports;
  std::sort(sorted.begin(), sorted.end(),
            [](const PmuReport& a, const PmuReport& b) { return a.receiver_id < b.receiver_id; });
  std::vector<PdcDiscrepancy> out;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    for (std::size_t j = i + 1; j < sorted.size(); ++j) {
      if (sorted[i].true_time_us != sorted[j].true_time_us) continue;
      out.push_back({sorted[i].receiver_id, sorted[j].receiver_id,
                     std::abs(sorted[i].reported_us - sorted[j].reported_us)});
    }
  }
  return out;
}

}  // namespace gridsiem
