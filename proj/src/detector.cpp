#include "uplink/detector.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>
#include <string>

namespace uplink {
namespace {

// A raster merged over every offset that yields the same pulse samples.
// Samples that are opaque at any of those offsets are dropped from far/near.
struct MergedRaster {
  std::vector<int> pulse;
  std::vector<int> far;
  std::vector<int> near;
};

std::vector<int> intersect(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<int> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

std::vector<MergedRaster> merged_rasters(InterrogationType type) {
  std::vector<MergedRaster> out;
  std::vector<bool> seen;
  for (int step = 0; step < 64; ++step) {
    const auto r = rasterize(template_for(type), step / 64.0);
    const auto v = static_cast<std::size_t>(r.alignment_variant);
    if (out.size() <= v) {
      out.resize(v + 1);
      seen.resize(v + 1, false);
    }
    if (!seen[v]) {
      out[v] = {r.pulse, r.far, r.near};
      seen[v] = true;
    } else {
      out[v].far = intersect(out[v].far, r.far);
      out[v].near = intersect(out[v].near, r.near);
    }
  }
  return out;
}

int extent_of(const CheckSets& s) {
  int hi = -1;
  for (const auto* v : {&s.pulse, &s.far, &s.near}) {
    if (!v->empty()) {
      hi = std::max(hi, v->back());
    }
  }
  return hi + 1;
}

CheckSets finish_sets(CheckSets s) {
  for (auto* v : {&s.pulse, &s.far, &s.near}) {
    std::sort(v->begin(), v->end());
  }
  s.extent = extent_of(s);
  return s;
}

// Index of the last P3 sample: P3 is the second pulse group.
int p3_end_of(const MergedRaster& r) {
  int end = -1;
  int groups = 0;
  for (std::size_t i = 0; i < r.pulse.size(); ++i) {
    if (i == 0 || r.pulse[i] != r.pulse[i - 1] + 1) {
      ++groups;
    }
    if (groups == 2) {
      end = r.pulse[i];
    }
  }
  return end;
}

// Pre-P3 sets of a Mode A / Mode C raster: P1 and P3 pulses, plus every
// non-pulse sample before P3.
CheckSets pre_p3(const MergedRaster& r, int p3_end) {
  CheckSets s;
  const auto before = [](const std::vector<int>& v, int limit) {
    std::vector<int> out;
    std::copy_if(v.begin(), v.end(), std::back_inserter(out), [&](int k) { return k < limit; });
    return out;
  };
  s.pulse = before(r.pulse, p3_end + 1);
  const int p3_start = *std::find_if(s.pulse.begin() + 1, s.pulse.end(),
                                     [&](int k) { return k > 1; });
  s.far = before(r.far, p3_start);
  s.near = before(r.near, p3_start);
  return finish_sets(s);
}

// Post-P3 sets of an all-call raster, re-based so that 0 is the last P3 sample.
CheckSets post_p3(const MergedRaster& r, int p3_end) {
  CheckSets s;
  const auto after = [&](const std::vector<int>& v) {
    std::vector<int> out;
    for (int k : v) {
      if (k > p3_end) {
        out.push_back(k - p3_end);
      }
    }
    return out;
  };
  s.pulse = after(r.pulse);
  s.far = after(r.far);
  s.near = after(r.near);
  return finish_sets(s);
}

CheckSets whole(const MergedRaster& r) {
  return finish_sets({r.pulse, r.far, r.near, 0});
}

struct Tables {
  CheckSets p1;
  CheckSets mode_s;
  CheckSets mode_a;
  int mode_a_p3_end = 0;
  std::vector<CheckSets> mode_c;
  std::vector<int> mode_c_p3_end;
  CheckSets p4_short;
  CheckSets p4_long;
  std::array<std::vector<CheckSets>, kTypeCount> full;
  int max_extent = 0;
};

const Tables& tables() {
  static const Tables t = [] {
    Tables t;
    // P1 and the 1.2-2.0 us gap, which no interrogation type fills.
    t.p1 = finish_sets({{0, 1}, {3, 4}, {}, 0});

    std::array<std::vector<MergedRaster>, kTypeCount> merged;
    for (const auto type : kAllTypes) {
      merged[index_of(type)] = merged_rasters(type);
      for (const auto& r : merged[index_of(type)]) {
        t.full[index_of(type)].push_back(whole(r));
      }
    }

    t.mode_s = whole(merged[index_of(InterrogationType::ModeS)].front());

    const auto& mode_a = merged[index_of(InterrogationType::ModeA)].front();
    t.mode_a_p3_end = p3_end_of(mode_a);
    t.mode_a = pre_p3(mode_a, t.mode_a_p3_end);

    for (const auto& r : merged[index_of(InterrogationType::ModeC)]) {
      t.mode_c_p3_end.push_back(p3_end_of(r));
      t.mode_c.push_back(pre_p3(r, t.mode_c_p3_end.back()));
    }

    const auto& short_p4 = merged[index_of(InterrogationType::ModeAAllCall)].front();
    const auto& long_p4 = merged[index_of(InterrogationType::ModeAAllCallCompat)].front();
    t.p4_short = post_p3(short_p4, p3_end_of(short_p4));
    t.p4_long = post_p3(long_p4, p3_end_of(long_p4));

    t.max_extent = std::max({t.p1.extent, t.mode_s.extent, t.mode_a.extent,
                             t.mode_a_p3_end + 1 + t.p4_long.extent});
    for (std::size_t v = 0; v < t.mode_c.size(); ++v) {
      t.max_extent = std::max({t.max_extent, t.mode_c[v].extent,
                               t.mode_c_p3_end[v] + 1 + t.p4_long.extent,
                               t.mode_c_p3_end[v] + 1 + t.p4_short.extent});
    }
    return t;
  }();
  return t;
}

double mean_over(std::span<const std::uint8_t> window, const std::vector<int>& idx) {
  double sum = 0.0;
  int n = 0;
  for (int k : idx) {
    if (static_cast<std::size_t>(k) < window.size()) {
      sum += window[k];
      ++n;
    }
  }
  return n == 0 ? 0.0 : sum / n;
}

void require(bool ok, const std::string& what) {
  if (!ok) {
    throw std::invalid_argument(what);
  }
}

}  // namespace

void DetectorConfig::validate() const {
  for (const double r : {rel_far_pre, rel_near_pre, rel_far_post, rel_near_post}) {
    require(r > 0.0 && r <= 1.0, "relative ratios must be in (0, 1]");
  }
  require(abs_far_pre >= 0.0 && abs_near_pre >= 0.0, "absolute margins must be >= 0");
  for (const auto& f : {fixed_min_pulse, fixed_max_far, fixed_max_near}) {
    require(!f || (*f >= 0 && *f <= 255), "fixed filters must be in [0, 255]");
  }
}

bool abs_compare(double non_pulse, double pulse, double margin) {
  return non_pulse + margin < pulse;
}

bool rel_compare(double non_pulse, double pulse, double ratio) {
  return pulse > 0.0 && non_pulse / pulse < ratio;
}

Detector::Detector(DetectorConfig config)
    : config_(config),
      pre_{config.rel_far_pre, config.rel_near_pre, config.abs_far_pre, config.abs_near_pre},
      post_{config.rel_far_post, config.rel_near_post, std::nullopt, std::nullopt} {
  config_.validate();
}

int Detector::max_extent() { return tables().max_extent; }

kernels::P1Thresholds Detector::p1_thresholds() const {
  return {config_.abs_far_pre, config_.rel_far_pre, config_.fixed_min_pulse.value_or(0),
          config_.fixed_max_far.value_or(255)};
}

bool Detector::passes(std::span<const std::uint8_t> window, const CheckSets& sets, int shift,
                      const Group& group) const {
  if (sets.pulse.empty() || window.size() < static_cast<std::size_t>(sets.extent + shift)) {
    return false;
  }
  int min_pulse = 255;
  for (int k : sets.pulse) {
    min_pulse = std::min<int>(min_pulse, window[k + shift]);
  }
  if (config_.fixed_min_pulse && min_pulse < *config_.fixed_min_pulse) {
    return false;
  }
  // The weakest pulse against the strongest non-pulse decides every pair.
  const auto group_ok = [&](const std::vector<int>& idx, double ratio,
                            const std::optional<double>& margin,
                            const std::optional<int>& fixed_max) {
    if (idx.empty()) {
      return true;
    }
    int strongest = 0;
    for (int k : idx) {
      strongest = std::max<int>(strongest, window[k + shift]);
    }
    if (fixed_max && strongest > *fixed_max) {
      return false;
    }
    if (margin && !abs_compare(strongest, min_pulse, *margin)) {
      return false;
    }
    return rel_compare(strongest, min_pulse, ratio);
  };
  return group_ok(sets.far, group.rel_far, group.abs_far, config_.fixed_max_far) &&
         group_ok(sets.near, group.rel_near, group.abs_near, config_.fixed_max_near);
}

bool Detector::p1_check(std::span<const std::uint8_t> window) const {
  if (window.size() < static_cast<std::size_t>(tables().p1.extent)) {
    return false;
  }
  return kernels::p1_pass(std::min(window[0], window[1]), std::max(window[3], window[4]),
                          p1_thresholds());
}

bool Detector::mode_s_check(std::span<const std::uint8_t> window) const {
  return passes(window, tables().mode_s, 0, pre_);
}

bool Detector::mode_a_check(std::span<const std::uint8_t> window) const {
  return passes(window, tables().mode_a, 0, pre_);
}

std::optional<int> Detector::mode_c_check(std::span<const std::uint8_t> window) const {
  const auto& variants = tables().mode_c;
  for (std::size_t v = 0; v < variants.size(); ++v) {
    if (passes(window, variants[v], 0, pre_)) {
      return static_cast<int>(v);
    }
  }
  return std::nullopt;
}

bool Detector::p4_check(std::span<const std::uint8_t> window, int p3_end_index,
                        P4Width width) const {
  const auto& sets = width == P4Width::Short ? tables().p4_short : tables().p4_long;
  return passes(window, sets, p3_end_index, post_);
}

DetectionEvent Detector::make_event(std::span<const std::uint8_t> window, std::uint64_t start,
                                    InterrogationType type, int variant) const {
  const auto& sets = tables().full[index_of(type)][static_cast<std::size_t>(variant)];
  return {type,
          start,
          mean_over(window, sets.pulse),
          mean_over(window, sets.far),
          mean_over(window, sets.near),
          variant};
}

std::optional<DetectionEvent> Detector::classify(std::span<const std::uint8_t> window,
                                                 std::uint64_t start_sample) const {
  if (!p1_check(window)) {
    return std::nullopt;
  }
  if (mode_s_check(window)) {
    return make_event(window, start_sample, InterrogationType::ModeS, 0);
  }

  const auto& t = tables();
  bool mode_c = false;
  int variant = 0;
  int p3_end = 0;
  if (mode_a_check(window)) {
    p3_end = t.mode_a_p3_end;
  } else if (const auto v = mode_c_check(window)) {
    mode_c = true;
    variant = *v;
    p3_end = t.mode_c_p3_end[static_cast<std::size_t>(variant)];
  } else {
    return std::nullopt;
  }

  using T = InterrogationType;
  T type = mode_c ? T::ModeC : T::ModeA;
  if (p4_check(window, p3_end, P4Width::Short)) {
    type = mode_c ? T::ModeCAllCall : T::ModeAAllCall;
  } else if (p4_check(window, p3_end, P4Width::Long)) {
    type = mode_c ? T::ModeCAllCallCompat : T::ModeAAllCallCompat;
  }
  return make_event(window, start_sample, type, variant);
}

Scanner::Scanner(DetectorConfig config, const kernels::KernelSet& kernels)
    : detector_(config), kernels_(kernels), p1_(detector_.p1_thresholds()) {}

void Scanner::run(std::uint64_t limit, std::vector<DetectionEvent>& out) {
  const auto extent = static_cast<std::size_t>(Detector::max_extent());
  while (position_ < limit) {
    const std::size_t offset = position_ - base_;
    // Positions whose P1 samples are all buffered go through the vector
    // kernel; the few at the very end of a finished stream cannot pass P1.
    const std::size_t maskable =
        buffer_.size() >= offset + 5 ? buffer_.size() - offset - 4 : 0;
    const std::size_t n = std::min<std::uint64_t>(limit - position_, maskable);
    if (n == 0) {
      position_ = limit;
      break;
    }
    mask_.resize(n);
    kernels_.p1_mask(buffer_.data() + offset, n, p1_, mask_.data());

    const std::uint64_t block_start = position_;
    const std::uint64_t block_end = position_ + n;
    while (position_ < block_end) {
      const auto rel = static_cast<std::size_t>(position_ - block_start);
      const void* hit = std::memchr(mask_.data() + rel, 1, n - rel);
      if (hit == nullptr) {
        position_ = block_end;
        break;
      }
      position_ = block_start + static_cast<std::size_t>(
                                    static_cast<const std::uint8_t*>(hit) - mask_.data());
      const std::size_t at = position_ - base_;
      const auto window = std::span<const std::uint8_t>(buffer_).subspan(
          at, std::min(extent, buffer_.size() - at));
      if (const auto event = detector_.classify(window, position_)) {
        out.push_back(*event);
        position_ += static_cast<std::uint64_t>(skip_count_for(event->type));
      } else {
        ++position_;
      }
    }
  }
}

void Scanner::feed(std::span<const std::uint8_t> samples, std::vector<DetectionEvent>& out) {
  if (finished_) {
    throw std::logic_error("Scanner::feed after finish");
  }
  buffer_.insert(buffer_.end(), samples.begin(), samples.end());
  const auto extent = static_cast<std::uint64_t>(Detector::max_extent());
  const std::uint64_t seen = samples_seen();
  if (seen >= extent) {
    run(seen - extent + 1, out);
  }
  if (position_ > base_) {
    const auto drop = std::min<std::uint64_t>(position_ - base_, buffer_.size());
    buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(drop));
    base_ += drop;
  }
}

void Scanner::finish(std::vector<DetectionEvent>& out) {
  if (finished_) {
    return;
  }
  run(samples_seen(), out);
  finished_ = true;
}

std::vector<DetectionEvent> scan(std::span<const std::uint8_t> samples,
                                 const DetectorConfig& config) {
  std::vector<DetectionEvent> events;
  Scanner scanner(config);
  scanner.feed(samples, events);
  scanner.finish(events);
  return events;
}

std::optional<ThresholdRecommendation> recommend_thresholds(
    std::span<const DetectionEvent> events) {
  if (events.empty()) {
    return std::nullopt;
  }
  double pulse = 0.0;
  double far = 0.0;
  double near = 0.0;
  for (const auto& e : events) {
    pulse += e.mean_pulse_amp;
    far += e.mean_far_amp;
    near += e.mean_near_amp;
  }
  const auto n = static_cast<double>(events.size());
  return ThresholdRecommendation{static_cast<int>(std::lround(pulse / n)),
                                 static_cast<int>(std::lround(far / n)),
                                 static_cast<int>(std::lround(near / n))};
}

}  // namespace uplink
