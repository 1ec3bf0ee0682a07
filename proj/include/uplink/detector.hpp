#pragma once

// The interrogation scan loop: P1 test, then Mode S, Mode A, Mode C, and for
// A/C the short-then-long P4 test. Checks compare every expected pulse
// sample with every expected non-pulse sample, absolutely (non_pulse + margin
// < pulse) and relatively (non_pulse / pulse < ratio).

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "uplink/kernels.hpp"
#include "uplink/templates.hpp"

namespace uplink {

/// Comparison parameters. Non-pulse samples fall in four groups: far from or
/// next to a pulse, before or after P3. Each group has its own ratio; the
/// post-P3 groups have no absolute margin.
struct DetectorConfig {
  double rel_far_pre = 0.5;
  double rel_near_pre = 0.75;
  double rel_far_post = 0.5;   // diffratiop4
  double rel_near_post = 0.75; // diffratioclosep4
  double abs_far_pre = 10.0;
  double abs_near_pre = 10.0;

  // Optional fixed filters, all conjunctive with the comparisons above.
  std::optional<int> fixed_min_pulse;
  std::optional<int> fixed_max_far;
  std::optional<int> fixed_max_near;

  /// Throws std::invalid_argument when a parameter is out of range.
  void validate() const;
};

struct DetectionEvent {
  InterrogationType type;
  std::uint64_t start_sample = 0;
  double mean_pulse_amp = 0.0;
  double mean_far_amp = 0.0;
  double mean_near_amp = 0.0;
  int alignment_variant = 0;

  bool operator==(const DetectionEvent&) const = default;
};

bool abs_compare(double non_pulse, double pulse, double margin);
bool rel_compare(double non_pulse, double pulse, double ratio);

enum class P4Width : std::uint8_t { Short, Long };

/// Index sets a single check reads, relative to the window start.
struct CheckSets {
  std::vector<int> pulse;
  std::vector<int> far;
  std::vector<int> near;
  int extent = 0;  // window length the check needs
};

/// Stateless checks over one window. The window starts at the candidate P1
/// and may be shorter than a check needs (end of stream), in which case that
/// check fails.
class Detector {
 public:
  explicit Detector(DetectorConfig config = {});

  const DetectorConfig& config() const { return config_; }

  bool p1_check(std::span<const std::uint8_t> window) const;
  bool mode_s_check(std::span<const std::uint8_t> window) const;
  bool mode_a_check(std::span<const std::uint8_t> window) const;
  /// Alignment variant that matched, trying the earlier-offset raster first.
  std::optional<int> mode_c_check(std::span<const std::uint8_t> window) const;
  /// p3_end_index is the window index of the last P3 pulse sample.
  bool p4_check(std::span<const std::uint8_t> window, int p3_end_index, P4Width width) const;

  /// Full decision chain at the window start; nullopt means "advance by one".
  std::optional<DetectionEvent> classify(std::span<const std::uint8_t> window,
                                         std::uint64_t start_sample) const;

  /// Longest window any check reads.
  static int max_extent();

  kernels::P1Thresholds p1_thresholds() const;

 private:
  struct Group {
    double rel_far;
    double rel_near;
    std::optional<double> abs_far;
    std::optional<double> abs_near;
  };

  bool passes(std::span<const std::uint8_t> window, const CheckSets& sets, int shift,
              const Group& group) const;
  DetectionEvent make_event(std::span<const std::uint8_t> window, std::uint64_t start,
                            InterrogationType type, int variant) const;

  DetectorConfig config_;
  Group pre_;
  Group post_;
};

/// Streaming scan over one source. Candidate messages that straddle a feed()
/// boundary are held back until enough samples arrive, so the event sequence
/// does not depend on how the stream is chunked.
class Scanner {
 public:
  explicit Scanner(DetectorConfig config = {},
                   const kernels::KernelSet& kernels = kernels::active());

  /// Appends events whose start lies in the now-decidable part of the stream.
  void feed(std::span<const std::uint8_t> samples, std::vector<DetectionEvent>& out);
  /// Decides the remaining positions against the truncated tail.
  void finish(std::vector<DetectionEvent>& out);

  /// Every position below this has been decided.
  std::uint64_t position() const { return position_; }
  std::uint64_t samples_seen() const { return base_ + buffer_.size(); }
  const Detector& detector() const { return detector_; }

 private:
  void run(std::uint64_t limit, std::vector<DetectionEvent>& out);

  Detector detector_;
  const kernels::KernelSet& kernels_;
  kernels::P1Thresholds p1_;
  std::vector<std::uint8_t> buffer_;
  std::vector<std::uint8_t> mask_;
  std::uint64_t base_ = 0;      // stream index of buffer_[0]
  std::uint64_t position_ = 0;  // next position to test
  bool finished_ = false;
};

/// One-shot scan of a complete magnitude sequence.
std::vector<DetectionEvent> scan(std::span<const std::uint8_t> samples,
                                 const DetectorConfig& config = {});

struct ThresholdRecommendation {
  int min_pulse;
  int max_far;
  int max_near;
};

/// Averages of the accepted messages' amplitudes, rounded. nullopt when
/// there are no events to average.
std::optional<ThresholdRecommendation> recommend_thresholds(
    std::span<const DetectionEvent> events);

}  // namespace uplink
