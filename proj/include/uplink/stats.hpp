#pragma once

// Detection statistics, the sent-vs-detected confusion experiment, and
// periodic text / JSON-lines reporting.

#include <array>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "uplink/detector.hpp"
#include "uplink/iq.hpp"
#include "uplink/templates.hpp"

namespace uplink {

class TypeCounters {
 public:
  void add(const DetectionEvent& event) { ++counts_[index_of(event.type)]; }
  void add_samples(std::uint64_t n) { samples_ += n; }

  std::uint64_t count(InterrogationType type) const { return counts_[index_of(type)]; }
  std::uint64_t total() const;
  std::uint64_t samples() const { return samples_; }
  double stream_seconds() const;

  bool operator==(const TypeCounters&) const = default;

 private:
  std::array<std::uint64_t, kTypeCount> counts_{};
  std::uint64_t samples_ = 0;
};

/// Value-semantics form of TypeCounters::add.
TypeCounters accumulate(TypeCounters counters, const DetectionEvent& event);

/// Type order of the rendered tables: per mode, standard first, then the
/// compatibility all-call, then the short-P4 all-call; Mode S last.
inline constexpr std::array<InterrogationType, kTypeCount> kReportOrder = {
    InterrogationType::ModeA,        InterrogationType::ModeAAllCallCompat,
    InterrogationType::ModeAAllCall, InterrogationType::ModeC,
    InterrogationType::ModeCAllCallCompat, InterrogationType::ModeCAllCall,
    InterrogationType::ModeS,
};

struct ConfusionMatrix {
  using Row = std::array<std::uint64_t, kTypeCount>;

  std::array<Row, kTypeCount> counts{};  // [sent][detected], first detection per message
  Row sent{};
  Row missed{};
  Row extra{};           // further detections attributed to an already-classified message
  Row false_positive{};  // detections outside every message window, by detected type

  std::uint64_t at(InterrogationType sent_type, InterrogationType detected) const {
    return counts[index_of(sent_type)][index_of(detected)];
  }
  /// Off-diagonal detections in one row.
  std::uint64_t wrong(InterrogationType sent_type) const;
  /// wrong / sent for the row.
  double error_rate(InterrogationType sent_type) const;
  double rate(InterrogationType sent_type, InterrogationType detected) const;
  /// All off-diagonal detections over all messages sent.
  double total_error_rate() const;
  std::uint64_t total_missed() const;
  std::uint64_t total_extra() const;
  std::uint64_t total_false_positive() const;

  bool operator==(const ConfusionMatrix&) const = default;
};

enum class NoiseDomain : std::uint8_t { Magnitude, Iq };

struct ConfusionPlan {
  std::size_t count_per_type = 100;
  int amplitude = 200;
  std::optional<double> snr_db;
  std::uint64_t seed = 1;
  /// Cycled across the messages of each type. Empty: each message gets a
  /// uniform offset drawn from its seed, as an unsynchronised transmitter would.
  std::vector<double> offsets;
  std::size_t gap = 100;
  NoiseDomain noise_domain = NoiseDomain::Iq;
  DetectorConfig detector;
  /// Types to send; all seven by default.
  std::vector<InterrogationType> types{kAllTypes.begin(), kAllTypes.end()};
};

/// For each sent type, generate count_per_type messages separated by gap
/// samples, scan them, and attribute each detection to the message whose
/// extent (from two samples before its start to start + span) contains it.
ConfusionMatrix run_confusion_experiment(const ConfusionPlan& plan);

std::string render_confusion(const ConfusionMatrix& matrix);
std::string confusion_json(const ConfusionMatrix& matrix);

enum class ReportFormat : std::uint8_t { Text, JsonLines };

/// Emits interval summaries at fixed stream-time boundaries, and in JSON
/// mode one record per event. Boundaries are in samples, so the output does
/// not depend on how the stream was chunked.
class Reporter {
 public:
  Reporter(std::ostream& out, ReportFormat format, double interval_seconds);

  /// Emit every summary whose boundary is at or below stream_sample.
  /// counters must hold exactly the events that start before stream_sample.
  void advance(std::uint64_t stream_sample, const TypeCounters& counters);
  void on_event(const DetectionEvent& event);
  void finish(const TypeCounters& counters);

  std::size_t records() const { return records_; }

 private:
  void summary(std::uint64_t stream_sample, const TypeCounters& counters, bool final);

  std::ostream& out_;
  ReportFormat format_;
  std::uint64_t interval_samples_ = 0;  // 0 = final summary only
  std::uint64_t next_boundary_ = 0;
  std::size_t records_ = 0;
};

std::string event_json(const DetectionEvent& event);

struct DecodeOptions {
  IqFormat format = IqFormat::Cu8;
  std::size_t chunk_size = 1 << 16;
  DetectorConfig detector;
  ReportFormat report = ReportFormat::Text;
  double interval_seconds = 0.0;
};

struct DecodeResult {
  std::vector<DetectionEvent> events;
  TypeCounters counters;
  std::uint64_t discarded_bytes = 0;
};

/// Read IQ from the stream, scan it, and report to report_out (if given).
/// Throws IoError on read failure.
DecodeResult decode_stream(std::istream& in, const DecodeOptions& options,
                           std::ostream* report_out);

}  // namespace uplink
