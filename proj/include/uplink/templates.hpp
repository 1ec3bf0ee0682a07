#pragma once

// Pulse timing of the seven 1030 MHz interrogation types and its projection
// onto the 0.4 us sample grid. Detector and generator both read from here.

#include <array>
#include <chrono>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace uplink {

enum class InterrogationType : std::uint8_t {
  ModeA,
  ModeAAllCall,        // short (0.8 us) P4
  ModeAAllCallCompat,  // long (1.6 us) P4
  ModeC,
  ModeCAllCall,
  ModeCAllCallCompat,
  ModeS,
};

inline constexpr std::size_t kTypeCount = 7;

inline constexpr std::array<InterrogationType, kTypeCount> kAllTypes = {
    InterrogationType::ModeA,        InterrogationType::ModeAAllCall,
    InterrogationType::ModeAAllCallCompat, InterrogationType::ModeC,
    InterrogationType::ModeCAllCall, InterrogationType::ModeCAllCallCompat,
    InterrogationType::ModeS,
};

constexpr std::size_t index_of(InterrogationType type) {
  return static_cast<std::size_t>(type);
}

/// Machine name used on the command line and in files, e.g. "mode-a-all-call".
std::string_view name(InterrogationType type);
/// Human label, e.g. "Mode A all-call (compat)".
std::string_view label(InterrogationType type);
std::optional<InterrogationType> parse_type(std::string_view text);

using Nanos = std::chrono::nanoseconds;

inline constexpr Nanos kSamplePeriod{400};

struct Pulse {
  Nanos start;
  Nanos width;

  Nanos end() const { return start + width; }
};

struct PulseTemplate {
  InterrogationType type;
  std::vector<Pulse> pulses;  // sorted, non-overlapping
  /// Mode S only: start of the P6 data block. Everything from here to
  /// total_span is modulated payload the detector never inspects.
  std::optional<Nanos> opaque_start;
  Nanos total_span;
};

/// Canonical timing. P1 at 0 for every type; P3 at 8 us (A) or 21 us (C);
/// P4 2 us after P3; Mode S P2 at 2 us and P6 from 3.5 us to 19.625 us.
const PulseTemplate& template_for(InterrogationType type);

/// A template projected onto the sample grid at one sub-sample alignment.
///
/// Sample k is taken at instant (k + fractional_offset) * 0.4 us and is a pulse
/// sample iff that instant lies in [start, end) of a pulse. Non-pulse samples
/// next to a pulse sample are "near" (this includes the sample at index span
/// that trails the final pulse); the rest are "far". Opaque samples (Mode S
/// payload) belong to none of the three sets.
struct RasterTemplate {
  InterrogationType type;
  double fractional_offset = 0.0;
  std::vector<int> pulse;
  std::vector<int> near;
  std::vector<int> far;
  std::vector<int> opaque;
  int span = 0;  // samples [0, span) make up the message
  /// Number of distinct pulse rasters this type has over all offsets, and
  /// which of them this one is. Only the Mode C family has two.
  int alignment_variants = 1;
  int alignment_variant = 0;
};

RasterTemplate rasterize(const PulseTemplate& tmpl, double fractional_offset);

/// Fraction of the sample period centred on sample k that overlaps a pulse.
/// This is the generator's edge model.
double pulse_coverage(const PulseTemplate& tmpl, long k, double fractional_offset);

/// Whether sample k's instant lies inside a pulse (the raster's pulse rule,
/// valid for any k including negative lead-in indices).
bool is_pulse_sample(const PulseTemplate& tmpl, long k, double fractional_offset);

/// Whether sample k falls inside the template's opaque (payload) region.
bool is_opaque(const PulseTemplate& tmpl, long k, double fractional_offset);

/// Samples to advance after a detection: 49 for Mode S, otherwise the
/// template span rounded up to whole samples.
int skip_count_for(InterrogationType type);

}  // namespace uplink
