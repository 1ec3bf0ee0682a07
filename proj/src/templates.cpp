#include "uplink/templates.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace uplink {
namespace {

using namespace std::chrono_literals;

constexpr Nanos kShortPulse = 800ns;
constexpr Nanos kLongPulse = 1600ns;
constexpr Nanos kModeAP3 = 8000ns;
constexpr Nanos kModeCP3 = 21000ns;
constexpr Nanos kP4AfterP3 = 2000ns;
constexpr Nanos kModeSP2 = 2000ns;
constexpr Nanos kModeSP6 = 3500ns;
constexpr Nanos kModeSShortEnd = 19625ns;  // 56-bit payload
constexpr int kModeSSkip = 49;

struct TypeInfo {
  std::string_view name;
  std::string_view label;
};

constexpr std::array<TypeInfo, kTypeCount> kInfo = {{
    {"mode-a", "Mode A"},
    {"mode-a-all-call", "Mode A all-call"},
    {"mode-a-all-call-compat", "Mode A all-call (compat)"},
    {"mode-c", "Mode C"},
    {"mode-c-all-call", "Mode C all-call"},
    {"mode-c-all-call-compat", "Mode C all-call (compat)"},
    {"mode-s", "Mode S"},
}};

PulseTemplate build(InterrogationType type) {
  PulseTemplate t{type, {{0ns, kShortPulse}}, std::nullopt, 0ns};
  if (type == InterrogationType::ModeS) {
    t.pulses.push_back({kModeSP2, kShortPulse});
    t.opaque_start = kModeSP6;
    t.total_span = kModeSShortEnd;
    return t;
  }
  const bool mode_c = type == InterrogationType::ModeC || type == InterrogationType::ModeCAllCall ||
                      type == InterrogationType::ModeCAllCallCompat;
  const Nanos p3 = mode_c ? kModeCP3 : kModeAP3;
  t.pulses.push_back({p3, kShortPulse});
  if (type == InterrogationType::ModeAAllCall || type == InterrogationType::ModeCAllCall) {
    t.pulses.push_back({p3 + kP4AfterP3, kShortPulse});
  } else if (type == InterrogationType::ModeAAllCallCompat ||
             type == InterrogationType::ModeCAllCallCompat) {
    t.pulses.push_back({p3 + kP4AfterP3, kLongPulse});
  }
  t.total_span = t.pulses.back().end();
  return t;
}

// Time in units of one sample period. Every template edge is a multiple of
// 25 ns, so these are exact in double.
double in_samples(Nanos t) {
  return static_cast<double>(t.count()) / static_cast<double>(kSamplePeriod.count());
}

bool is_pulse(const PulseTemplate& tmpl, long k, double offset) {
  const double u = static_cast<double>(k) + offset;
  return std::any_of(tmpl.pulses.begin(), tmpl.pulses.end(), [u](const Pulse& p) {
    return in_samples(p.start) <= u && u < in_samples(p.end());
  });
}

std::vector<int> pulse_indices(const PulseTemplate& tmpl, double offset, int span) {
  std::vector<int> out;
  for (int k = 0; k < span; ++k) {
    if (is_pulse(tmpl, k, offset)) {
      out.push_back(k);
    }
  }
  return out;
}

// Distinct pulse rasters in order of first appearance over a 1/64 offset grid,
// fine enough to land between any two 25 ns edges.
const std::vector<std::vector<int>>& distinct_rasters(InterrogationType type) {
  static const auto table = [] {
    std::array<std::vector<std::vector<int>>, kTypeCount> all;
    for (const auto type : kAllTypes) {
      const auto& tmpl = template_for(type);
      const int span = skip_count_for(type);
      for (int step = 0; step < 64; ++step) {
        auto raster = pulse_indices(tmpl, step / 64.0, span);
        auto& seen = all[index_of(type)];
        if (std::find(seen.begin(), seen.end(), raster) == seen.end()) {
          seen.push_back(std::move(raster));
        }
      }
    }
    return all;
  }();
  return table[index_of(type)];
}

}  // namespace

std::string_view name(InterrogationType type) { return kInfo[index_of(type)].name; }

std::string_view label(InterrogationType type) { return kInfo[index_of(type)].label; }

std::optional<InterrogationType> parse_type(std::string_view text) {
  for (const auto type : kAllTypes) {
    if (name(type) == text) {
      return type;
    }
  }
  return std::nullopt;
}

const PulseTemplate& template_for(InterrogationType type) {
  static const auto table = [] {
    std::array<PulseTemplate, kTypeCount> all;
    for (const auto t : kAllTypes) {
      all[index_of(t)] = build(t);
    }
    return all;
  }();
  return table[index_of(type)];
}

bool is_pulse_sample(const PulseTemplate& tmpl, long k, double offset) {
  return is_pulse(tmpl, k, offset);
}

bool is_opaque(const PulseTemplate& tmpl, long k, double offset) {
  if (!tmpl.opaque_start) {
    return false;
  }
  const double u = static_cast<double>(k) + offset;
  return in_samples(*tmpl.opaque_start) <= u && u < in_samples(tmpl.total_span);
}

double pulse_coverage(const PulseTemplate& tmpl, long k, double offset) {
  const double lo = static_cast<double>(k) + offset - 0.5;
  const double hi = lo + 1.0;
  double covered = 0.0;
  for (const auto& p : tmpl.pulses) {
    covered += std::max(0.0, std::min(hi, in_samples(p.end())) - std::max(lo, in_samples(p.start)));
  }
  return std::min(covered, 1.0);
}

RasterTemplate rasterize(const PulseTemplate& tmpl, double fractional_offset) {
  if (!(fractional_offset >= 0.0 && fractional_offset < 1.0)) {
    throw std::invalid_argument("fractional offset must be in [0, 1)");
  }
  RasterTemplate r;
  r.type = tmpl.type;
  r.fractional_offset = fractional_offset;
  r.span = skip_count_for(tmpl.type);

  std::vector<char> pulse(r.span + 1, 0);
  std::vector<char> opaque(r.span + 1, 0);
  for (int k = 0; k <= r.span; ++k) {
    pulse[k] = is_pulse(tmpl, k, fractional_offset) && k < r.span;
    opaque[k] = is_opaque(tmpl, k, fractional_offset);
  }
  for (int k = 0; k <= r.span; ++k) {
    if (pulse[k]) {
      r.pulse.push_back(k);
      continue;
    }
    if (opaque[k]) {
      if (k < r.span) {
        r.opaque.push_back(k);
      }
      continue;
    }
    const bool adjacent = (k > 0 && pulse[k - 1]) || (k < r.span && pulse[k + 1]);
    if (adjacent) {
      r.near.push_back(k);
    } else if (k < r.span) {
      r.far.push_back(k);
    }
  }

  const auto& variants = distinct_rasters(tmpl.type);
  r.alignment_variants = static_cast<int>(variants.size());
  const auto it = std::find(variants.begin(), variants.end(), r.pulse);
  r.alignment_variant = it == variants.end() ? 0 : static_cast<int>(it - variants.begin());
  return r;
}

int skip_count_for(InterrogationType type) {
  if (type == InterrogationType::ModeS) {
    return kModeSSkip;
  }
  const auto span = template_for(type).total_span.count();
  const auto period = kSamplePeriod.count();
  return static_cast<int>((span + period - 1) / period);
}

}  // namespace uplink
