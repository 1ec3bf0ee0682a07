#include "uplink/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <json.hpp>
#include <numeric>

#include "uplink/iq.hpp"
#include "uplink/sigen.hpp"

namespace uplink {
namespace {

using nlohmann::json;

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string fixed(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
  return buf;
}

std::string pad_right(std::string_view s, std::size_t width) {
  std::string out(s);
  if (out.size() < width) {
    out.append(width - out.size(), ' ');
  }
  return out;
}

std::string pad_left(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

std::string_view short_code(InterrogationType type) {
  switch (type) {
    case InterrogationType::ModeA: return "A";
    case InterrogationType::ModeAAllCall: return "A-AC";
    case InterrogationType::ModeAAllCallCompat: return "A-ACc";
    case InterrogationType::ModeC: return "C";
    case InterrogationType::ModeCAllCall: return "C-AC";
    case InterrogationType::ModeCAllCallCompat: return "C-ACc";
    case InterrogationType::ModeS: return "S";
  }
  return "?";
}

constexpr std::uint64_t kAttributionTolerance = 2;

struct RowResult {
  ConfusionMatrix::Row detected{};
  std::uint64_t missed = 0;
  std::uint64_t extra = 0;
  ConfusionMatrix::Row false_positive{};
};

RowResult run_row(const ConfusionPlan& plan, InterrogationType type) {
  std::vector<std::uint8_t> stream;
  std::vector<std::uint64_t> starts;
  starts.reserve(plan.count_per_type);
  for (std::size_t m = 0; m < plan.count_per_type; ++m) {
    GenSpec spec;
    spec.type = type;
    spec.amplitude = plan.amplitude;
    spec.snr_db = plan.snr_db;
    // Gaps are lead-out so the trailing edge sample stays with its message.
    spec.lead_in = m == 0 ? plan.gap : 0;
    spec.lead_out = plan.gap;
    spec.seed = mix(plan.seed ^ mix(index_of(type) + 1) ^ mix(m + 0x1000));
    spec.fractional_offset = plan.offsets.empty()
                                 ? static_cast<double>(mix(spec.seed) >> 11) * 0x1.0p-53
                                 : plan.offsets[m % plan.offsets.size()];
    starts.push_back(stream.size() + spec.lead_in);
    if (plan.noise_domain == NoiseDomain::Iq) {
      const auto mags = to_magnitudes(generate_iq(spec, IqFormat::Cu8), IqFormat::Cu8);
      stream.insert(stream.end(), mags.begin(), mags.end());
    } else {
      const auto mags = generate_magnitude(spec);
      stream.insert(stream.end(), mags.begin(), mags.end());
    }
  }

  const auto events = scan(stream, plan.detector);
  const auto span = static_cast<std::uint64_t>(skip_count_for(type));
  RowResult row;
  std::vector<bool> classified(starts.size(), false);
  for (const auto& e : events) {
    // The message whose extent [start - tolerance, start + span) holds the
    // detection; the tolerance absorbs a P1 found one sample early.
    const auto it = std::upper_bound(starts.begin(), starts.end(),
                                     e.start_sample + kAttributionTolerance);
    std::size_t best = starts.size();
    if (it != starts.begin() && e.start_sample < *(it - 1) + span) {
      best = static_cast<std::size_t>(it - 1 - starts.begin());
    }
    if (best == starts.size()) {
      ++row.false_positive[index_of(e.type)];
    } else if (classified[best]) {
      ++row.extra;
    } else {
      classified[best] = true;
      ++row.detected[index_of(e.type)];
    }
  }
  row.missed = static_cast<std::uint64_t>(std::count(classified.begin(), classified.end(), false));
  return row;
}

}  // namespace

std::uint64_t TypeCounters::total() const {
  return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
}

double TypeCounters::stream_seconds() const {
  return static_cast<double>(samples_) / kSampleRateHz;
}

TypeCounters accumulate(TypeCounters counters, const DetectionEvent& event) {
  counters.add(event);
  return counters;
}

std::uint64_t ConfusionMatrix::wrong(InterrogationType sent_type) const {
  const auto& row = counts[index_of(sent_type)];
  return std::accumulate(row.begin(), row.end(), std::uint64_t{0}) - row[index_of(sent_type)];
}

double ConfusionMatrix::error_rate(InterrogationType sent_type) const {
  const auto n = sent[index_of(sent_type)];
  return n == 0 ? 0.0 : static_cast<double>(wrong(sent_type)) / static_cast<double>(n);
}

double ConfusionMatrix::rate(InterrogationType sent_type, InterrogationType detected) const {
  const auto n = sent[index_of(sent_type)];
  return n == 0 ? 0.0 : static_cast<double>(at(sent_type, detected)) / static_cast<double>(n);
}

double ConfusionMatrix::total_error_rate() const {
  std::uint64_t wrong_total = 0;
  std::uint64_t sent_total = 0;
  for (const auto t : kAllTypes) {
    wrong_total += wrong(t);
    sent_total += sent[index_of(t)];
  }
  return sent_total == 0 ? 0.0 : static_cast<double>(wrong_total) / static_cast<double>(sent_total);
}

std::uint64_t ConfusionMatrix::total_missed() const {
  return std::accumulate(missed.begin(), missed.end(), std::uint64_t{0});
}

std::uint64_t ConfusionMatrix::total_extra() const {
  return std::accumulate(extra.begin(), extra.end(), std::uint64_t{0});
}

std::uint64_t ConfusionMatrix::total_false_positive() const {
  return std::accumulate(false_positive.begin(), false_positive.end(), std::uint64_t{0});
}

ConfusionMatrix run_confusion_experiment(const ConfusionPlan& plan) {
  if (plan.count_per_type == 0) {
    throw std::invalid_argument("count per type must be at least 1");
  }
  for (const double f : plan.offsets) {
    if (!(f >= 0.0 && f < 1.0)) {
      throw std::invalid_argument("fractional offsets must be in [0, 1)");
    }
  }
  plan.detector.validate();

  // Rows are independent streams; run them concurrently and merge in order.
  std::vector<std::future<RowResult>> rows;
  for (const auto type : plan.types) {
    rows.push_back(std::async(std::launch::async, run_row, std::cref(plan), type));
  }
  ConfusionMatrix m;
  for (std::size_t i = 0; i < plan.types.size(); ++i) {
    const auto t = index_of(plan.types[i]);
    const auto row = rows[i].get();
    m.sent[t] += plan.count_per_type;
    for (std::size_t d = 0; d < kTypeCount; ++d) {
      m.counts[t][d] += row.detected[d];
      m.false_positive[d] += row.false_positive[d];
    }
    m.missed[t] += row.missed;
    m.extra[t] += row.extra;
  }
  return m;
}

std::string render_confusion(const ConfusionMatrix& m) {
  constexpr std::size_t kLabel = 26;
  constexpr std::size_t kCell = 8;
  std::string out = pad_right("sent \\ detected", kLabel);
  for (const auto t : kReportOrder) {
    out += pad_left(std::string(short_code(t)), kCell);
  }
  out += pad_left("missed", kCell) + pad_left("extra", kCell) + pad_left("sent", kCell) + '\n';

  for (const auto s : kReportOrder) {
    out += pad_right(label(s), kLabel);
    for (const auto d : kReportOrder) {
      out += pad_left(std::to_string(m.at(s, d)), kCell);
    }
    out += pad_left(std::to_string(m.missed[index_of(s)]), kCell);
    out += pad_left(std::to_string(m.extra[index_of(s)]), kCell);
    out += pad_left(std::to_string(m.sent[index_of(s)]), kCell) + '\n';
  }
  out += pad_right("(noise)", kLabel);
  for (const auto d : kReportOrder) {
    out += pad_left(std::to_string(m.false_positive[index_of(d)]), kCell);
  }
  out += '\n';

  out += "\nfalse detection ratio per sent type:\n";
  for (const auto s : kReportOrder) {
    out += "  " + pad_right(label(s), kLabel);
    if (m.wrong(s) == 0) {
      out += "no false detection\n";
      continue;
    }
    bool first = true;
    for (const auto d : kReportOrder) {
      if (d == s || m.at(s, d) == 0) {
        continue;
      }
      out += (first ? "" : ", ") + std::string(label(d)) + ' ' + fixed(100.0 * m.rate(s, d), 2) + '%';
      first = false;
    }
    out += '\n';
  }
  return out;
}

std::string confusion_json(const ConfusionMatrix& m) {
  json rows = json::array();
  for (const auto s : kReportOrder) {
    json detected = json::object();
    for (const auto d : kReportOrder) {
      detected[std::string(name(d))] = m.at(s, d);
    }
    rows.push_back({{"sent", name(s)},
                    {"count", m.sent[index_of(s)]},
                    {"detected", detected},
                    {"missed", m.missed[index_of(s)]},
                    {"extra", m.extra[index_of(s)]}});
  }
  json noise = json::object();
  for (const auto d : kReportOrder) {
    noise[std::string(name(d))] = m.false_positive[index_of(d)];
  }
  return json{{"rows", rows}, {"false_positive", noise}}.dump();
}

std::string event_json(const DetectionEvent& e) {
  return json{{"record", "event"},
              {"stream_sample", e.start_sample},
              {"type", name(e.type)},
              {"mean_pulse_amp", e.mean_pulse_amp},
              {"mean_far_amp", e.mean_far_amp},
              {"mean_near_amp", e.mean_near_amp},
              {"alignment_variant", e.alignment_variant}}
      .dump();
}

Reporter::Reporter(std::ostream& out, ReportFormat format, double interval_seconds)
    : out_(out), format_(format) {
  if (interval_seconds > 0.0) {
    interval_samples_ =
        std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::llround(interval_seconds * kSampleRateHz)));
    next_boundary_ = interval_samples_;
  }
}

void Reporter::advance(std::uint64_t stream_sample, const TypeCounters& counters) {
  if (interval_samples_ == 0) {
    return;
  }
  while (next_boundary_ <= stream_sample) {
    summary(next_boundary_, counters, false);
    next_boundary_ += interval_samples_;
  }
}

void Reporter::on_event(const DetectionEvent& event) {
  if (format_ == ReportFormat::JsonLines) {
    out_ << event_json(event) << '\n';
    ++records_;
  }
}

void Reporter::finish(const TypeCounters& counters) {
  advance(counters.samples(), counters);
  summary(counters.samples(), counters, true);
  out_.flush();
}

void Reporter::summary(std::uint64_t stream_sample, const TypeCounters& counters, bool final) {
  const double seconds = static_cast<double>(stream_sample) / kSampleRateHz;
  ++records_;
  if (format_ == ReportFormat::JsonLines) {
    json counts = json::object();
    for (const auto t : kReportOrder) {
      counts[std::string(name(t))] = counters.count(t);
    }
    out_ << json{{"record", "summary"},
                 {"final", final},
                 {"stream_sample", stream_sample},
                 {"stream_time_s", seconds},
                 {"counts", counts},
                 {"total", counters.total()}}
                .dump()
         << '\n';
    return;
  }
  out_ << (final ? "=== final statistics: " : "--- statistics at ") << fixed(seconds, 3)
       << " s (" << stream_sample << " samples) " << (final ? "===" : "---") << '\n';
  for (const auto t : kReportOrder) {
    out_ << "  " << pad_right(label(t), 26) << pad_left(std::to_string(counters.count(t)), 10)
         << '\n';
  }
  out_ << "  " << pad_right("Total", 26) << pad_left(std::to_string(counters.total()), 10) << '\n';
  const double rate = seconds > 0.0 ? static_cast<double>(counters.total()) / seconds : 0.0;
  out_ << "  " << pad_right("Messages/s", 26) << pad_left(fixed(rate, 1), 10) << '\n';
}

DecodeResult decode_stream(std::istream& in, const DecodeOptions& options,
                           std::ostream* report_out) {
  DecodeResult result;
  Scanner scanner(options.detector);
  IqReader reader(in, options.format, options.chunk_size);
  std::optional<Reporter> reporter;
  if (report_out != nullptr) {
    reporter.emplace(*report_out, options.report, options.interval_seconds);
  }

  std::vector<DetectionEvent> fresh;
  const auto publish = [&] {
    for (const auto& e : fresh) {
      if (reporter) {
        reporter->advance(e.start_sample, result.counters);
      }
      result.counters.add(e);
      if (reporter) {
        reporter->on_event(e);
      }
      result.events.push_back(e);
    }
    fresh.clear();
  };

  while (auto chunk = reader.next()) {
    scanner.feed(chunk->samples, fresh);
    publish();
    result.counters.add_samples(chunk->samples.size());
    if (reporter) {
      reporter->advance(scanner.position(), result.counters);
    }
  }
  scanner.finish(fresh);
  publish();
  result.discarded_bytes = reader.discarded_bytes();
  if (reporter) {
    reporter->finish(result.counters);
  }
  return result;
}

}  // namespace uplink
