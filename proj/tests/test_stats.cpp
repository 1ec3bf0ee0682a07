#include <doctest.h>

#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>

#include "support.hpp"
#include "uplink/iq.hpp"
#include "uplink/sigen.hpp"
#include "uplink/stats.hpp"

using namespace uplink;
using T = InterrogationType;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

DetectionEvent event(T type, std::uint64_t start) {
  return {type, start, 200.0, 0.0, 50.0, 0};
}

ConfusionMatrix sample_matrix() {
  ConfusionMatrix m;
  for (const auto t : kAllTypes) {
    m.sent[index_of(t)] = 1000;
    m.counts[index_of(t)][index_of(t)] = 990;
    m.missed[index_of(t)] = 10;
  }
  m.counts[index_of(T::ModeA)][index_of(T::ModeA)] = 1000;
  m.missed[index_of(T::ModeA)] = 0;
  m.counts[index_of(T::ModeCAllCall)][index_of(T::ModeCAllCall)] = 910;
  m.counts[index_of(T::ModeCAllCall)][index_of(T::ModeS)] = 71;
  m.counts[index_of(T::ModeCAllCall)][index_of(T::ModeC)] = 9;
  m.counts[index_of(T::ModeAAllCall)][index_of(T::ModeAAllCall)] = 971;
  m.counts[index_of(T::ModeAAllCall)][index_of(T::ModeS)] = 19;
  m.extra[index_of(T::ModeCAllCall)] = 2;
  m.false_positive[index_of(T::ModeS)] = 3;
  return m;
}

// A cu8 recording of several clean messages.
std::string recording(const std::vector<T>& types) {
  std::string bytes;
  for (const auto t : types) {
    auto spec = reference_spec(t);
    spec.lead_out = 1000;
    const auto iq = generate_iq(spec, IqFormat::Cu8);
    bytes.append(iq.begin(), iq.end());
  }
  return bytes;
}

}  // namespace

TEST_CASE("accumulate counts exactly one type per event") {
  TypeCounters c;
  c = accumulate(c, event(T::ModeS, 0));
  CHECK(c.count(T::ModeS) == 1);
  CHECK(c.total() == 1);

  TypeCounters many;
  std::array<std::uint64_t, kTypeCount> expected{};
  for (int i = 0; i < 500; ++i) {
    const auto t = kAllTypes[static_cast<std::size_t>(test::uniform_int(0, 6))];
    ++expected[index_of(t)];
    const auto before = many;
    many = accumulate(many, event(t, static_cast<std::uint64_t>(i)));
    for (const auto u : kAllTypes) {
      REQUIRE(many.count(u) >= before.count(u));
    }
  }
  CHECK(many.total() == 500);
  for (const auto t : kAllTypes) {
    CHECK(many.count(t) == expected[index_of(t)]);
  }
}

TEST_CASE("stream time follows the sample count") {
  TypeCounters c;
  c.add_samples(2500000);
  CHECK(c.stream_seconds() == doctest::Approx(1.0));
}

TEST_CASE("noiseless confusion experiment is diagonal") {
  ConfusionPlan plan;
  plan.count_per_type = 40;
  plan.offsets = {0.0, 0.2, 0.5, 0.7};
  const auto m = run_confusion_experiment(plan);
  for (const auto s : kAllTypes) {
    CHECK(m.sent[index_of(s)] == 40);
    CHECK(m.at(s, s) == 40);
    CHECK(m.wrong(s) == 0);
    CHECK(m.missed[index_of(s)] == 0);
    CHECK(m.extra[index_of(s)] == 0);
  }
  CHECK(m.total_false_positive() == 0);
  CHECK(m.total_error_rate() == 0.0);
}

TEST_CASE("zero amplitude: everything missed") {
  ConfusionPlan plan;
  plan.count_per_type = 10;
  plan.amplitude = 0;
  const auto m = run_confusion_experiment(plan);
  for (const auto s : kAllTypes) {
    CHECK(m.missed[index_of(s)] == 10);
    for (const auto d : kAllTypes) {
      CHECK(m.at(s, d) == 0);
    }
  }
}

TEST_CASE("row accounting holds under noise") {
  ConfusionPlan plan;
  plan.count_per_type = 300;
  plan.snr_db = 14.0;
  plan.seed = 7;
  const auto m = run_confusion_experiment(plan);
  for (const auto s : kAllTypes) {
    std::uint64_t row = m.missed[index_of(s)];
    for (const auto d : kAllTypes) row += m.at(s, d);
    CHECK(row == m.sent[index_of(s)]);
  }
  CHECK(run_confusion_experiment(plan) == m);  // reproducible

  plan.noise_domain = NoiseDomain::Magnitude;
  const auto mag = run_confusion_experiment(plan);
  CHECK(run_confusion_experiment(plan) == mag);
}

TEST_CASE("invalid plans are rejected") {
  ConfusionPlan plan;
  plan.count_per_type = 0;
  CHECK_THROWS_AS(run_confusion_experiment(plan), std::invalid_argument);
  plan = {};
  plan.offsets = {1.0};
  CHECK_THROWS_AS(run_confusion_experiment(plan), std::invalid_argument);
}

TEST_CASE("matrix rates") {
  const auto m = sample_matrix();
  CHECK(m.wrong(T::ModeCAllCall) == 80);
  CHECK(m.error_rate(T::ModeCAllCall) == doctest::Approx(0.08));
  CHECK(m.rate(T::ModeCAllCall, T::ModeS) == doctest::Approx(0.071));
  CHECK(m.total_error_rate() == doctest::Approx(99.0 / 7000.0));
  CHECK(m.total_missed() == 60);
  CHECK(m.total_extra() == 2);
  CHECK(m.total_false_positive() == 3);
}

TEST_CASE("confusion rendering matches the golden file") {
  CHECK(render_confusion(sample_matrix()) ==
        read_file(std::string(UPLINK_TEST_DATA) + "/confusion.txt"));
}

TEST_CASE("confusion json lists rows in report order") {
  const auto j = nlohmann::json::parse(confusion_json(sample_matrix()));
  REQUIRE(j["rows"].size() == 7);
  CHECK(j["rows"][0]["sent"] == "mode-a");
  CHECK(j["rows"][6]["sent"] == "mode-s");
  CHECK(j["rows"][5]["detected"]["mode-s"] == 71);
  CHECK(j["false_positive"]["mode-s"] == 3);
}

TEST_CASE("report order groups by mode") {
  CHECK(kReportOrder.front() == T::ModeA);
  CHECK(kReportOrder[1] == T::ModeAAllCallCompat);
  CHECK(kReportOrder[2] == T::ModeAAllCall);
  CHECK(kReportOrder.back() == T::ModeS);
}

TEST_CASE("text report: one Mode A event") {
  std::ostringstream out;
  Reporter r(out, ReportFormat::Text, 0.0);
  TypeCounters c;
  c.add(event(T::ModeA, 5));
  c.add_samples(250);
  r.on_event(event(T::ModeA, 5));
  r.finish(c);
  CHECK(out.str() ==
        "=== final statistics: 0.000 s (250 samples) ===\n"
        "  Mode A                             1\n"
        "  Mode A all-call (compat)           0\n"
        "  Mode A all-call                    0\n"
        "  Mode C                             0\n"
        "  Mode C all-call (compat)           0\n"
        "  Mode C all-call                    0\n"
        "  Mode S                             0\n"
        "  Total                              1\n"
        "  Messages/s                   10000.0\n");
}

TEST_CASE("json-lines records: one per event plus one per summary") {
  const auto bytes = recording({T::ModeA, T::ModeS, T::ModeCAllCall, T::ModeA});
  DecodeOptions options;
  options.report = ReportFormat::JsonLines;
  options.interval_seconds = 0.0002;  // 500 samples
  std::istringstream in(bytes);
  std::ostringstream out;
  const auto result = decode_stream(in, options, &out);
  REQUIRE(result.events.size() == 4);

  std::istringstream lines(out.str());
  std::string line;
  int events = 0;
  int summaries = 0;
  int finals = 0;
  std::uint64_t last_boundary = 0;
  while (std::getline(lines, line)) {
    const auto j = nlohmann::json::parse(line);
    if (j["record"] == "event") {
      ++events;
      CHECK(j.contains("stream_sample"));
      CHECK(j.contains("mean_pulse_amp"));
    } else {
      ++summaries;
      finals += j["final"].get<bool>();
      const auto at = j["stream_sample"].get<std::uint64_t>();
      CHECK(at >= last_boundary);
      last_boundary = at;
    }
  }
  const auto samples = result.counters.samples();
  CHECK(events == 4);
  CHECK(finals == 1);
  CHECK(summaries == static_cast<int>(samples / 500) + 1);
}

TEST_CASE("reports do not depend on chunking or on being enabled") {
  const auto bytes = recording({T::ModeC, T::ModeAAllCallCompat, T::ModeS, T::ModeA,
                                T::ModeCAllCallCompat});
  const auto run = [&](std::size_t chunk, bool report, ReportFormat format) {
    DecodeOptions options;
    options.chunk_size = chunk;
    options.report = format;
    options.interval_seconds = 0.0001;
    std::istringstream in(bytes);
    std::ostringstream out;
    auto result = decode_stream(in, options, report ? &out : nullptr);
    return std::make_pair(result.events, out.str());
  };
  for (const auto format : {ReportFormat::Text, ReportFormat::JsonLines}) {
    const auto ref = run(1 << 16, true, format);
    CHECK(ref.first.size() == 5);
    for (const std::size_t chunk : {1, 7, 100, 1000}) {
      CHECK(run(chunk, true, format) == ref);
    }
    CHECK(run(4096, false, format).first == ref.first);
  }
}

TEST_CASE("decode reports discarded bytes") {
  std::string bytes = recording({T::ModeA});
  bytes.push_back('\x80');
  std::istringstream in(bytes);
  const auto result = decode_stream(in, {}, nullptr);
  CHECK(result.discarded_bytes == 1);
  CHECK(result.events.size() == 1);
}
