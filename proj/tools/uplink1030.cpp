// uplink1030: decode, generate, confusion, recommend.

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>

#include "uplink/detector.hpp"
#include "uplink/iq.hpp"
#include "uplink/sigen.hpp"
#include "uplink/stats.hpp"
#include "uplink/templates.hpp"

namespace {

using namespace uplink;

struct DetectorFlags {
  DetectorConfig config;
  int min_pulse = -1;
  int max_far = -1;
  int max_near = -1;

  void add(CLI::App& app) {
    app.add_option("--rel-far", config.rel_far_pre, "ratio, far samples before P3");
    app.add_option("--rel-near", config.rel_near_pre, "ratio, near samples before P3");
    app.add_option("--rel-far-p4", config.rel_far_post, "ratio, far samples after P3");
    app.add_option("--rel-near-p4", config.rel_near_post, "ratio, near samples after P3");
    app.add_option("--abs-far", config.abs_far_pre, "absolute margin, far samples");
    app.add_option("--abs-near", config.abs_near_pre, "absolute margin, near samples");
    app.add_option("--fixed-min-pulse", min_pulse, "reject pulses below this level")
        ->check(CLI::Range(0, 255));
    app.add_option("--fixed-max-far", max_far, "reject far samples above this level")
        ->check(CLI::Range(0, 255));
    app.add_option("--fixed-max-near", max_near, "reject near samples above this level")
        ->check(CLI::Range(0, 255));
  }

  DetectorConfig resolve() const {
    DetectorConfig c = config;
    if (min_pulse >= 0) c.fixed_min_pulse = min_pulse;
    if (max_far >= 0) c.fixed_max_far = max_far;
    if (max_near >= 0) c.fixed_max_near = max_near;
    c.validate();
    return c;
  }
};

IqFormat format_from(const std::string& text) {
  const auto f = parse_iq_format(text);
  if (!f) {
    throw std::invalid_argument("unknown IQ format: " + text);
  }
  return *f;
}

InterrogationType type_from(const std::string& text) {
  const auto t = parse_type(text);
  if (!t) {
    throw std::invalid_argument("unknown interrogation type: " + text);
  }
  return *t;
}

std::optional<double> snr_from(const std::string& text) {
  if (text.empty() || text == "none" || text == "inf") {
    return std::nullopt;
  }
  std::size_t used = 0;
  const double v = std::stod(text, &used);
  if (used != text.size()) {
    throw std::invalid_argument("bad snr: " + text);
  }
  return v;
}

void print_recommendation(std::ostream& out, const std::vector<DetectionEvent>& events) {
  const auto r = recommend_thresholds(events);
  if (!r) {
    out << "no interrogations detected; no recommendation\n";
    return;
  }
  out << "recommended fixed filters (from " << events.size() << " interrogations):\n"
      << "  --fixed-min-pulse " << r->min_pulse << "\n"
      << "  --fixed-max-far " << r->max_far << "\n"
      << "  --fixed-max-near " << r->max_near << "\n";
}

DecodeResult decode_path(const std::string& path, const DecodeOptions& options,
                         std::ostream* report) {
  if (path == "-") {
    return decode_stream(std::cin, options, report);
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path);
  }
  return decode_stream(in, options, report);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"1030 MHz interrogation decoder"};
  app.require_subcommand(1);

  // decode
  auto* decode = app.add_subcommand("decode", "detect interrogations in an IQ recording");
  std::string decode_in = "-";
  std::string decode_format = "cu8";
  double sample_rate = kSampleRateHz;
  std::size_t chunk = 1 << 16;
  double interval = 0.0;
  bool json = false;
  bool recommend_after = false;
  DetectorFlags decode_flags;
  decode->add_option("--ifile", decode_in, "input file, - for stdin");
  decode->add_option("--format", decode_format, "cu8 or cs8");
  decode->add_option("--sample-rate", sample_rate, "must be 2.5e6");
  decode->add_option("--chunk-size", chunk, "samples per read")->check(CLI::PositiveNumber);
  decode->add_option("--stats-interval", interval, "seconds of stream between summaries")
      ->check(CLI::NonNegativeNumber);
  decode->add_flag("--json", json, "JSON lines output");
  decode->add_flag("--recommend", recommend_after, "print fixed-filter recommendation");
  decode_flags.add(*decode);

  // generate
  auto* generate = app.add_subcommand("generate", "write a synthetic interrogation");
  std::string gen_type = "mode-a";
  std::string gen_format = "cu8";
  std::string gen_out;
  std::string gen_snr = "none";
  std::string reference_dir;
  GenSpec gen;
  generate->add_option("--type", gen_type, "interrogation type");
  generate->add_option("--amp", gen.amplitude, "pulse amplitude 0..255");
  generate->add_option("--offset", gen.fractional_offset, "fractional start offset [0,1)");
  generate->add_option("--snr", gen_snr, "SNR in dB, or none");
  generate->add_option("--seed", gen.seed, "RNG seed");
  generate->add_option("--lead-in", gen.lead_in, "silent samples before");
  generate->add_option("--lead-out", gen.lead_out, "silent samples after");
  generate->add_option("--format", gen_format, "cu8 or cs8");
  generate->add_option("--out", gen_out, "output file, - for stdout");
  generate->add_option("--reference-set", reference_dir, "write the reference set here");

  // confusion
  auto* confusion = app.add_subcommand("confusion", "sent-vs-detected confusion experiment");
  ConfusionPlan plan;
  std::string conf_snr = "none";
  std::string domain = "iq";
  bool conf_json = false;
  DetectorFlags conf_flags;
  confusion->add_option("--count", plan.count_per_type, "messages per type")
      ->check(CLI::PositiveNumber);
  confusion->add_option("--amp", plan.amplitude, "pulse amplitude")->check(CLI::Range(1, 255));
  confusion->add_option("--snr", conf_snr, "SNR in dB, or none");
  confusion->add_option("--seed", plan.seed, "RNG seed");
  confusion->add_option("--noise", domain, "iq or magnitude");
  confusion->add_option("--offset", plan.offsets,
                        "fractional offsets to cycle (repeatable); default uniform random");
  confusion->add_flag("--json", conf_json, "JSON output");
  conf_flags.add(*confusion);

  // recommend
  auto* recommend = app.add_subcommand("recommend", "suggest fixed filters from a recording");
  std::string rec_in = "-";
  std::string rec_format = "cu8";
  DetectorFlags rec_flags;
  recommend->add_option("--ifile", rec_in, "input file, - for stdin");
  recommend->add_option("--format", rec_format, "cu8 or cs8");
  rec_flags.add(*recommend);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Help and version exit 0; every usage error maps to 2.
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*decode) {
      if (sample_rate != kSampleRateHz) {
        std::cerr << "only 2.5e6 samples/s is supported\n";
        return 2;
      }
      DecodeOptions options;
      options.format = format_from(decode_format);
      options.chunk_size = chunk;
      options.detector = decode_flags.resolve();
      options.report = json ? ReportFormat::JsonLines : ReportFormat::Text;
      options.interval_seconds = interval;
      const auto result = decode_path(decode_in, options, &std::cout);
      if (result.discarded_bytes > 0) {
        std::cerr << "warning: discarded " << result.discarded_bytes
                  << " trailing byte(s) of an incomplete sample\n";
      }
      if (recommend_after) {
        print_recommendation(json ? std::cerr : std::cout, result.events);
      }
    } else if (*generate) {
      if (!reference_dir.empty()) {
        for (const auto& e : write_reference_set(reference_dir)) {
          std::cout << manifest_line(e) << '\n';
        }
        return 0;
      }
      gen.type = type_from(gen_type);
      gen.snr_db = snr_from(gen_snr);
      const auto bytes = generate_iq(gen, format_from(gen_format));
      if (gen_out.empty() || gen_out == "-") {
        std::cout.write(reinterpret_cast<const char*>(bytes.data()),
                        static_cast<std::streamsize>(bytes.size()));
        std::cout.flush();
        if (!std::cout) throw IoError("write to stdout failed");
      } else {
        std::ofstream out(gen_out, std::ios::binary | std::ios::trunc);
        out.write(reinterpret_cast<const char*>(bytes.data()),
                  static_cast<std::streamsize>(bytes.size()));
        out.close();
        if (!out) throw IoError("cannot write " + gen_out);
      }
    } else if (*confusion) {
      plan.snr_db = snr_from(conf_snr);
      plan.detector = conf_flags.resolve();
      if (domain == "iq") {
        plan.noise_domain = NoiseDomain::Iq;
      } else if (domain == "magnitude") {
        plan.noise_domain = NoiseDomain::Magnitude;
      } else {
        throw std::invalid_argument("unknown noise domain: " + domain);
      }
      const auto matrix = run_confusion_experiment(plan);
      std::cout << (conf_json ? confusion_json(matrix) + "\n" : render_confusion(matrix));
    } else if (*recommend) {
      DecodeOptions options;
      options.format = format_from(rec_format);
      options.detector = rec_flags.resolve();
      const auto result = decode_path(rec_in, options, nullptr);
      print_recommendation(std::cout, result.events);
    }
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
