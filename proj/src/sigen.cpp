#include "uplink/sigen.hpp"

#include <algorithm>
#include <array>
#include <boost/crc.hpp>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <stdexcept>

namespace uplink {
namespace {

constexpr std::uint64_t kNoiseStream = 0x9e3779b97f4a7c15ULL;
constexpr std::uint64_t kReferenceSeed = 1030;
constexpr int kReferenceAmplitude = 200;
constexpr std::size_t kReferenceLead = 100;

bool noisy(const GenSpec& spec) { return spec.snr_db && std::isfinite(*spec.snr_db); }

double snr_linear(const GenSpec& spec) { return std::pow(10.0, *spec.snr_db / 10.0); }

// Per-format I (= Q) value whose magnitude is closest to each level, searched
// from mid-scale outwards so that level 0 maps to mid-scale.
using ComponentTable = std::array<std::uint8_t, 256>;

ComponentTable build_components(IqFormat format) {
  ComponentTable table{};
  for (int level = 0; level < 256; ++level) {
    int best_error = 1 << 30;
    for (int step = 0; step <= 128; ++step) {
      std::uint8_t byte;
      int mag;
      if (format == IqFormat::Cs8) {
        byte = static_cast<std::uint8_t>(static_cast<std::int8_t>(-step));
        mag = iq_to_magnitude(-step, -step);
      } else {
        byte = static_cast<std::uint8_t>(128 - step);
        mag = cu8_to_magnitude(byte, byte);
      }
      const int error = std::abs(mag - level);
      if (error < best_error) {
        best_error = error;
        table[level] = byte;
      }
    }
  }
  return table;
}

const ComponentTable& components(IqFormat format) {
  static const ComponentTable cs8 = build_components(IqFormat::Cs8);
  static const ComponentTable cu8 = build_components(IqFormat::Cu8);
  return format == IqFormat::Cs8 ? cs8 : cu8;
}

std::uint8_t quantise(double value) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(value), 0L, 255L));
}

}  // namespace

void GenSpec::validate() const {
  if (amplitude < 0 || amplitude > 255) {
    throw std::invalid_argument("amplitude must be in [0, 255]");
  }
  if (!(fractional_offset >= 0.0 && fractional_offset < 1.0)) {
    throw std::invalid_argument("fractional offset must be in [0, 1)");
  }
  if (snr_db && (std::isnan(*snr_db) || *snr_db == -INFINITY)) {
    throw std::invalid_argument("snr must be a number or +inf");
  }
}

std::vector<std::uint8_t> generate_magnitude(const GenSpec& spec) {
  spec.validate();
  const auto& tmpl = template_for(spec.type);
  const std::size_t total = spec.lead_in + static_cast<std::size_t>(skip_count_for(spec.type)) +
                            spec.lead_out;
  const double amp = spec.amplitude;

  std::vector<std::uint8_t> out(total);
  std::mt19937_64 chips(spec.seed);
  for (std::size_t i = 0; i < total; ++i) {
    const long k = static_cast<long>(i) - static_cast<long>(spec.lead_in);
    if (is_opaque(tmpl, k, spec.fractional_offset)) {
      out[i] = (chips() >> 63) != 0 ? static_cast<std::uint8_t>(spec.amplitude) : 0;
    } else if (is_pulse_sample(tmpl, k, spec.fractional_offset)) {
      out[i] = static_cast<std::uint8_t>(spec.amplitude);
    } else {
      out[i] = quantise(amp * pulse_coverage(tmpl, k, spec.fractional_offset));
    }
  }

  if (noisy(spec)) {
    std::mt19937_64 rng(spec.seed ^ kNoiseStream);
    std::normal_distribution<double> noise(0.0, amp / std::sqrt(snr_linear(spec)));
    for (auto& v : out) {
      v = quantise(v + noise(rng));
    }
  }
  return out;
}

std::vector<std::uint8_t> generate_iq(const GenSpec& spec, IqFormat format) {
  GenSpec clean = spec;
  clean.snr_db.reset();
  const auto levels = generate_magnitude(clean);

  std::vector<std::uint8_t> out(2 * levels.size());
  if (!noisy(spec)) {
    const auto& table = components(format);
    for (std::size_t i = 0; i < levels.size(); ++i) {
      out[2 * i] = out[2 * i + 1] = table[levels[i]];
    }
    return out;
  }

  // Each component of a level-v sample sits at -v * 128 / 255 (centred units).
  const double sigma = spec.amplitude * 128.0 / (255.0 * std::sqrt(snr_linear(spec)));
  std::mt19937_64 rng(spec.seed ^ kNoiseStream);
  std::normal_distribution<double> noise(0.0, sigma);
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const double component = -levels[i] * 128.0 / 255.0;
    for (int c = 0; c < 2; ++c) {
      const double value = component + noise(rng);
      if (format == IqFormat::Cs8) {
        const long q = std::clamp(std::lround(value), -128L, 127L);
        out[2 * i + c] = static_cast<std::uint8_t>(static_cast<std::int8_t>(q));
      } else {
        out[2 * i + c] = quantise(127.5 + value);
      }
    }
  }
  return out;
}

std::uint32_t crc32_of(const std::vector<std::uint8_t>& bytes) {
  boost::crc_32_type crc;
  crc.process_bytes(bytes.data(), bytes.size());
  return crc.checksum();
}

GenSpec reference_spec(InterrogationType type) {
  GenSpec spec;
  spec.type = type;
  spec.amplitude = kReferenceAmplitude;
  spec.fractional_offset = 0.0;
  spec.lead_in = kReferenceLead;
  spec.lead_out = kReferenceLead;
  spec.seed = kReferenceSeed;
  return spec;
}

std::string manifest_line(const ReferenceEntry& e) {
  char offset[32];
  std::snprintf(offset, sizeof offset, "%.2f", e.spec.fractional_offset);
  std::string snr = "none";
  if (e.spec.snr_db) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", *e.spec.snr_db);
    snr = buf;
  }
  char crc[16];
  std::snprintf(crc, sizeof crc, "%08x", e.crc32);
  return e.filename + '\t' + std::string(name(e.spec.type)) + '\t' +
         std::to_string(e.spec.amplitude) + '\t' + offset + '\t' + snr + '\t' +
         std::to_string(e.spec.seed) + '\t' + crc;
}

std::vector<ReferenceEntry> write_reference_set(const std::filesystem::path& directory) {
  std::error_code ec;
  std::filesystem::create_directories(directory, ec);
  if (ec) {
    throw IoError("cannot create " + directory.string() + ": " + ec.message());
  }

  const auto write_file = [](const std::filesystem::path& path, const char* data,
                             std::size_t size) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(data, static_cast<std::streamsize>(size));
    out.close();
    if (!out) {
      throw IoError("cannot write " + path.string());
    }
  };

  std::vector<ReferenceEntry> entries;
  std::string manifest;
  for (const auto type : kAllTypes) {
    ReferenceEntry entry{std::string(name(type)) + ".cu8", reference_spec(type), 0};
    const auto bytes = generate_iq(entry.spec, IqFormat::Cu8);
    entry.crc32 = crc32_of(bytes);
    write_file(directory / entry.filename, reinterpret_cast<const char*>(bytes.data()),
               bytes.size());
    manifest += manifest_line(entry) + '\n';
    entries.push_back(std::move(entry));
  }
  write_file(directory / "manifest.tsv", manifest.data(), manifest.size());
  return entries;
}

}  // namespace uplink
