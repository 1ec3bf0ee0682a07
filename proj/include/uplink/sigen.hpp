#pragma once

// Deterministic synthetic interrogations: clean or AWGN-corrupted magnitude
// streams and 8-bit IQ files, plus the released reference set.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "uplink/iq.hpp"
#include "uplink/templates.hpp"

namespace uplink {

struct GenSpec {
  InterrogationType type = InterrogationType::ModeA;
  int amplitude = 200;             // pulse level on the 0..255 magnitude scale
  double fractional_offset = 0.0;  // message start within the first sample, [0, 1)
  std::optional<double> snr_db;    // nullopt = noiseless
  std::size_t lead_in = 0;
  std::size_t lead_out = 0;
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument for out-of-range fields.
  void validate() const;
};

/// Pulse samples carry the amplitude, samples straddling an edge the covered
/// fraction of it, everything else zero. The Mode S payload is a seeded 0/A
/// chip pattern. With snr_db set, N(0, A^2 / snr) is added per sample and the
/// result rounded and clamped to [0, 255].
std::vector<std::uint8_t> generate_magnitude(const GenSpec& spec);

/// Interleaved IQ at a constant 225 degree phase (I = Q <= 0), whose
/// magnitude matches generate_magnitude within one count when noiseless.
/// With snr_db set, complex noise of total variance A^2 / snr is added in the
/// IQ domain before quantisation.
std::vector<std::uint8_t> generate_iq(const GenSpec& spec, IqFormat format);

struct ReferenceEntry {
  std::string filename;
  GenSpec spec;
  std::uint32_t crc32 = 0;
};

/// Canonical per-type generator parameters of the reference set.
GenSpec reference_spec(InterrogationType type);

/// Writes one .cu8 file per interrogation type plus manifest.tsv.
/// Throws IoError if a file cannot be written.
std::vector<ReferenceEntry> write_reference_set(const std::filesystem::path& directory);

/// filename, type, amplitude, offset, snr, seed, checksum; tab separated.
std::string manifest_line(const ReferenceEntry& entry);

std::uint32_t crc32_of(const std::vector<std::uint8_t>& bytes);

}  // namespace uplink
