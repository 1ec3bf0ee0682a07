#pragma once

// 8-bit IQ ingestion and the IQ -> 0..255 magnitude translation.

#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace uplink {

/// The whole pipeline assumes 2.5 MSPS, one sample every 0.4 us.
inline constexpr double kSampleRateHz = 2.5e6;
inline constexpr double kSamplePeriodUs = 0.4;

/// Interleaved I,Q byte layout of the input.
enum class IqFormat : std::uint8_t {
  Cu8,  ///< unsigned, zero at mid-scale 127.5 (RTL-SDR)
  Cs8,  ///< signed two's complement
};

std::optional<IqFormat> parse_iq_format(std::string_view text);
std::string_view to_string(IqFormat format);

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Magnitude of a centered 8-bit IQ pair, scaled so that the (-128,-128)
/// corner maps to 255: round(sqrt(i*i + q*q) * 255 / (128 * sqrt(2))).
/// Ties round up. Table-driven; exact for every pair.
std::uint8_t iq_to_magnitude(int i, int q);

/// Same translation for raw cu8 bytes, centered on 127.5 before the formula.
std::uint8_t cu8_to_magnitude(std::uint8_t i, std::uint8_t q);

/// Direct (table-free) evaluation of the magnitude formula from the
/// quadrupled power n4 = (2i)^2 + (2q)^2. Both byte formats reduce to this:
/// cs8 gives n4 = 4(i^2 + q^2), cu8 gives n4 = (2b_i - 255)^2 + (2b_q - 255)^2.
std::uint8_t magnitude_from_quarter_power(std::uint32_t n4);

/// Convert interleaved IQ bytes to magnitudes with the active kernel set.
/// Writes bytes.size() / 2 samples; a trailing odd byte is ignored.
void convert_iq(std::span<const std::uint8_t> bytes, IqFormat format,
                std::span<std::uint8_t> out);

std::vector<std::uint8_t> to_magnitudes(std::span<const std::uint8_t> bytes,
                                        IqFormat format);

/// A run of magnitude samples and its position in the source stream.
struct MagnitudeChunk {
  static constexpr double sample_period_us = kSamplePeriodUs;

  std::vector<std::uint8_t> samples;
  std::uint64_t source_offset = 0;
};

/// Pulls fixed-size magnitude chunks out of a byte stream.
///
/// Each chunk holds chunk_size samples except the last. A single byte left
/// at end of stream is dropped and counted in discarded_bytes().
class IqReader {
 public:
  IqReader(std::istream& in, IqFormat format, std::size_t chunk_size);

  /// Next chunk, or nullopt at end of stream. Throws IoError if the stream
  /// reports a read failure.
  std::optional<MagnitudeChunk> next();

  std::uint64_t samples_read() const { return samples_read_; }
  std::uint64_t discarded_bytes() const { return discarded_bytes_; }

 private:
  std::istream& in_;
  IqFormat format_;
  std::size_t chunk_size_;
  std::vector<std::uint8_t> bytes_;
  std::uint64_t samples_read_ = 0;
  std::uint64_t discarded_bytes_ = 0;
  bool eof_ = false;
};

}  // namespace uplink
