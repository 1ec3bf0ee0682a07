#include "uplink/iq.hpp"

#include <algorithm>
#include <cmath>

#include "magnitude_table.hpp"
#include "uplink/kernels.hpp"

namespace uplink {

std::uint8_t magnitude_from_quarter_power(std::uint32_t n4) {
  // magnitude^2 = 65025 * n4 / 131072. The product and the power-of-two
  // division are exact in double, and sqrt is correctly rounded, so ties
  // (e.g. i = q = 64) land exactly on .5 and the floor below rounds them up.
  const double x = std::sqrt(65025.0 * static_cast<double>(n4) / 131072.0);
  const double rounded = std::floor(x + 0.5);
  return static_cast<std::uint8_t>(std::min(rounded, 255.0));
}

namespace detail {

const MagnitudeTable& cs8_table() {
  static const MagnitudeTable table = [] {
    MagnitudeTable t{};
    for (int a = 0; a < 256; ++a) {
      for (int b = 0; b < 256; ++b) {
        const int i = static_cast<std::int8_t>(a);
        const int q = static_cast<std::int8_t>(b);
        t[pair_index(a, b)] =
            magnitude_from_quarter_power(static_cast<std::uint32_t>(4 * (i * i + q * q)));
      }
    }
    return t;
  }();
  return table;
}

const MagnitudeTable& cu8_table() {
  static const MagnitudeTable table = [] {
    MagnitudeTable t{};
    for (int a = 0; a < 256; ++a) {
      for (int b = 0; b < 256; ++b) {
        const int i2 = 2 * a - 255;
        const int q2 = 2 * b - 255;
        t[pair_index(a, b)] =
            magnitude_from_quarter_power(static_cast<std::uint32_t>(i2 * i2 + q2 * q2));
      }
    }
    return t;
  }();
  return table;
}

}  // namespace detail

std::uint8_t iq_to_magnitude(int i, int q) {
  i = std::clamp(i, -128, 127);
  q = std::clamp(q, -128, 127);
  return detail::cs8_table()[detail::pair_index(static_cast<std::uint8_t>(i),
                                                static_cast<std::uint8_t>(q))];
}

std::uint8_t cu8_to_magnitude(std::uint8_t i, std::uint8_t q) {
  return detail::cu8_table()[detail::pair_index(i, q)];
}

std::optional<IqFormat> parse_iq_format(std::string_view text) {
  if (text == "cu8") {
    return IqFormat::Cu8;
  }
  if (text == "cs8") {
    return IqFormat::Cs8;
  }
  return std::nullopt;
}

std::string_view to_string(IqFormat format) {
  return format == IqFormat::Cu8 ? "cu8" : "cs8";
}

void convert_iq(std::span<const std::uint8_t> bytes, IqFormat format,
                std::span<std::uint8_t> out) {
  const std::size_t n = std::min(bytes.size() / 2, out.size());
  const auto& k = kernels::active();
  (format == IqFormat::Cu8 ? k.convert_cu8 : k.convert_cs8)(bytes.data(), n, out.data());
}

std::vector<std::uint8_t> to_magnitudes(std::span<const std::uint8_t> bytes,
                                        IqFormat format) {
  std::vector<std::uint8_t> out(bytes.size() / 2);
  convert_iq(bytes, format, out);
  return out;
}

IqReader::IqReader(std::istream& in, IqFormat format, std::size_t chunk_size)
    : in_(in), format_(format), chunk_size_(chunk_size) {
  if (chunk_size_ == 0) {
    throw std::invalid_argument("chunk size must be at least 1");
  }
  bytes_.reserve(2 * chunk_size_);
}

std::optional<MagnitudeChunk> IqReader::next() {
  if (eof_) {
    return std::nullopt;
  }
  bytes_.clear();
  const std::size_t want = 2 * chunk_size_;
  while (bytes_.size() < want && !eof_) {
    const std::size_t have = bytes_.size();
    bytes_.resize(want);
    in_.read(reinterpret_cast<char*>(bytes_.data() + have),
             static_cast<std::streamsize>(want - have));
    const auto got = static_cast<std::size_t>(in_.gcount());
    bytes_.resize(have + got);
    if (in_.bad()) {
      throw IoError("read failed after " + std::to_string(samples_read_) + " samples");
    }
    if (in_.eof()) {
      eof_ = true;
    } else if (in_.fail()) {
      throw IoError("read failed after " + std::to_string(samples_read_) + " samples");
    }
  }
  // Only a short read at end of stream can leave an odd count.
  if (bytes_.size() % 2 != 0) {
    ++discarded_bytes_;
    bytes_.pop_back();
  }
  if (bytes_.empty()) {
    return std::nullopt;
  }

  MagnitudeChunk chunk;
  chunk.source_offset = samples_read_;
  chunk.samples.resize(bytes_.size() / 2);
  convert_iq(bytes_, format_, chunk.samples);
  samples_read_ += chunk.samples.size();
  return chunk;
}

}  // namespace uplink
