#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "support.hpp"
#include "uplink/detector.hpp"
#include "uplink/iq.hpp"
#include "uplink/sigen.hpp"

using namespace uplink;
using T = InterrogationType;

namespace {

std::filesystem::path scratch_dir(const std::string& leaf) {
  auto dir = std::filesystem::temp_directory_path() / ("uplink-test-" + leaf);
  std::filesystem::remove_all(dir);
  return dir;
}

std::vector<std::uint8_t> slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("generator parameters are validated") {
  GenSpec s;
  CHECK_NOTHROW(s.validate());
  s.amplitude = 256;
  CHECK_THROWS_AS(generate_magnitude(s), std::invalid_argument);
  s = {};
  s.fractional_offset = 1.0;
  CHECK_THROWS_AS(generate_magnitude(s), std::invalid_argument);
  s = {};
  s.snr_db = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(generate_magnitude(s), std::invalid_argument);
}

TEST_CASE("compat all-call at 255 and offset 0.2 spans 29 samples") {
  const auto m = test::clean(T::ModeAAllCallCompat, 255, 0.2);
  REQUIRE(m.size() == 29);
  const auto r = rasterize(template_for(T::ModeAAllCallCompat), 0.2);
  for (const int k : r.pulse) {
    CHECK(m[static_cast<std::size_t>(k)] == 255);
  }
  for (const int k : r.far) {
    CHECK(m[static_cast<std::size_t>(k)] == 0);
  }
}

TEST_CASE("leads are silent apart from the trailing edge sample") {
  const auto m = test::clean(T::ModeA, 200, 0.0, 10, 10);
  REQUIRE(m.size() == 10 + 22 + 10);
  for (int k = 0; k < 10; ++k) CHECK(m[static_cast<std::size_t>(k)] == 0);
  // At offset 0 the P3 trailing edge falls on a sample instant; the sample
  // period centred there is half inside the pulse.
  CHECK(m[32] == 100);
  for (std::size_t k = 33; k < m.size(); ++k) CHECK(m[k] == 0);
  CHECK(m[10] == 200);
  CHECK(m[11] == 200);
  CHECK(m[12] == 100);
  CHECK(m[30] == 200);
}

TEST_CASE("edge samples carry the covered fraction") {
  const auto m = test::clean(T::ModeA, 200, 0.2, 1, 1);
  // Sample after P1 at offset 0.2: period [1.7, 2.7) overlaps [0, 2) by 0.3.
  CHECK(m[1 + 2] == 60);
  // Sample before P1: period [-1.3, -0.3) misses it.
  CHECK(m[0] == 0);
}

TEST_CASE("all-call samples from P3 equal the Mode S preamble samples") {
  for (int step = 0; step < 20; ++step) {
    const double f = step / 20.0;
    CAPTURE(f);
    const auto s = test::clean(T::ModeS, 200, f, 0, 4);
    const auto a = test::clean(T::ModeAAllCall, 200, f, 0, 4);
    const auto& tmpl = template_for(T::ModeS);
    int preamble = 0;
    while (!is_opaque(tmpl, preamble, f)) ++preamble;
    for (int k = 0; k < preamble; ++k) {
      REQUIRE(a[static_cast<std::size_t>(20 + k)] == s[static_cast<std::size_t>(k)]);
    }
    // Mode C P3 sits half a sample later, so its suffix matches Mode S half a
    // sample further on.
    const double g = f < 0.5 ? f + 0.5 : f - 0.5;
    const int shift = f < 0.5 ? 53 : 52;
    const auto c = test::clean(T::ModeCAllCall, 200, f, 0, 4);
    const auto s2 = test::clean(T::ModeS, 200, g, 0, 4);
    int preamble2 = 0;
    while (!is_opaque(tmpl, preamble2, g)) ++preamble2;
    for (int k = 0; k < preamble2; ++k) {
      REQUIRE(c[static_cast<std::size_t>(shift + k)] == s2[static_cast<std::size_t>(k)]);
    }
  }
}

TEST_CASE("noiseless IQ reproduces the magnitudes within one count") {
  for (const auto type : kAllTypes) {
    for (const int amp : {0, 1, 37, 64, 128, 200, 254, 255}) {
      for (const double f : {0.0, 0.2, 0.5, 0.7, 0.95}) {
        GenSpec s;
        s.type = type;
        s.amplitude = amp;
        s.fractional_offset = f;
        s.lead_in = 3;
        s.lead_out = 3;
        s.seed = 99;
        const auto mag = generate_magnitude(s);
        for (const auto format : {IqFormat::Cu8, IqFormat::Cs8}) {
          const auto back = to_magnitudes(generate_iq(s, format), format);
          REQUIRE(back.size() == mag.size());
          for (std::size_t k = 0; k < mag.size(); ++k) {
            REQUIRE(std::abs(int(back[k]) - int(mag[k])) <= 1);
          }
        }
      }
    }
  }
}

TEST_CASE("zero amplitude is silence") {
  GenSpec s;
  s.amplitude = 0;
  s.lead_in = 5;
  const auto cu8 = generate_iq(s, IqFormat::Cu8);
  CHECK(std::all_of(cu8.begin(), cu8.end(), [](std::uint8_t b) { return b == 128; }));
  const auto cs8 = generate_iq(s, IqFormat::Cs8);
  CHECK(std::all_of(cs8.begin(), cs8.end(), [](std::uint8_t b) { return b == 0; }));
}

TEST_CASE("generation is deterministic and seeded") {
  GenSpec s;
  s.type = T::ModeS;
  s.seed = 5;
  s.lead_in = 20;
  s.lead_out = 20;
  CHECK(generate_iq(s, IqFormat::Cu8) == generate_iq(s, IqFormat::Cu8));
  auto other = s;
  other.seed = 6;
  CHECK(generate_magnitude(s) != generate_magnitude(other));  // different P6 chips

  s.snr_db = 12.0;
  CHECK(generate_magnitude(s) == generate_magnitude(s));
  CHECK(generate_iq(s, IqFormat::Cs8) == generate_iq(s, IqFormat::Cs8));
  other = s;
  other.seed = 6;
  CHECK(generate_iq(s, IqFormat::Cu8) != generate_iq(other, IqFormat::Cu8));
}

TEST_CASE("infinite SNR is noiseless") {
  for (const auto type : kAllTypes) {
    GenSpec s;
    s.type = type;
    s.lead_in = 10;
    s.seed = 3;
    auto inf = s;
    inf.snr_db = std::numeric_limits<double>::infinity();
    CHECK(generate_magnitude(inf) == generate_magnitude(s));
    CHECK(generate_iq(inf, IqFormat::Cu8) == generate_iq(s, IqFormat::Cu8));
  }
}

TEST_CASE("noise power follows the SNR definition") {
  // Long Mode A all-call compat pulses at amplitude 128, SNR 20 dB:
  // the variance around the pulse level should be A^2 / snr in the
  // magnitude domain and half that along the pulse phase in the IQ domain.
  const double snr_db = 20.0;
  const double amp = 128.0;
  const double variance = amp * amp / std::pow(10.0, snr_db / 10.0);
  double mag_sum = 0.0;
  double iq_sum = 0.0;
  std::size_t n = 0;
  for (std::uint64_t seed = 0; seed < 400; ++seed) {
    GenSpec s;
    s.type = T::ModeAAllCallCompat;
    s.amplitude = static_cast<int>(amp);
    s.snr_db = snr_db;
    s.seed = seed;
    const auto mag = generate_magnitude(s);
    const auto iq = to_magnitudes(generate_iq(s, IqFormat::Cu8), IqFormat::Cu8);
    for (const int k : rasterize(template_for(s.type), 0.0).pulse) {
      mag_sum += std::pow(mag[static_cast<std::size_t>(k)] - amp, 2);
      iq_sum += std::pow(iq[static_cast<std::size_t>(k)] - amp, 2);
      ++n;
    }
  }
  CHECK(mag_sum / n == doctest::Approx(variance).epsilon(0.1));
  CHECK(iq_sum / n == doctest::Approx(variance / 2).epsilon(0.1));
}

TEST_CASE("reference set") {
  const auto dir = scratch_dir("ref");
  const auto entries = write_reference_set(dir);
  REQUIRE(entries.size() == 7);
  CHECK(std::filesystem::exists(dir / "manifest.tsv"));

  std::vector<std::vector<std::uint8_t>> first;
  for (const auto& e : entries) {
    const auto bytes = slurp(dir / e.filename);
    CHECK(crc32_of(bytes) == e.crc32);
    CHECK(e.spec.amplitude == 200);
    CHECK(e.spec.fractional_offset == 0.0);
    CHECK_FALSE(e.spec.snr_db);
    CHECK(e.spec.lead_in == 100);
    const auto events = scan(to_magnitudes(bytes, IqFormat::Cu8));
    REQUIRE(events.size() == 1);
    CHECK(events[0].type == e.spec.type);
    CHECK(events[0].start_sample == 100);
    first.push_back(bytes);
  }

  const auto again = write_reference_set(dir);
  for (std::size_t i = 0; i < again.size(); ++i) {
    CHECK(slurp(dir / again[i].filename) == first[i]);
  }

  std::ifstream manifest(dir / "manifest.tsv");
  std::string line;
  int lines = 0;
  while (std::getline(manifest, line)) {
    CHECK(line == manifest_line(entries[static_cast<std::size_t>(lines)]));
    ++lines;
  }
  CHECK(lines == 7);
  std::filesystem::remove_all(dir);
}

TEST_CASE("manifest line format") {
  ReferenceEntry e{"mode-c.cu8", reference_spec(T::ModeC), 0x0badf00d};
  CHECK(manifest_line(e) == "mode-c.cu8\tmode-c\t200\t0.00\tnone\t1030\t0badf00d");
}

TEST_CASE("reference set reports unwritable directories") {
  const auto blocker = scratch_dir("blocker");
  std::ofstream(blocker) << "file, not a directory";
  CHECK_THROWS_AS(write_reference_set(blocker / "sub"), IoError);
  std::filesystem::remove_all(blocker);
}
