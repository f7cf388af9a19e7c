#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <random>
#include <unistd.h>

#include "core/dictionary_io.hpp"

using namespace mfusion;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("mfusion_dict_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

Eigen::MatrixXd random_atoms(int dim, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  Eigen::MatrixXd m(dim, count);
  for (int j = 0; j < count; ++j) {
    for (int i = 0; i < dim; ++i) m(i, j) = gauss(rng);
    m.col(j).normalize();
  }
  return m;
}

CoupledDictionary random_pair(int dim, int count, std::uint64_t seed, bool paired) {
  CoupledDictionary dict;
  dict.focused = Dictionary(random_atoms(dim, count, seed), DictLabel::focused);
  dict.blurred = Dictionary(random_atoms(dim, count, seed + 1), DictLabel::blurred);
  dict.paired = paired;
  return dict;
}

}  // namespace

TEST_CASE("crc32 matches the reference vector") {
  const char* text = "123456789";
  CHECK(crc32(reinterpret_cast<const std::uint8_t*>(text), 9) == 0xCBF43926u);
  CHECK(crc32(nullptr, 0) == 0x00000000u);
}

TEST_CASE("CDL1 header layout is bit-exact") {
  const CoupledDictionary dict = random_pair(4, 3, 7, true);
  const auto bytes = serialize_dictionary(dict);
  REQUIRE(bytes.size() == 16 + 2 * 4 * 3 * 8 + 4);
  CHECK(bytes[0] == 'C');
  CHECK(bytes[1] == 'D');
  CHECK(bytes[2] == 'L');
  CHECK(bytes[3] == '1');
  CHECK(bytes[4] == 4);   // dim, little endian
  CHECK(bytes[5] == 0);
  CHECK(bytes[8] == 3);   // atoms per sub-dictionary
  CHECK(bytes[12] == kDictModeCoupled);
  CHECK(bytes[13] == 0);
  CHECK(bytes[14] == 0);
  CHECK(bytes[15] == 0);
}

TEST_CASE("CDL1 round trip is bit-exact for coupled, separate, and single modes") {
  TempDir tmp;
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const int dim = 2 + static_cast<int>(rng() % 30);
    const int count = 1 + static_cast<int>(rng() % 40);
    const bool paired = rng() % 2 == 0;
    const CoupledDictionary dict = random_pair(dim, count, rng(), paired);
    const std::string path = tmp.file("pair.cdl1");
    save_dictionary(path, dict);
    const DictionaryFile loaded = load_dictionary(path);
    REQUIRE(loaded.pair.has_value());
    CHECK(loaded.mode == (paired ? kDictModeCoupled : kDictModeSeparate));
    CHECK(loaded.pair->paired == paired);
    CHECK(loaded.pair->focused.atoms() == dict.focused.atoms());  // bit-exact
    CHECK(loaded.pair->blurred.atoms() == dict.blurred.atoms());
  }

  const Dictionary single(random_atoms(9, 5, 21), DictLabel::single);
  const std::string path = tmp.file("single.cdl1");
  save_dictionary(path, single);
  const DictionaryFile loaded = load_dictionary(path);
  REQUIRE(loaded.single.has_value());
  CHECK(loaded.mode == kDictModeSingle);
  CHECK(loaded.single->atoms() == single.atoms());
}

TEST_CASE("CDL1 rejects any single corrupted byte via the CRC") {
  const CoupledDictionary dict = random_pair(6, 4, 13, true);
  auto bytes = serialize_dictionary(dict);
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 50; ++trial) {
    auto corrupted = bytes;
    const std::size_t pos = rng() % corrupted.size();
    corrupted[pos] ^= static_cast<std::uint8_t>(1 + rng() % 255);
    CHECK_THROWS_AS(parse_dictionary(corrupted), Error);
  }
}

TEST_CASE("CDL1 rejects structural problems") {
  CHECK_THROWS_AS(parse_dictionary({}), Error);
  CHECK_THROWS_AS(parse_dictionary({'C', 'D', 'L', '1', 0, 0}), Error);

  // bad magic with a fixed-up CRC still fails
  const CoupledDictionary dict = random_pair(3, 2, 15, true);
  auto bytes = serialize_dictionary(dict);
  bytes[0] = 'X';
  const std::uint32_t fixed = crc32(bytes.data(), bytes.size() - 4);
  bytes[bytes.size() - 4] = static_cast<std::uint8_t>(fixed & 0xFF);
  bytes[bytes.size() - 3] = static_cast<std::uint8_t>((fixed >> 8) & 0xFF);
  bytes[bytes.size() - 2] = static_cast<std::uint8_t>((fixed >> 16) & 0xFF);
  bytes[bytes.size() - 1] = static_cast<std::uint8_t>((fixed >> 24) & 0xFF);
  CHECK_THROWS_AS(parse_dictionary(bytes), Error);
}

TEST_CASE("CDL1 rejects non-unit columns on load") {
  const CoupledDictionary dict = random_pair(4, 2, 16, true);
  auto bytes = serialize_dictionary(dict);
  // scale the first stored value hard enough to break the unit norm
  double v;
  std::memcpy(&v, bytes.data() + 16, 8);
  v *= 2.0;
  std::memcpy(bytes.data() + 16, &v, 8);
  const std::uint32_t fixed = crc32(bytes.data(), bytes.size() - 4);
  bytes[bytes.size() - 4] = static_cast<std::uint8_t>(fixed & 0xFF);
  bytes[bytes.size() - 3] = static_cast<std::uint8_t>((fixed >> 8) & 0xFF);
  bytes[bytes.size() - 2] = static_cast<std::uint8_t>((fixed >> 16) & 0xFF);
  bytes[bytes.size() - 1] = static_cast<std::uint8_t>((fixed >> 24) & 0xFF);
  CHECK_THROWS_AS(parse_dictionary(bytes), Error);
}

TEST_CASE("loading a missing dictionary file is an io error") {
  try {
    load_dictionary("/nonexistent/dictionary.cdl1");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::io);
  }
}
