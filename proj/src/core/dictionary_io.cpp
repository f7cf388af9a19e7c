#include "core/dictionary_io.hpp"

#include <array>
#include <cmath>
#include <cstring>
#include <fstream>

#include "core/image_io.hpp"  // write_file_atomic

namespace mfusion {

namespace {

constexpr double kLoadNormTolerance = 1e-6;

std::array<std::uint32_t, 256> make_crc_table() {
  std::array<std::uint32_t, 256> table{};
  for (std::uint32_t n = 0; n < 256; ++n) {
    std::uint32_t c = n;
    for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
    table[n] = c;
  }
  return table;
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xFF));
  out.push_back(static_cast<std::uint8_t>((v >> 16) & 0xFF));
  out.push_back(static_cast<std::uint8_t>((v >> 24) & 0xFF));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
         static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

void put_f64(std::vector<std::uint8_t>& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof(bits));
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>((bits >> (8 * i)) & 0xFF));
}

double get_f64(const std::uint8_t* p) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  double v;
  std::memcpy(&v, &bits, sizeof(v));
  return v;
}

void append_matrix(std::vector<std::uint8_t>& out, const Eigen::MatrixXd& m) {
  for (int c = 0; c < m.cols(); ++c) {
    for (int r = 0; r < m.rows(); ++r) put_f64(out, m(r, c));
  }
}

std::vector<std::uint8_t> serialize(std::uint8_t mode, const Eigen::MatrixXd& focused,
                                    const Eigen::MatrixXd* blurred) {
  std::vector<std::uint8_t> out;
  const std::size_t matrices = blurred ? 2 : 1;
  out.reserve(16 + matrices * static_cast<std::size_t>(focused.size()) * 8 + 4);
  out.insert(out.end(), {'C', 'D', 'L', '1'});
  put_u32(out, static_cast<std::uint32_t>(focused.rows()));
  put_u32(out, static_cast<std::uint32_t>(focused.cols()));
  out.push_back(mode);
  out.insert(out.end(), {0, 0, 0});
  append_matrix(out, focused);
  if (blurred) append_matrix(out, *blurred);
  put_u32(out, crc32(out.data(), out.size()));
  return out;
}

Eigen::MatrixXd read_matrix(const std::uint8_t* p, int rows, int cols) {
  Eigen::MatrixXd m(rows, cols);
  std::size_t off = 0;
  for (int c = 0; c < cols; ++c) {
    for (int r = 0; r < rows; ++r) {
      m(r, c) = get_f64(p + off);
      off += 8;
    }
  }
  return m;
}

void check_columns(const Eigen::MatrixXd& m, const char* which) {
  require(m.allFinite(), Errc::format, std::string("dictionary file: non-finite ") + which + " values");
  for (int j = 0; j < m.cols(); ++j) {
    require(std::abs(m.col(j).norm() - 1.0) <= kLoadNormTolerance, Errc::format,
            std::string("dictionary file: ") + which + " column " + std::to_string(j) +
                " is not unit norm");
  }
}

}  // namespace

std::uint32_t crc32(const std::uint8_t* data, std::size_t size) {
  static const auto table = make_crc_table();
  std::uint32_t c = 0xFFFFFFFFu;
  for (std::size_t i = 0; i < size; ++i) c = table[(c ^ data[i]) & 0xFF] ^ (c >> 8);
  return c ^ 0xFFFFFFFFu;
}

std::vector<std::uint8_t> serialize_dictionary(const CoupledDictionary& dict) {
  dict.validate();
  const Eigen::MatrixXd& blurred = dict.blurred.atoms();
  return serialize(dict.paired ? kDictModeCoupled : kDictModeSeparate, dict.focused.atoms(),
                   &blurred);
}

std::vector<std::uint8_t> serialize_dictionary(const Dictionary& single) {
  return serialize(kDictModeSingle, single.atoms(), nullptr);
}

DictionaryFile parse_dictionary(const std::vector<std::uint8_t>& bytes) {
  require(bytes.size() >= 20, Errc::format, "dictionary file: too short");
  require(std::memcmp(bytes.data(), "CDL1", 4) == 0, Errc::format,
          "dictionary file: bad magic");

  const std::uint32_t stored_crc = get_u32(bytes.data() + bytes.size() - 4);
  require(crc32(bytes.data(), bytes.size() - 4) == stored_crc, Errc::format,
          "dictionary file: CRC mismatch");

  const std::uint32_t dim = get_u32(bytes.data() + 4);
  const std::uint32_t atoms = get_u32(bytes.data() + 8);
  const std::uint8_t mode = bytes[12];
  require(bytes[13] == 0 && bytes[14] == 0 && bytes[15] == 0, Errc::format,
          "dictionary file: reserved bytes must be zero");
  require(dim >= 1 && atoms >= 1, Errc::format, "dictionary file: empty dictionary");
  require(mode <= kDictModeSingle, Errc::format, "dictionary file: unknown mode");

  const std::size_t matrix_bytes = static_cast<std::size_t>(dim) * atoms * 8;
  const std::size_t matrices = mode == kDictModeSingle ? 1 : 2;
  require(bytes.size() == 16 + matrices * matrix_bytes + 4, Errc::format,
          "dictionary file: size does not match header");

  DictionaryFile out;
  out.mode = mode;
  Eigen::MatrixXd focused = read_matrix(bytes.data() + 16, dim, atoms);
  check_columns(focused, "focused");
  if (mode == kDictModeSingle) {
    out.single = Dictionary(std::move(focused), DictLabel::single, kLoadNormTolerance);
    return out;
  }
  Eigen::MatrixXd blurred = read_matrix(bytes.data() + 16 + matrix_bytes, dim, atoms);
  check_columns(blurred, "blurred");
  CoupledDictionary pair;
  pair.focused = Dictionary(std::move(focused), DictLabel::focused, kLoadNormTolerance);
  pair.blurred = Dictionary(std::move(blurred), DictLabel::blurred, kLoadNormTolerance);
  pair.paired = mode == kDictModeCoupled;
  out.pair = std::move(pair);
  return out;
}

void save_dictionary(const std::string& path, const CoupledDictionary& dict) {
  write_file_atomic(path, serialize_dictionary(dict));
}

void save_dictionary(const std::string& path, const Dictionary& single) {
  write_file_atomic(path, serialize_dictionary(single));
}

DictionaryFile load_dictionary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), Errc::io, "cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  require(!in.bad(), Errc::io, "read failed for " + path);
  return parse_dictionary(bytes);
}

}  // namespace mfusion
