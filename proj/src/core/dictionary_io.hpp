#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "core/dictionary.hpp"

namespace mfusion {

// CDL1 container: magic "CDL1", u32-LE dim, u32-LE atoms per sub-dictionary,
// u8 mode (0 coupled, 1 separate pair, 2 single), 3 reserved zero bytes,
// dim*M float64-LE column-major values for D^F, the same for D^B unless
// mode 2, then u32-LE CRC32 of all preceding bytes.

inline constexpr std::uint8_t kDictModeCoupled = 0;
inline constexpr std::uint8_t kDictModeSeparate = 1;
inline constexpr std::uint8_t kDictModeSingle = 2;

/// CRC-32 (IEEE reflected, as used by zlib/PNG).
std::uint32_t crc32(const std::uint8_t* data, std::size_t size);

struct DictionaryFile {
  std::uint8_t mode = kDictModeCoupled;
  std::optional<CoupledDictionary> pair;  // modes 0 and 1
  std::optional<Dictionary> single;       // mode 2
};

std::vector<std::uint8_t> serialize_dictionary(const CoupledDictionary& dict);
std::vector<std::uint8_t> serialize_dictionary(const Dictionary& single);
DictionaryFile parse_dictionary(const std::vector<std::uint8_t>& bytes);

void save_dictionary(const std::string& path, const CoupledDictionary& dict);
void save_dictionary(const std::string& path, const Dictionary& single);
DictionaryFile load_dictionary(const std::string& path);

}  // namespace mfusion
