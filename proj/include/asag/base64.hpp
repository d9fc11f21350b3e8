#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace asag {

std::string base64_encode(const void* data, std::size_t len);
std::vector<std::uint8_t> base64_decode(std::string_view text);

std::string pack_f64(const std::vector<double>& values);
std::vector<double> unpack_f64(std::string_view b64, std::size_t expected_count);

std::string pack_i32(const std::vector<std::int32_t>& values);
std::vector<std::int32_t> unpack_i32(std::string_view b64, std::size_t expected_count);

// FNV-1a 64-bit, used for content fingerprints and file checksums.
class Fnv1a {
public:
  void update(std::string_view bytes) {
    for (unsigned char c : bytes) {
      hash_ ^= c;
      hash_ *= 0x100000001B3ULL;
    }
  }
  std::uint64_t value() const { return hash_; }
  std::string hex() const;

private:
  std::uint64_t hash_ = 0xCBF29CE484222325ULL;
};

std::string fnv1a_hex(std::string_view bytes);

}  // namespace asag
