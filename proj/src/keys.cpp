#include "liouville/keys.hpp"

#include <stdexcept>

namespace lv::keys {

void put_int(std::string& out, std::int64_t v) {
  auto u = (static_cast<std::uint64_t>(v) << 1) ^ static_cast<std::uint64_t>(v >> 63);
  while (u >= 0x80) {
    out.push_back(static_cast<char>((u & 0x7f) | 0x80));
    u >>= 7;
  }
  out.push_back(static_cast<char>(u));
}

std::int64_t take_int(std::string_view& in) {
  std::uint64_t u = 0;
  int shift = 0;
  for (std::size_t i = 0; i < in.size(); ++i) {
    const auto byte = static_cast<std::uint8_t>(in[i]);
    if (shift > 63) break;
    u |= static_cast<std::uint64_t>(byte & 0x7f) << shift;
    if ((byte & 0x80) == 0) {
      in.remove_prefix(i + 1);
      return static_cast<std::int64_t>((u >> 1) ^ (~(u & 1) + 1));
    }
    shift += 7;
  }
  throw std::invalid_argument("malformed integer in element key");
}

std::string encode_ints(const std::vector<std::int64_t>& values) {
  std::string out;
  for (auto v : values) put_int(out, v);
  return out;
}

std::vector<std::int64_t> decode_ints(std::string_view key) {
  std::vector<std::int64_t> out;
  while (!key.empty()) out.push_back(take_int(key));
  return out;
}

std::string hex(std::string_view key) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out;
  out.reserve(key.size() * 2);
  for (char c : key) {
    const auto b = static_cast<std::uint8_t>(c);
    out.push_back(digits[b >> 4]);
    out.push_back(digits[b & 0xf]);
  }
  return out;
}

}  // namespace lv::keys
