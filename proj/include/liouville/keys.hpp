#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

// Byte-level helpers for canonical element keys. Integers are stored as
// zigzag varints, which keeps small coordinates inside the short-string
// buffer and gives every integer exactly one encoding.

namespace lv::keys {

void put_int(std::string& out, std::int64_t v);

/// Reads one integer and advances `in`. Throws std::invalid_argument on a
/// truncated or overlong encoding.
std::int64_t take_int(std::string_view& in);

std::string encode_ints(const std::vector<std::int64_t>& values);
std::vector<std::int64_t> decode_ints(std::string_view key);

/// Lowercase hex dump, used when a key has no readable form.
std::string hex(std::string_view key);

}  // namespace lv::keys
