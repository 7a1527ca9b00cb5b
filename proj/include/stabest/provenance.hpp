#pragma once

// Cheap content hashing for provenance stamps. FNV-1a is plenty here: the
// hashes tie artifacts to the exact config and inputs that produced them,
// they are not a security boundary.

#include <cstdint>
#include <string>
#include <string_view>

namespace stabest {

std::uint64_t fnv1a64(std::string_view data);
std::string fnv1a64_hex(std::string_view data);

// Hash of a file's raw bytes; DataError if the file cannot be read.
std::string file_hash_hex(const std::string& path);

}  // namespace stabest
