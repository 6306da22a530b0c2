#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace qguard {

// 64-bit FNV-1a. Used for probe digests and deterministic mock noise; not a
// cryptographic hash. The digest algorithm is part of the cache file contract.
std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 14695981039346656037ULL);
std::string to_hex64(std::uint64_t value);

std::string base64_encode(const std::uint8_t* data, std::size_t len);
std::string base64_encode(const std::vector<std::uint8_t>& data);
std::vector<std::uint8_t> base64_decode(std::string_view encoded);  // throws Error(Parse)

// Shortest round-trip decimal form, locale-independent. All text exports use
// this so identical doubles always serialize to identical bytes.
std::string format_double(double value);

std::string to_lower(std::string_view s);

std::string read_file(const std::string& path);                       // throws Error(Io)
void write_file(const std::string& path, std::string_view contents);  // throws Error(Io)

// Deterministic uniform in [-1, 1] derived from hashing the parts together.
double hash_uniform(std::string_view a, std::string_view b, std::uint64_t seed);

}  // namespace qguard
