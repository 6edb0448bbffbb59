#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ilcite {

// Lowercase (ASCII), collapse internal whitespace runs to one space, strip.
// This is the conflation key for evidence spans and embedding-cache entries.
std::string normalize_span(std::string_view text);

// Lowercased tokens, split on whitespace and ASCII punctuation. Bytes >= 0x80
// are treated as word characters so UTF-8 sequences stay intact.
std::vector<std::string> tokenize(std::string_view text);

// True when every byte of the token is ASCII punctuation.
bool is_punctuation(std::string_view token);

// Joins parser tokens back into readable text: no space before closing
// punctuation, none after opening brackets.
std::string detokenize(std::span<const std::string> tokens);

// Strip leading/trailing whitespace and punctuation, keep the interior verbatim.
std::string trim_span(std::string_view text);

using Sha256Digest = std::array<std::uint8_t, 32>;

Sha256Digest sha256(std::string_view bytes);
std::string to_hex(std::span<const std::uint8_t> bytes);
std::string sha256_hex(std::string_view bytes);

}  // namespace ilcite
