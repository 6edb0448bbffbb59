#include "ilcite/text.hpp"

#include <openssl/sha.h>

#include <algorithm>
#include <cctype>

namespace ilcite {
namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

bool is_ascii_punct(char c) {
  const auto u = static_cast<unsigned char>(c);
  return u < 0x80 && std::ispunct(u) != 0;
}

char to_lower(char c) {
  const auto u = static_cast<unsigned char>(c);
  return u < 0x80 ? static_cast<char>(std::tolower(u)) : c;
}

bool attaches_left(std::string_view tok) {
  static constexpr std::string_view kClosers[] = {",", ".", ";", ":", "!", "?", ")", "]", "}", "%", "'s", "n't"};
  return std::find(std::begin(kClosers), std::end(kClosers), tok) != std::end(kClosers);
}

bool attaches_right(std::string_view tok) { return tok == "(" || tok == "[" || tok == "{"; }

}  // namespace

std::string normalize_span(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char c : text) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(to_lower(c));
  }
  return out;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char c : text) {
    if (is_space(c) || is_ascii_punct(c)) {
      if (!current.empty()) tokens.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(to_lower(c));
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

bool is_punctuation(std::string_view token) {
  return !token.empty() && std::all_of(token.begin(), token.end(), is_ascii_punct);
}

std::string detokenize(std::span<const std::string> tokens) {
  std::string out;
  bool glue_next = true;
  for (const auto& tok : tokens) {
    if (tok.empty()) continue;
    if (!glue_next && !attaches_left(tok)) out.push_back(' ');
    out += tok;
    glue_next = attaches_right(tok);
  }
  return out;
}

std::string trim_span(std::string_view text) {
  auto strip = [](char c) { return is_space(c) || is_ascii_punct(c); };
  std::size_t begin = 0;
  std::size_t end = text.size();
  while (begin < end && strip(text[begin])) ++begin;
  while (end > begin && strip(text[end - 1])) --end;
  return std::string(text.substr(begin, end - begin));
}

Sha256Digest sha256(std::string_view bytes) {
  Sha256Digest digest{};
  SHA256(reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size(), digest.data());
  return digest;
}

std::string to_hex(std::span<const std::uint8_t> bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (auto b : bytes) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0x0f]);
  }
  return out;
}

std::string sha256_hex(std::string_view bytes) {
  const auto digest = sha256(bytes);
  return to_hex(digest);
}

}  // namespace ilcite
