#include "ilcite/embedding.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include <httplib.h>
#include <json.hpp>

namespace ilcite {
namespace {

void put_u64(std::ostream& out, std::uint64_t v) {
  char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(bytes, 8);
}

void put_f32(std::ostream& out, float f) {
  const auto v = std::bit_cast<std::uint32_t>(f);
  char bytes[4];
  for (int i = 0; i < 4; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(bytes, 4);
}

std::uint64_t get_le(const unsigned char* p, int width) {
  std::uint64_t v = 0;
  for (int i = 0; i < width; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

Sha256Digest parse_hex_key(const std::string& hex) {
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  Sha256Digest key{};
  if (hex.size() != 64) throw std::invalid_argument("embedding key must be 64 hex digits");
  for (std::size_t i = 0; i < key.size(); ++i) {
    const int hi = nibble(hex[2 * i]);
    const int lo = nibble(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) throw std::invalid_argument("embedding key is not hex");
    key[i] = static_cast<std::uint8_t>(hi * 16 + lo);
  }
  return key;
}

Embedding vector_from_json(const nlohmann::json& j) {
  const auto values = j.get<std::vector<float>>();
  return Eigen::Map<const Embedding>(values.data(), static_cast<Eigen::Index>(values.size()));
}

}  // namespace

Sha256Digest embedding_key(std::string_view text) { return sha256(normalize_span(text)); }

double semantic_score(EmbeddingProvider& provider, const std::string& query, const std::string& span) {
  const std::string texts[] = {query, span};
  const auto vectors = provider.embed(texts);
  return cosine_similarity(vectors[0].cast<double>(), vectors[1].cast<double>());
}

void EmbeddingCache::check(const Embedding& v) const {
  if (v.size() != dim_) {
    throw std::invalid_argument("embedding has " + std::to_string(v.size()) + " components, expected " +
                                std::to_string(dim_));
  }
  if (!v.allFinite()) throw std::invalid_argument("embedding has non-finite components");
}

bool EmbeddingCache::insert(const Sha256Digest& key, Embedding vector) {
  check(vector);
  return entries_.emplace(key, std::move(vector)).second;
}

const Embedding* EmbeddingCache::find(std::string_view text) const {
  const auto it = entries_.find(embedding_key(text));
  return it == entries_.end() ? nullptr : &it->second;
}

EmbeddingCache EmbeddingCache::load(const std::filesystem::path& path, Eigen::Index dim) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open embedding cache " + path.string());
  const std::string content{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  EmbeddingCache cache(dim);
  const auto first = content.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return cache;

  if (content[first] == '{') {
    std::size_t pos = 0;
    std::size_t line_no = 0;
    while (pos < content.size()) {
      auto end = content.find('\n', pos);
      if (end == std::string::npos) end = content.size();
      const std::string_view line(content.data() + pos, end - pos);
      pos = end + 1;
      ++line_no;
      if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
      try {
        const auto j = nlohmann::json::parse(line);
        const auto key = j.contains("key") ? parse_hex_key(j.at("key").get<std::string>())
                                           : embedding_key(j.at("text").get<std::string>());
        cache.insert(key, vector_from_json(j.at("vector")));
      } catch (const std::exception& e) {
        throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
      }
    }
    return cache;
  }

  const auto* bytes = reinterpret_cast<const unsigned char*>(content.data());
  if (content.size() < 8) throw std::runtime_error("embedding cache too short: " + path.string());
  const auto count = get_le(bytes, 8);
  const std::size_t entry_bytes = 32 + 4 * static_cast<std::size_t>(dim);
  if ((content.size() - 8) != count * entry_bytes) {
    throw std::runtime_error("embedding cache size does not match its entry count: " + path.string());
  }
  std::size_t offset = 8;
  for (std::uint64_t e = 0; e < count; ++e) {
    Sha256Digest key{};
    std::memcpy(key.data(), bytes + offset, key.size());
    offset += key.size();
    Embedding v(dim);
    for (Eigen::Index i = 0; i < dim; ++i, offset += 4) {
      v[i] = std::bit_cast<float>(static_cast<std::uint32_t>(get_le(bytes + offset, 4)));
    }
    cache.insert(key, std::move(v));
  }
  return cache;
}

void EmbeddingCache::save_jsonl(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (const auto& [key, v] : entries_) {
    nlohmann::json j{{"key", to_hex(key)}, {"vector", std::vector<float>(v.data(), v.data() + v.size())}};
    out << j.dump() << '\n';
  }
}

void EmbeddingCache::save_binary(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  put_u64(out, entries_.size());
  for (const auto& [key, v] : entries_) {
    out.write(reinterpret_cast<const char*>(key.data()), static_cast<std::streamsize>(key.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) put_f32(out, v[i]);
  }
}

std::vector<Embedding> CachedEmbeddingProvider::embed(std::span<const std::string> texts) {
  std::vector<Embedding> out;
  out.reserve(texts.size());
  for (const auto& t : texts) {
    const auto* v = cache_.find(t);
    if (!v) throw EmbeddingUnavailable("no cached embedding for \"" + t + "\"");
    out.push_back(*v);
  }
  return out;
}

HttpEmbeddingProvider::HttpEmbeddingProvider(std::string base_url, std::ptrdiff_t max_in_flight,
                                             Eigen::Index dim, int timeout_seconds)
    : base_url_(std::move(base_url)),
      dim_(dim),
      timeout_seconds_(timeout_seconds),
      in_flight_(std::clamp<std::ptrdiff_t>(max_in_flight, 1, 1024)) {}

std::vector<Embedding> HttpEmbeddingProvider::embed(std::span<const std::string> texts) {
  if (texts.empty()) return {};
  in_flight_.acquire();
  struct Release {
    std::counting_semaphore<1024>& s;
    ~Release() { s.release(); }
  } release{in_flight_};

  httplib::Client client(base_url_);
  client.set_connection_timeout(timeout_seconds_, 0);
  client.set_read_timeout(timeout_seconds_, 0);
  const nlohmann::json body{{"texts", std::vector<std::string>(texts.begin(), texts.end())}};
  const auto res = client.Post("/embed", body.dump(), "application/json");
  if (!res) {
    throw EmbeddingUnavailable("embedding provider unreachable at " + base_url_ + ": " +
                               httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw EmbeddingUnavailable("embedding provider returned HTTP " + std::to_string(res->status));
  }
  std::vector<Embedding> out;
  try {
    const auto reply = nlohmann::json::parse(res->body);
    for (const auto& v : reply.at("vectors")) out.push_back(vector_from_json(v));
  } catch (const std::exception& e) {
    throw EmbeddingUnavailable(std::string("malformed embedding response: ") + e.what());
  }
  if (out.size() != texts.size()) throw EmbeddingUnavailable("embedding response has wrong vector count");
  for (const auto& v : out) {
    if (v.size() != dim_ || !v.allFinite()) throw EmbeddingUnavailable("embedding response has bad vector");
  }
  return out;
}

}  // namespace ilcite
