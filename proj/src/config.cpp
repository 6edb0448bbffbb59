#include "ilcite/config.hpp"

#include <cstdlib>
#include <fstream>
#include <istream>
#include <stdexcept>

namespace ilcite {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double d = 0;
  try {
    d = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size() || v.empty()) throw std::invalid_argument(key + ": not a number: " + v);
  return d;
}

std::size_t to_size(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  long long n = -1;
  try {
    n = std::stoll(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size() || v.empty() || n < 0) throw std::invalid_argument(key + ": not a non-negative integer: " + v);
  return static_cast<std::size_t>(n);
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw std::invalid_argument(key + ": not a boolean: " + v);
}

}  // namespace

const char* to_string(EmbeddingMode mode) {
  switch (mode) {
    case EmbeddingMode::Disabled: return "disabled";
    case EmbeddingMode::Http: return "http";
    case EmbeddingMode::Cache: return "cache";
  }
  return "unknown";
}

void AppConfig::set(const std::string& key, const std::string& value) {
  if (key == "db_path") db_path = value;
  else if (key == "bm25.k1") bm25.k1 = to_double(key, value);
  else if (key == "bm25.b") bm25.b = to_double(key, value);
  else if (key == "bm25.delta") bm25.delta = to_double(key, value);
  else if (key == "prefetch.per_scorer_cutoff") per_scorer_cutoff = to_size(key, value);
  else if (key == "router.length_threshold") length_threshold_tokens = to_size(key, value);
  else if (key == "router.strategy") strategy = strategy_from_string(value);
  else if (key == "router.fusion") fusion = fusion_from_string(value);
  else if (key == "router.lexical_fallback") lexical_fallback = to_bool(key, value);
  else if (key == "embedding.mode") {
    if (value == "disabled") embedding_mode = EmbeddingMode::Disabled;
    else if (value == "http") embedding_mode = EmbeddingMode::Http;
    else if (value == "cache") embedding_mode = EmbeddingMode::Cache;
    else throw std::invalid_argument("embedding.mode: expected disabled, http or cache");
  }
  else if (key == "embedding.url") embedding_url = value;
  else if (key == "embedding.cache_path") embedding_cache_path = value;
  else if (key == "embedding.max_in_flight") embedding_max_in_flight = to_size(key, value);
  else if (key == "default_k") default_k = to_size(key, value);
  else if (key == "service.host") host = value;
  else if (key == "service.port") port = static_cast<int>(to_size(key, value));
  else throw std::invalid_argument("unknown config key: " + key);
}

void AppConfig::validate() const {
  bm25.validate();
  if (per_scorer_cutoff == 0) throw std::invalid_argument("prefetch.per_scorer_cutoff must be positive");
  if (length_threshold_tokens == 0) throw std::invalid_argument("router.length_threshold must be positive");
  if (embedding_max_in_flight == 0) throw std::invalid_argument("embedding.max_in_flight must be positive");
  if (embedding_mode == EmbeddingMode::Http && embedding_url.empty()) {
    throw std::invalid_argument("embedding.mode=http needs embedding.url");
  }
  if (embedding_mode == EmbeddingMode::Cache && embedding_cache_path.empty()) {
    throw std::invalid_argument("embedding.mode=cache needs embedding.cache_path");
  }
  if (port < 0 || port > 65535) throw std::invalid_argument("service.port out of range");
}

RecommenderConfig AppConfig::recommender() const {
  RecommenderConfig rc;
  rc.prefetch.bm25 = bm25;
  rc.prefetch.per_scorer_cutoff = per_scorer_cutoff;
  rc.router.length_threshold_tokens = length_threshold_tokens;
  rc.router.strategy = strategy;
  rc.router.fusion = fusion;
  rc.router.lexical_fallback = lexical_fallback;
  return rc;
}

AppConfig parse_config(std::istream& in, AppConfig base) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": expected key = value");
    }
    base.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return base;
}

AppConfig load_config_file(const std::filesystem::path& path, AppConfig base) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path.string());
  return parse_config(in, std::move(base));
}

AppConfig config_from_environment() {
  if (const char* path = std::getenv("ILCDB_CONFIG"); path && *path) return load_config_file(path);
  return {};
}

nlohmann::json to_json(const AppConfig& c) {
  return {{"db_path", c.db_path},
          {"bm25", {{"k1", c.bm25.k1}, {"b", c.bm25.b}, {"delta", c.bm25.delta}}},
          {"prefetch", {{"per_scorer_cutoff", c.per_scorer_cutoff}}},
          {"router",
           {{"length_threshold", c.length_threshold_tokens},
            {"strategy", to_string(c.strategy)},
            {"fusion", to_string(c.fusion)},
            {"lexical_fallback", c.lexical_fallback}}},
          {"embedding",
           {{"mode", to_string(c.embedding_mode)},
            {"url", c.embedding_url},
            {"cache_path", c.embedding_cache_path},
            {"max_in_flight", c.embedding_max_in_flight}}},
          {"default_k", c.default_k},
          {"service", {{"host", c.host}, {"port", c.port}}}};
}

std::unique_ptr<EmbeddingProvider> make_embedding_provider(const AppConfig& config) {
  switch (config.embedding_mode) {
    case EmbeddingMode::Disabled: return nullptr;
    case EmbeddingMode::Http:
      return std::make_unique<HttpEmbeddingProvider>(
          config.embedding_url, static_cast<std::ptrdiff_t>(config.embedding_max_in_flight));
    case EmbeddingMode::Cache:
      return std::make_unique<CachedEmbeddingProvider>(EmbeddingCache::load(config.embedding_cache_path));
  }
  return nullptr;
}

}  // namespace ilcite
