#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>

#include <json.hpp>

#include "ilcite/embedding.hpp"
#include "ilcite/recommender.hpp"

namespace ilcite {

enum class EmbeddingMode { Disabled, Http, Cache };

const char* to_string(EmbeddingMode mode);

struct AppConfig {
  std::string db_path;
  Bm25Params bm25;
  std::size_t per_scorer_cutoff = 50;
  std::size_t length_threshold_tokens = 50;
  RankingStrategy strategy = RankingStrategy::Conditional;
  FusionMethod fusion = FusionMethod::RankSum;
  bool lexical_fallback = true;
  EmbeddingMode embedding_mode = EmbeddingMode::Disabled;
  std::string embedding_url;
  std::string embedding_cache_path;
  std::size_t embedding_max_in_flight = 4;
  std::size_t default_k = 10;
  std::string host = "127.0.0.1";
  int port = 8080;

  // Applies one `key = value` setting. Throws std::invalid_argument on an
  // unknown key or unparsable value.
  void set(const std::string& key, const std::string& value);
  void validate() const;

  RecommenderConfig recommender() const;
};

// Key-value text: `key = value` per line, `#` starts a comment.
AppConfig parse_config(std::istream& in, AppConfig base = {});
AppConfig load_config_file(const std::filesystem::path& path, AppConfig base = {});

// Reads the file named by ILCDB_CONFIG when set, otherwise returns defaults.
AppConfig config_from_environment();

nlohmann::json to_json(const AppConfig& config);

// nullptr for EmbeddingMode::Disabled.
std::unique_ptr<EmbeddingProvider> make_embedding_provider(const AppConfig& config);

}  // namespace ilcite
