#pragma once

#include <memory>
#include <string>

#include "ilcite/config.hpp"
#include "ilcite/evidence_db.hpp"

namespace ilcite {

struct ServiceResponse {
  int status = 200;
  std::string body;  // JSON
};

// Request handlers over an immutable database. Transport-independent so the
// CLI and the HTTP server share one code path.
class RecommendationService {
 public:
  RecommendationService(AppConfig config, EvidenceDatabase db, std::unique_ptr<EmbeddingProvider> provider);
  ~RecommendationService();

  ServiceResponse health() const;
  ServiceResponse recommend(const std::string& request_body) const;
  ServiceResponse evidence(const std::string& span_id) const;
  ServiceResponse config() const;

  // Blocks serving HTTP until stop(). Returns false if the socket could not be bound.
  bool listen(const std::string& host, int port);
  // Binds an ephemeral port and returns it; serve with listen_after_bind().
  int bind_to_any_port(const std::string& host);
  bool listen_after_bind();
  void stop();
  void wait_until_ready() const;

  const EvidenceDatabase& database() const { return db_; }

 private:
  class Server;

  AppConfig config_;
  EvidenceDatabase db_;
  std::unique_ptr<EmbeddingProvider> provider_;
  std::unique_ptr<Server> server_;
};

// The JSON text both transports emit for a query.
std::string recommendation_payload(const EvidenceDatabase& db, const AppConfig& config, const std::string& query,
                                   std::size_t k, EmbeddingProvider* provider);

}  // namespace ilcite
