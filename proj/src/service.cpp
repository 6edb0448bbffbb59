#include "ilcite/service.hpp"

#include <httplib.h>
#include <spdlog/spdlog.h>

namespace ilcite {
namespace {

ServiceResponse error_response(int status, const std::string& message) {
  return {status, nlohmann::json{{"error", message}}.dump()};
}

nlohmann::json evidence_json(const EvidenceDatabase& db, const EvidenceRecord& r) {
  nlohmann::json citations = nlohmann::json::array();
  for (const auto& c : r.citations) {
    nlohmann::json paper{{"id", c.paper_id}};
    if (const auto* meta = db.paper(c.paper_id)) {
      paper = {{"id", meta->paper_id}, {"title", meta->title}, {"year", meta->year},
               {"venue", meta->venue}, {"authors", meta->authors}};
    }
    citations.push_back({{"paper", paper}, {"support", c.support}});
  }
  nlohmann::json provenance = nlohmann::json::array();
  for (const auto& p : r.provenance) {
    provenance.push_back({{"paper_id", p.paper_id}, {"sentence_index", p.sentence_index}});
  }
  return {{"span_id", r.id}, {"span_text", r.span_text}, {"surface_text", r.surface_text},
          {"citations", citations}, {"provenance", provenance}};
}

}  // namespace

std::string recommendation_payload(const EvidenceDatabase& db, const AppConfig& config, const std::string& query,
                                   std::size_t k, EmbeddingProvider* provider) {
  return to_json(recommend(db, config.recommender(), query, k, provider)).dump();
}

class RecommendationService::Server {
 public:
  httplib::Server http;
};

RecommendationService::RecommendationService(AppConfig config, EvidenceDatabase db,
                                             std::unique_ptr<EmbeddingProvider> provider)
    : config_(std::move(config)), db_(std::move(db)), provider_(std::move(provider)),
      server_(std::make_unique<Server>()) {
  config_.validate();
  auto reply = [](httplib::Response& res, const ServiceResponse& r) {
    res.status = r.status;
    res.set_content(r.body, "application/json; charset=utf-8");
  };
  auto& http = server_->http;
  http.Get("/health", [this, reply](const httplib::Request&, httplib::Response& res) { reply(res, this->health()); });
  http.Get("/config", [this, reply](const httplib::Request&, httplib::Response& res) { reply(res, this->config()); });
  http.Post("/recommend", [this, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, recommend(req.body));
  });
  http.Get(R"(/evidence/([^/]+))", [this, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, evidence(req.matches[1]));
  });
}

RecommendationService::~RecommendationService() { stop(); }

ServiceResponse RecommendationService::health() const {
  const auto& stats = db_.stats();
  return {200, nlohmann::json{{"status", "ok"},
                              {"db",
                               {{"doc_count", stats.doc_count},
                                {"papers", db_.papers().size()},
                                {"cited_papers", db_.cited_paper_count()},
                                {"avg_span_tokens", stats.avg_span_tokens}}}}
                   .dump()};
}

ServiceResponse RecommendationService::config() const { return {200, to_json(config_).dump()}; }

ServiceResponse RecommendationService::recommend(const std::string& request_body) const {
  std::string query;
  std::size_t k = config_.default_k;
  try {
    const auto j = nlohmann::json::parse(request_body);
    if (!j.is_object() || !j.contains("query") || !j.at("query").is_string()) {
      return error_response(400, "body must be an object with a string \"query\"");
    }
    query = j.at("query").get<std::string>();
    if (j.contains("k")) {
      if (!j.at("k").is_number_unsigned()) return error_response(400, "\"k\" must be a non-negative integer");
      k = j.at("k").get<std::size_t>();
    }
  } catch (const nlohmann::json::exception& e) {
    return error_response(400, std::string("malformed JSON body: ") + e.what());
  }
  try {
    return {200, recommendation_payload(db_, config_, query, k, provider_.get())};
  } catch (const EmbeddingUnavailable& e) {
    return error_response(503, e.what());
  }
}

ServiceResponse RecommendationService::evidence(const std::string& span_id) const {
  std::size_t used = 0;
  unsigned long long id = 0;
  try {
    id = std::stoull(span_id, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != span_id.size() || id >= db_.size()) {
    return error_response(404, "unknown evidence span " + span_id);
  }
  return {200, evidence_json(db_, db_.record(static_cast<SpanId>(id))).dump()};
}

bool RecommendationService::listen(const std::string& host, int port) {
  spdlog::info("serving {} evidence spans on {}:{}", db_.size(), host, port);
  return server_->http.listen(host, port);
}

int RecommendationService::bind_to_any_port(const std::string& host) { return server_->http.bind_to_any_port(host); }

bool RecommendationService::listen_after_bind() { return server_->http.listen_after_bind(); }

void RecommendationService::stop() {
  if (server_) server_->http.stop();
}

void RecommendationService::wait_until_ready() const { server_->http.wait_until_ready(); }

}  // namespace ilcite
