// Command-line front end: extract, build-db, recommend, evaluate, serve.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "ilcite/config.hpp"
#include "ilcite/eval.hpp"
#include "ilcite/evidence_db.hpp"
#include "ilcite/service.hpp"
#include "ilcite/span_extractor.hpp"

namespace {

constexpr int kUsageError = 1;
constexpr int kDataError = 2;

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path);
  return in;
}

struct CommonOptions {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string db_path;
  std::string ablate;
  std::string embedding_cache;
  std::string embedding_url;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config_path, "key = value config file (default: $ILCDB_CONFIG)");
  cmd->add_option("--set", o.overrides, "override a config key, key=value");
  cmd->add_option("--db", o.db_path, "evidence database file");
  cmd->add_option("--ablate", o.ablate, "ranking strategy")
      ->check(CLI::IsMember({"okapi", "plus", "semantic", "lexical-ensemble", "okapi-semantic", "plus-semantic",
                             "naive-ensemble", "conditional"}));
  cmd->add_option("--embedding-cache", o.embedding_cache, "embedding cache file (JSONL or binary)");
  cmd->add_option("--embedding-url", o.embedding_url, "embedding provider base URL");
}

ilcite::AppConfig resolve_config(const CommonOptions& o) {
  ilcite::AppConfig config =
      o.config_path.empty() ? ilcite::config_from_environment() : ilcite::load_config_file(o.config_path);
  for (const auto& kv : o.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("--set expects key=value, got " + kv);
    config.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (!o.db_path.empty()) config.db_path = o.db_path;
  if (!o.ablate.empty()) config.strategy = ilcite::strategy_from_string(o.ablate);
  if (!o.embedding_cache.empty()) {
    config.embedding_mode = ilcite::EmbeddingMode::Cache;
    config.embedding_cache_path = o.embedding_cache;
  }
  if (!o.embedding_url.empty()) {
    config.embedding_mode = ilcite::EmbeddingMode::Http;
    config.embedding_url = o.embedding_url;
  }
  config.validate();
  if (config.db_path.empty()) throw std::invalid_argument("no database given (--db or db_path)");
  return config;
}

ilcite::EvidenceDatabase load_db(const ilcite::AppConfig& config) {
  try {
    return ilcite::load_database(std::filesystem::path(config.db_path));
  } catch (const ilcite::DatabaseLoadError& e) {
    throw DataError(config.db_path + ": " + e.what());
  }
}

std::unique_ptr<ilcite::EmbeddingProvider> provider_for(const ilcite::AppConfig& config) {
  try {
    return ilcite::make_embedding_provider(config);
  } catch (const std::exception& e) {
    throw DataError(e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  // stdout carries JSON payloads and span streams; diagnostics go to stderr.
  spdlog::set_default_logger(spdlog::stderr_color_mt("ilcite"));
  CLI::App app{"Evidence-grounded local citation recommendation"};
  app.require_subcommand(1);

  std::string sentences_path, spans_path, papers_path, out_path;
  auto* extract_cmd = app.add_subcommand("extract", "extract evidence spans from parsed sentences");
  extract_cmd->add_option("--sentences", sentences_path, "parsed-sentence file")->required();
  extract_cmd->add_option("--out", out_path, "span output file (default: stdout)");

  auto* build_cmd = app.add_subcommand("build-db", "build an evidence database");
  auto* sentences_opt = build_cmd->add_option("--sentences", sentences_path, "parsed-sentence file");
  build_cmd->add_option("--spans", spans_path, "pre-extracted span file")->excludes(sentences_opt);
  build_cmd->add_option("--papers", papers_path, "paper metadata file")->required();
  build_cmd->add_option("--out", out_path, "database output file")->required();

  CommonOptions rec_opts;
  std::string query;
  std::optional<std::size_t> k;
  bool json = false;
  auto* rec_cmd = app.add_subcommand("recommend", "recommend citations for a query");
  add_common(rec_cmd, rec_opts);
  rec_cmd->add_option("--query,-q", query, "query text")->required();
  rec_cmd->add_option("--k,-k", k, "number of recommendations");
  rec_cmd->add_flag("--json", json, "emit the JSON payload");

  CommonOptions eval_opts;
  std::string eval_path;
  bool eval_json = false;
  bool eval_filter = false;
  auto* eval_cmd = app.add_subcommand("evaluate", "MRR and Recall@N over an evaluation set");
  add_common(eval_cmd, eval_opts);
  eval_cmd->add_option("--eval", eval_path, "evaluation set file")->required();
  eval_cmd->add_flag("--json", eval_json, "emit the machine-readable report");
  eval_cmd->add_flag("--filter", eval_filter, "drop datapoints whose ground truth is absent from the database");

  CommonOptions serve_opts;
  std::optional<std::string> host;
  std::optional<int> port;
  auto* serve_cmd = app.add_subcommand("serve", "run the HTTP service");
  add_common(serve_cmd, serve_opts);
  serve_cmd->add_option("--host", host, "bind address");
  serve_cmd->add_option("--port", port, "bind port");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kUsageError;
  }

  try {
    if (*extract_cmd) {
      auto in = open_input(sentences_path);
      const auto result = ilcite::extract_stream(in);
      std::ofstream file;
      if (!out_path.empty()) {
        file.open(out_path);
        if (!file) throw DataError("cannot write " + out_path);
      }
      std::ostream& out = out_path.empty() ? std::cout : file;
      for (const auto& s : result.spans) out << ilcite::to_json(s).dump() << '\n';
      std::cerr << "sentences " << result.sentences_read << ", skipped " << result.sentences_skipped
                << ", spans " << result.spans.size() << '\n';
      return 0;
    }

    if (*build_cmd) {
      if (sentences_path.empty() && spans_path.empty()) throw std::invalid_argument("need --sentences or --spans");
      auto papers_in = open_input(papers_path);
      const auto papers = ilcite::read_papers(papers_in);
      std::vector<ilcite::SpanOccurrence> spans;
      std::size_t skipped = 0;
      if (!sentences_path.empty()) {
        auto in = open_input(sentences_path);
        auto result = ilcite::extract_stream(in);
        spans = std::move(result.spans);
        skipped = result.sentences_skipped;
      } else {
        auto in = open_input(spans_path);
        spans = ilcite::read_span_occurrences(in);
      }
      ilcite::BuildReport report;
      const auto db = ilcite::EvidenceDatabase::build(spans, papers, &report);
      if (db.empty()) spdlog::warn("no evidence spans; writing an empty database");
      ilcite::save_database(db, std::filesystem::path(out_path));
      char avg[32];
      std::snprintf(avg, sizeof avg, "%.2f", db.stats().avg_span_tokens);
      std::cout << "span occurrences  " << report.occurrences << '\n'
                << "unique spans      " << db.size() << '\n'
                << "cited papers      " << db.cited_paper_count() << '\n'
                << "avg #tokens       " << avg << '\n'
                << "dropped citations " << report.citations_dropped << '\n'
                << "skipped sentences " << skipped << '\n';
      return 0;
    }

    if (*rec_cmd) {
      const auto config = resolve_config(rec_opts);
      const auto db = load_db(config);
      const auto provider = provider_for(config);
      const auto n = k.value_or(config.default_k);
      if (json) {
        std::cout << ilcite::recommendation_payload(db, config, query, n, provider.get()) << '\n';
        return 0;
      }
      const auto result = ilcite::recommend(db, config.recommender(), query, n, provider.get());
      std::cout << "route: " << ilcite::to_string(result.route) << ", candidates: " << result.candidates << '\n';
      for (const auto& r : result.results) {
        std::cout << r.rank << ". " << (r.paper.title.empty() ? r.paper.paper_id : r.paper.title);
        if (r.paper.year != ilcite::kUnknownYear) std::cout << " (" << r.paper.year << ")";
        std::cout << "  [p_r=" << r.best_rank << " p_s=" << r.total_support << "]\n"
                  << "   evidence: \"" << r.evidence << "\"\n";
      }
      return 0;
    }

    if (*eval_cmd) {
      const auto config = resolve_config(eval_opts);
      const auto db = load_db(config);
      const auto provider = provider_for(config);
      auto in = open_input(eval_path);
      auto eval_set = ilcite::read_eval_set(in);
      if (eval_filter) eval_set = ilcite::filter_eval_candidates(eval_set, db);
      if (eval_set.empty()) throw DataError("evaluation set is empty");
      const auto report = ilcite::evaluate(db, config.recommender(), eval_set, provider.get());
      if (eval_json) {
        std::cout << ilcite::to_json(report).dump() << '\n';
      } else {
        std::cout << "strategy " << ilcite::to_string(config.strategy) << '\n' << ilcite::format_report(report);
      }
      return 0;
    }

    if (*serve_cmd) {
      auto config = resolve_config(serve_opts);
      if (host) config.host = *host;
      if (port) config.port = *port;
      auto db = load_db(config);
      auto provider = provider_for(config);
      const auto bind_host = config.host;
      const auto bind_port = config.port;
      ilcite::RecommendationService service(std::move(config), std::move(db), std::move(provider));
      if (!service.listen(bind_host, bind_port)) throw DataError("cannot bind " + bind_host);
      return 0;
    }
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const ilcite::DatabaseLoadError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const ilcite::EmbeddingUnavailable& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDataError;
  }
  return 0;
}
