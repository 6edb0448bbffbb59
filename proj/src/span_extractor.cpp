#include "ilcite/span_extractor.hpp"

#include <algorithm>
#include <cctype>
#include <istream>
#include <set>
#include <utility>

#include <spdlog/spdlog.h>

#include "ilcite/text.hpp"

namespace ilcite {
namespace {

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

bool is_marker(const Token& t) { return t.kind != TokenKind::Word; }

bool contains(const std::vector<std::string>& set, std::string_view value) {
  return std::find(set.begin(), set.end(), value) != set.end();
}

std::string closing_bracket_for(std::string_view open) {
  if (open == "[") return "]";
  if (open == "(") return ")";
  return {};
}

std::string refgroup_text(std::size_t index) { return "REFGROUP_" + std::to_string(index); }

std::string words_text(const std::vector<Token>& tokens, std::size_t begin, std::size_t end) {
  std::vector<std::string> words;
  for (std::size_t i = begin; i < end; ++i) {
    if (tokens[i].kind == TokenKind::Word) words.push_back(tokens[i].text);
  }
  return trim_span(detokenize(words));
}

}  // namespace

const char* to_string(ExtractionRule rule) {
  switch (rule) {
    case ExtractionRule::DepTraversal: return "DEP_TRAVERSAL";
    case ExtractionRule::TokenSplit: return "TOKEN_SPLIT";
    case ExtractionRule::FullSentence: return "FULL_SENTENCE";
  }
  return "UNKNOWN";
}

ExtractionRule rule_from_string(const std::string& name) {
  if (name == "DEP_TRAVERSAL") return ExtractionRule::DepTraversal;
  if (name == "TOKEN_SPLIT") return ExtractionRule::TokenSplit;
  if (name == "FULL_SENTENCE") return ExtractionRule::FullSentence;
  throw std::invalid_argument("unknown extraction rule: " + name);
}

void validate(const ParsedSentence& sentence) {
  const auto n = sentence.tokens.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& head = sentence.tokens[i].head;
    if (head && *head >= n) {
      throw MalformedSentence("token " + std::to_string(i) + " has out-of-range head " +
                              std::to_string(*head));
    }
  }
  // Every chain of heads must reach a root within n steps.
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t curr = i;
    std::size_t steps = 0;
    while (sentence.tokens[curr].head) {
      curr = *sentence.tokens[curr].head;
      if (++steps > n) throw MalformedSentence("dependency cycle through token " + std::to_string(i));
    }
  }
  for (const auto& group : sentence.refgroups) {
    if (group.position >= n || !is_marker(sentence.tokens[group.position])) {
      throw MalformedSentence("refgroup position " + std::to_string(group.position) +
                              " is not a citation token");
    }
    if (group.cited_paper_ids.empty()) throw MalformedSentence("refgroup without cited papers");
  }
}

ParsedSentence group_refs(const ParsedSentence& sentence, const ExtractorConfig& config) {
  validate(sentence);
  const auto& tokens = sentence.tokens;
  const auto n = tokens.size();
  if (std::none_of(tokens.begin(), tokens.end(), is_marker)) {
    throw std::invalid_argument("group_refs: sentence has no citation markers");
  }

  std::vector<std::vector<std::string>> ids_at(n);
  for (const auto& ref : sentence.refgroups) {
    auto& ids = ids_at[ref.position];
    ids.insert(ids.end(), ref.cited_paper_ids.begin(), ref.cited_paper_ids.end());
  }

  // Runs as inclusive [lo, hi] ranges in token order.
  std::vector<std::pair<std::size_t, std::size_t>> runs;
  for (std::size_t i = 0; i < n;) {
    if (!is_marker(tokens[i])) {
      ++i;
      continue;
    }
    std::size_t last = i;
    std::size_t k = i + 1;
    while (k < n) {
      if (is_marker(tokens[k])) {
        last = k++;
        continue;
      }
      std::size_t t = k;
      while (t < n && contains(config.ref_separators, tokens[t].text)) ++t;
      if (t == k || t >= n || !is_marker(tokens[t])) break;
      k = t;
    }
    std::size_t lo = i;
    std::size_t hi = last;
    if (lo > 0 && hi + 1 < n) {
      const auto closer = closing_bracket_for(tokens[lo - 1].text);
      if (!closer.empty() && tokens[hi + 1].text == closer) {
        --lo;
        ++hi;
      }
    }
    runs.emplace_back(lo, hi);
    i = hi + 1;
  }

  std::vector<std::size_t> new_index(n);
  std::vector<std::optional<std::size_t>> run_of(n);
  std::size_t next = 0;
  std::size_t r = 0;
  for (std::size_t i = 0; i < n;) {
    if (r < runs.size() && runs[r].first == i) {
      for (std::size_t j = runs[r].first; j <= runs[r].second; ++j) {
        new_index[j] = next;
        run_of[j] = r;
      }
      i = runs[r].second + 1;
      ++r;
    } else {
      new_index[i] = next;
      ++i;
    }
    ++next;
  }

  ParsedSentence out;
  out.paper_id = sentence.paper_id;
  out.sentence_index = sentence.sentence_index;
  out.tokens.reserve(next);
  r = 0;
  for (std::size_t i = 0; i < n;) {
    if (r < runs.size() && runs[r].first == i) {
      const auto [lo, hi] = runs[r];
      Token group;
      group.kind = TokenKind::RefGroup;
      group.text = refgroup_text(r);
      // The group inherits the attachment of the first marker whose head
      // leaves the run; a run holding the root stays the root.
      std::optional<std::size_t> exit_member;
      for (std::size_t j = lo; j <= hi; ++j) {
        const auto& h = tokens[j].head;
        const bool leaves = !h || run_of[*h] != run_of[j];
        if (leaves && (!exit_member || (is_marker(tokens[j]) && !is_marker(tokens[*exit_member])))) {
          exit_member = j;
        }
      }
      if (exit_member && tokens[*exit_member].head) {
        group.head = new_index[*tokens[*exit_member].head];
        group.label = tokens[*exit_member].label;
      } else if (exit_member) {
        group.label = tokens[*exit_member].label;
      }

      RefGroup rg;
      rg.position = out.tokens.size();
      rg.index = r;
      for (std::size_t j = lo; j <= hi; ++j) {
        rg.cited_paper_ids.insert(rg.cited_paper_ids.end(), ids_at[j].begin(), ids_at[j].end());
      }
      std::sort(rg.cited_paper_ids.begin(), rg.cited_paper_ids.end());
      rg.cited_paper_ids.erase(std::unique(rg.cited_paper_ids.begin(), rg.cited_paper_ids.end()),
                               rg.cited_paper_ids.end());
      out.refgroups.push_back(std::move(rg));
      out.tokens.push_back(std::move(group));
      i = hi + 1;
      ++r;
    } else {
      Token t = tokens[i];
      if (t.head) t.head = new_index[*t.head];
      out.tokens.push_back(std::move(t));
      ++i;
    }
  }
  validate(out);
  return out;
}

std::vector<ExtractedSpan> extract_dep_spans(const ParsedSentence& sentence,
                                             const ExtractorConfig& config) {
  validate(sentence);
  const auto& tokens = sentence.tokens;
  auto label_allowed = [&](const std::string& label) {
    return std::any_of(config.dependency_labels.begin(), config.dependency_labels.end(),
                       [&](const std::string& l) { return iequals(l, label); });
  };

  std::vector<ExtractedSpan> spans;
  for (const auto& group : sentence.refgroups) {
    std::vector<std::size_t> visited;
    std::vector<bool> seen(tokens.size(), false);
    std::vector<std::size_t> stack{group.position};
    seen[group.position] = true;
    while (!stack.empty()) {
      const auto curr = stack.back();
      stack.pop_back();
      for (std::size_t child = 0; child < tokens.size(); ++child) {
        const auto& tok = tokens[child];
        if (seen[child] || tok.kind != TokenKind::Word) continue;
        if (!tok.head || *tok.head != curr || curr != child + 1) continue;
        if (!label_allowed(tok.label)) continue;
        seen[child] = true;
        visited.push_back(child);
        stack.push_back(child);
      }
    }
    if (visited.empty()) continue;
    std::sort(visited.begin(), visited.end());
    std::vector<std::string> words;
    for (auto i : visited) words.push_back(tokens[i].text);
    auto text = trim_span(detokenize(words));
    if (text.empty()) continue;
    spans.push_back({std::move(text), group, ExtractionRule::DepTraversal});
  }
  return spans;
}

std::vector<ExtractedSpan> extract_token_split_spans(const ParsedSentence& sentence) {
  std::vector<ExtractedSpan> spans;
  std::size_t begin = 0;
  for (const auto& group : sentence.refgroups) {
    auto text = words_text(sentence.tokens, begin, group.position);
    if (!text.empty()) spans.push_back({std::move(text), group, ExtractionRule::TokenSplit});
    begin = group.position + 1;
  }
  return spans;
}

std::vector<ExtractedSpan> extract_full_sentence_spans(const ParsedSentence& sentence) {
  std::vector<ExtractedSpan> spans;
  const auto& tokens = sentence.tokens;
  const auto text = words_text(tokens, 0, tokens.size());
  if (text.empty()) return spans;
  const bool single = sentence.refgroups.size() == 1;
  for (const auto& group : sentence.refgroups) {
    const bool final = std::all_of(tokens.begin() + static_cast<std::ptrdiff_t>(group.position) + 1,
                                   tokens.end(), [](const Token& t) {
                                     return t.kind == TokenKind::Word && is_punctuation(t.text);
                                   });
    if (single || final) spans.push_back({text, group, ExtractionRule::FullSentence});
  }
  return spans;
}

std::vector<ExtractedSpan> extract_all(const ParsedSentence& sentence, const ExtractorConfig& config) {
  auto dep = extract_dep_spans(sentence, config);
  std::set<std::size_t> covered;
  for (const auto& s : dep) covered.insert(s.source_refgroup.index);

  std::vector<ExtractedSpan> all = std::move(dep);
  for (auto& s : extract_token_split_spans(sentence)) {
    if (!covered.contains(s.source_refgroup.index)) all.push_back(std::move(s));
  }
  for (auto& s : extract_full_sentence_spans(sentence)) all.push_back(std::move(s));

  std::set<std::pair<std::string, std::size_t>> keys;
  std::vector<ExtractedSpan> unique;
  for (auto& s : all) {
    if (keys.emplace(normalize_span(s.text), s.source_refgroup.index).second) {
      unique.push_back(std::move(s));
    }
  }
  return unique;
}

ParsedSentence sentence_from_json(const nlohmann::json& record) {
  ParsedSentence s;
  s.paper_id = record.at("paper_id").get<std::string>();
  s.sentence_index = record.at("sentence_index").get<std::size_t>();
  const auto& toks = record.at("tokens");
  for (std::size_t i = 0; i < toks.size(); ++i) {
    const auto& t = toks[i];
    Token token;
    token.text = t.at("text").get<std::string>();
    token.label = t.value("label", std::string{});
    const auto& head = t.at("head");
    if (!head.is_null()) {
      const auto h = head.get<long long>();
      if (h >= 0 && static_cast<std::size_t>(h) != i) token.head = static_cast<std::size_t>(h);
    }
    s.tokens.push_back(std::move(token));
  }
  for (const auto& ref : record.value("refs", nlohmann::json::array())) {
    RefGroup g;
    g.position = ref.at("token_position").get<std::size_t>();
    g.cited_paper_ids = ref.at("cited_paper_ids").get<std::vector<std::string>>();
    std::sort(g.cited_paper_ids.begin(), g.cited_paper_ids.end());
    g.cited_paper_ids.erase(std::unique(g.cited_paper_ids.begin(), g.cited_paper_ids.end()),
                            g.cited_paper_ids.end());
    if (g.position >= s.tokens.size()) {
      throw MalformedSentence("ref position " + std::to_string(g.position) + " out of range");
    }
    s.tokens[g.position].kind = TokenKind::Ref;
    g.index = s.refgroups.size();
    s.refgroups.push_back(std::move(g));
  }
  return s;
}

nlohmann::json to_json(const SpanOccurrence& occurrence) {
  return {{"span_text", occurrence.span_text},
          {"cited_paper_ids", occurrence.cited_paper_ids},
          {"rule", to_string(occurrence.rule)},
          {"provenance",
           {{"paper_id", occurrence.provenance.paper_id},
            {"sentence_index", occurrence.provenance.sentence_index}}}};
}

SpanOccurrence span_occurrence_from_json(const nlohmann::json& record) {
  SpanOccurrence occ;
  occ.span_text = record.at("span_text").get<std::string>();
  occ.cited_paper_ids = record.at("cited_paper_ids").get<std::vector<std::string>>();
  if (record.contains("rule")) occ.rule = rule_from_string(record.at("rule").get<std::string>());
  if (record.contains("provenance")) {
    const auto& p = record.at("provenance");
    occ.provenance.paper_id = p.value("paper_id", std::string{});
    occ.provenance.sentence_index = p.value("sentence_index", std::size_t{0});
  }
  return occ;
}

std::vector<SpanOccurrence> extract_occurrences(const ParsedSentence& raw, const ExtractorConfig& config) {
  const auto grouped = group_refs(raw, config);
  std::vector<SpanOccurrence> out;
  for (auto& span : extract_all(grouped, config)) {
    out.push_back({std::move(span.text), span.source_refgroup.cited_paper_ids, span.rule,
                   {grouped.paper_id, grouped.sentence_index}});
  }
  return out;
}

ExtractionResult extract_stream(std::istream& in, const ExtractorConfig& config) {
  ExtractionResult result;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ++result.sentences_read;
    try {
      const auto sentence = sentence_from_json(nlohmann::json::parse(line));
      if (sentence.refgroups.empty()) {
        throw MalformedSentence("sentence carries no resolved citations");
      }
      auto spans = extract_occurrences(sentence, config);
      std::move(spans.begin(), spans.end(), std::back_inserter(result.spans));
    } catch (const std::exception& e) {
      ++result.sentences_skipped;
      result.diagnostics.push_back("line " + std::to_string(line_no) + ": " + e.what());
      spdlog::warn("skipping sentence on line {}: {}", line_no, e.what());
    }
  }
  return result;
}

}  // namespace ilcite
