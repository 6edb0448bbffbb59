#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace ilcite {

enum class TokenKind { Word, Ref, RefGroup };

struct Token {
  std::string text;
  std::optional<std::size_t> head;  // nullopt marks the root
  std::string label;
  TokenKind kind = TokenKind::Word;
};

// Before group_refs each entry is one citation marker; afterwards each entry
// is a merged REFGROUP. `index` is the order of the group within its sentence.
struct RefGroup {
  std::size_t position = 0;
  std::vector<std::string> cited_paper_ids;  // sorted, unique, non-empty
  std::size_t index = 0;

  bool operator==(const RefGroup&) const = default;
};

struct ParsedSentence {
  std::string paper_id;
  std::size_t sentence_index = 0;
  std::vector<Token> tokens;
  std::vector<RefGroup> refgroups;
};

enum class ExtractionRule { DepTraversal, TokenSplit, FullSentence };

const char* to_string(ExtractionRule rule);
ExtractionRule rule_from_string(const std::string& name);

struct ExtractedSpan {
  std::string text;
  RefGroup source_refgroup;
  ExtractionRule rule = ExtractionRule::DepTraversal;
};

struct Provenance {
  std::string paper_id;
  std::size_t sentence_index = 0;

  auto operator<=>(const Provenance&) const = default;
};

// One evidence-span occurrence, the unit consumed by the evidence database.
struct SpanOccurrence {
  std::string span_text;
  std::vector<std::string> cited_paper_ids;
  ExtractionRule rule = ExtractionRule::FullSentence;
  Provenance provenance;
};

struct ExtractorConfig {
  // Edge labels the dependency traversal may follow; compared case-insensitively.
  std::vector<std::string> dependency_labels{"compound", "amod"};
  // Tokens allowed between two markers of the same group.
  std::vector<std::string> ref_separators{",", ";"};
};

class MalformedSentence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Throws MalformedSentence on out-of-range heads, cycles, or refgroup entries
// that do not point at a REF/REFGROUP token.
void validate(const ParsedSentence& sentence);

// Collapses maximal runs of adjacent citation markers into REFGROUP tokens,
// re-indexing token positions and dependency heads.
ParsedSentence group_refs(const ParsedSentence& sentence, const ExtractorConfig& config = {});

std::vector<ExtractedSpan> extract_dep_spans(const ParsedSentence& sentence,
                                             const ExtractorConfig& config = {});
std::vector<ExtractedSpan> extract_token_split_spans(const ParsedSentence& sentence);
std::vector<ExtractedSpan> extract_full_sentence_spans(const ParsedSentence& sentence);

// Dependency spans first; token-split spans only for groups the traversal left
// empty; full-sentence spans whenever their condition holds. Deduplicated on
// (normalized text, group).
std::vector<ExtractedSpan> extract_all(const ParsedSentence& sentence,
                                       const ExtractorConfig& config = {});

// Reads one parsed-sentence record: {paper_id, sentence_index,
// tokens:[{text, head, label}], refs:[{token_position, cited_paper_ids}]}.
// A head of null, -1 or the token's own index marks the root.
ParsedSentence sentence_from_json(const nlohmann::json& record);

nlohmann::json to_json(const SpanOccurrence& occurrence);
SpanOccurrence span_occurrence_from_json(const nlohmann::json& record);

struct ExtractionResult {
  std::vector<SpanOccurrence> spans;
  std::size_t sentences_read = 0;
  std::size_t sentences_skipped = 0;
  std::vector<std::string> diagnostics;
};

// Full extraction over one sentence: group, extract, flatten to occurrences.
std::vector<SpanOccurrence> extract_occurrences(const ParsedSentence& raw,
                                                const ExtractorConfig& config = {});

// Line-delimited parsed-sentence stream. Bad lines and malformed trees are
// skipped and recorded in diagnostics.
ExtractionResult extract_stream(std::istream& in, const ExtractorConfig& config = {});

}  // namespace ilcite
