#pragma once

// Hand-parsed sentences for extraction tests. Heads are 0-based, -1 is the root;
// tokens listed in `refs` are citation markers.

#include <string>
#include <utility>
#include <vector>

#include "ilcite/span_extractor.hpp"

namespace fixtures {

struct Tok {
  std::string text;
  int head;
  std::string label;
};

inline ilcite::ParsedSentence make_sentence(const std::vector<Tok>& toks,
                                            const std::vector<std::pair<std::size_t, std::vector<std::string>>>& refs,
                                            std::string paper_id = "src", std::size_t index = 0) {
  ilcite::ParsedSentence s;
  s.paper_id = std::move(paper_id);
  s.sentence_index = index;
  for (const auto& t : toks) {
    ilcite::Token token;
    token.text = t.text;
    token.label = t.label;
    if (t.head >= 0) token.head = static_cast<std::size_t>(t.head);
    s.tokens.push_back(token);
  }
  for (const auto& [pos, ids] : refs) {
    s.tokens[pos].kind = ilcite::TokenKind::Ref;
    s.refgroups.push_back({pos, ids, s.refgroups.size()});
  }
  return s;
}

// "They used an IEX parser [REF] to encode the input ."
inline ilcite::ParsedSentence s1() {
  return make_sentence({{"They", 1, "nsubj"}, {"used", -1, "ROOT"}, {"an", 4, "det"}, {"IEX", 4, "compound"},
                        {"parser", 5, "compound"}, {"[REF]", 1, "dobj"}, {"to", 7, "aux"}, {"encode", 1, "advcl"},
                        {"the", 9, "det"}, {"input", 7, "dobj"}, {".", 1, "punct"}},
                       {{5, {"P_iex"}}}, "s1");
}

// "Recent work in the past few years has been focused on extractive summarization [REF] ."
inline ilcite::ParsedSentence s2() {
  return make_sentence({{"Recent", 1, "amod"}, {"work", 9, "nsubjpass"}, {"in", 1, "prep"}, {"the", 6, "det"},
                        {"past", 6, "amod"}, {"few", 6, "amod"}, {"years", 2, "pobj"}, {"has", 9, "aux"},
                        {"been", 9, "auxpass"}, {"focused", -1, "ROOT"}, {"on", 9, "prep"},
                        {"extractive", 12, "amod"}, {"summarization", 13, "compound"}, {"[REF]", 10, "pobj"},
                        {".", 9, "punct"}},
                       {{13, {"P_summ"}}}, "s2");
}

// "Context embeddings were generated using Sentence Transformers [REF]"
inline ilcite::ParsedSentence s3() {
  return make_sentence({{"Context", 1, "compound"}, {"embeddings", 3, "nsubjpass"}, {"were", 3, "auxpass"},
                        {"generated", -1, "ROOT"}, {"using", 3, "advcl"}, {"Sentence", 6, "compound"},
                        {"Transformers", 7, "compound"}, {"[REF]", 4, "dobj"}},
                       {{7, {"P_sbert"}}}, "s3");
}

// "They used ROUGE and METEOR metrics [REF] for evaluating their models"
inline ilcite::ParsedSentence s4() {
  return make_sentence({{"They", 1, "nsubj"}, {"used", -1, "ROOT"}, {"ROUGE", 5, "nmod"}, {"and", 2, "cc"},
                        {"METEOR", 2, "conj"}, {"metrics", 1, "dobj"}, {"[REF]", 5, "appos"}, {"for", 1, "prep"},
                        {"evaluating", 7, "pcomp"}, {"their", 10, "poss"}, {"models", 8, "dobj"}},
                       {{6, {"P_rouge", "P_meteor"}}}, "s4");
}

// "They used BERT [REF] , a popular Large Language Model [REF] , to generate text embeddings [REF]"
inline ilcite::ParsedSentence s5() {
  return make_sentence({{"They", 1, "nsubj"}, {"used", -1, "ROOT"}, {"BERT", 3, "compound"}, {"[REF]", 1, "dobj"},
                        {",", 3, "punct"}, {"a", 10, "det"}, {"popular", 10, "amod"}, {"Large", 8, "amod"},
                        {"Language", 9, "compound"}, {"Model", 10, "compound"}, {"[REF]", 3, "appos"},
                        {",", 3, "punct"}, {"to", 13, "aux"}, {"generate", 1, "advcl"}, {"text", 15, "compound"},
                        {"embeddings", 13, "dobj"}, {"[REF]", 13, "npadvmod"}},
                       {{3, {"P_bert"}}, {10, {"P_llm"}}, {16, {"P_emb"}}}, "s5");
}

// "There are two broad types of text summarization approaches , namely , extractive
//  [REF] , [REF] , [REF] and abstractive [REF] ."
inline ilcite::ParsedSentence summarization_types() {
  return make_sentence(
      {{"There", 1, "expl"}, {"are", -1, "ROOT"}, {"two", 4, "nummod"}, {"broad", 4, "amod"}, {"types", 1, "attr"},
       {"of", 4, "prep"}, {"text", 7, "compound"}, {"summarization", 8, "compound"}, {"approaches", 5, "pobj"},
       {",", 4, "punct"}, {"namely", 4, "advmod"}, {",", 4, "punct"}, {"extractive", 13, "amod"},
       {"[REF]", 4, "appos"}, {",", 13, "punct"}, {"[REF]", 13, "conj"}, {",", 13, "punct"}, {"[REF]", 13, "conj"},
       {"and", 13, "cc"}, {"abstractive", 20, "amod"}, {"[REF]", 13, "conj"}, {".", 1, "punct"}},
      {{13, {"REF1"}}, {15, {"REF2"}}, {17, {"REF3"}}, {20, {"REF4"}}}, "summ");
}

}  // namespace fixtures
