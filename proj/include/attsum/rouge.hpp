#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "attsum/corpus.hpp"

namespace attsum {

struct RougeConfig {
  int n = 2;
  std::optional<std::size_t> truncate_words;  // none for sentence labeling

  static RougeConfig summary(int n) { return {n, std::size_t{250}}; }
  static RougeConfig sentence(int n) { return {n, std::nullopt}; }
};

struct RougeScore {
  double recall = 0.0;    // mean of per-reference recalls
  long matched = 0;       // clipped matches summed over references
  long total_ref_ngrams = 0;
};

struct LabeledSentence {
  std::size_t index;  // compile order
  double score;
};

namespace rouge {

// n-gram -> multiplicity; n-grams are the joined words separated by ' '.
using NgramCounts = std::map<std::string, long>;

NgramCounts ngram_multiset(const std::vector<std::string>& words, int n);

// Scores over word tokens only; punctuation tokens are dropped before
// counting, and truncation keeps the first truncate_words words.
RougeScore rouge_n(const std::vector<std::string>& candidate,
                   const std::vector<std::vector<std::string>>& references,
                   const RougeConfig& config);

RougeScore rouge_n(const TokenList& candidate, const std::vector<TokenList>& references,
                   const RougeConfig& config);

// Individual untruncated ROUGE-n of every compiled sentence. Throws Error when
// the cluster has no references.
std::vector<LabeledSentence> label_sentences(const Cluster& cluster, int n = 2);

}  // namespace rouge
}  // namespace attsum
