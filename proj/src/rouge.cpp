#include "attsum/rouge.hpp"

#include <algorithm>

#include "attsum/error.hpp"

namespace attsum::rouge {

NgramCounts ngram_multiset(const std::vector<std::string>& words, int n) {
  require(n >= 1, "ngram_multiset: n must be >= 1");
  NgramCounts counts;
  const auto un = static_cast<std::size_t>(n);
  if (words.size() < un) return counts;
  for (std::size_t i = 0; i + un <= words.size(); ++i) {
    std::string key = words[i];
    for (std::size_t j = 1; j < un; ++j) {
      key.push_back(' ');
      key += words[i + j];
    }
    ++counts[key];
  }
  return counts;
}

RougeScore rouge_n(const std::vector<std::string>& candidate,
                   const std::vector<std::vector<std::string>>& references,
                   const RougeConfig& config) {
  require(config.n == 1 || config.n == 2, "rouge_n: n must be 1 or 2");
  require(!config.truncate_words || *config.truncate_words >= 1,
          "rouge_n: truncate_words must be >= 1");
  require(!references.empty(), "rouge_n: at least one reference is required");

  std::vector<std::string> cand = candidate;
  if (config.truncate_words && cand.size() > *config.truncate_words)
    cand.resize(*config.truncate_words);
  const NgramCounts cand_counts = ngram_multiset(cand, config.n);

  RougeScore score;
  double recall_sum = 0.0;
  for (const auto& ref : references) {
    const NgramCounts ref_counts = ngram_multiset(ref, config.n);
    long total = 0;
    long matched = 0;
    for (const auto& [gram, count] : ref_counts) {
      total += count;
      const auto it = cand_counts.find(gram);
      if (it != cand_counts.end()) matched += std::min(count, it->second);
    }
    score.matched += matched;
    score.total_ref_ngrams += total;
    if (total > 0) recall_sum += static_cast<double>(matched) / static_cast<double>(total);
  }
  score.recall = recall_sum / static_cast<double>(references.size());
  return score;
}

RougeScore rouge_n(const TokenList& candidate, const std::vector<TokenList>& references,
                   const RougeConfig& config) {
  std::vector<std::vector<std::string>> refs;
  refs.reserve(references.size());
  for (const auto& r : references) refs.push_back(corpus::words_of(r));
  return rouge_n(corpus::words_of(candidate), refs, config);
}

std::vector<LabeledSentence> label_sentences(const Cluster& cluster, int n) {
  if (cluster.references.empty())
    throw Error("cluster " + cluster.id + " has no reference summaries to label against");
  std::vector<std::vector<std::string>> refs;
  for (const auto& r : cluster.references) refs.push_back(corpus::words_of(r));
  const auto sentences = corpus::compile_cluster(cluster);
  std::vector<LabeledSentence> out;
  out.reserve(sentences.size());
  for (std::size_t i = 0; i < sentences.size(); ++i)
    out.push_back({i, rouge_n(corpus::words_of(sentences[i].tokens), refs,
                              RougeConfig::sentence(n)).recall});
  return out;
}

}  // namespace attsum::rouge
