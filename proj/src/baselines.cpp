#include <algorithm>
#include <cmath>
#include <map>

#include "attsum/error.hpp"
#include "attsum/pipeline.hpp"

namespace attsum::pipeline {
namespace {

using TermVector = std::map<std::string, double>;

std::map<std::string, long> term_counts(const TokenList& tokens) {
  std::map<std::string, long> tf;
  for (const auto& w : corpus::words_of(tokens)) ++tf[w];
  return tf;
}

double sparse_cosine(const TermVector& a, const TermVector& b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (const auto& [t, x] : a) {
    na += x * x;
    const auto it = b.find(t);
    if (it != b.end()) dot += x * it->second;
  }
  for (const auto& [t, y] : b) nb += y * y;
  na = std::sqrt(na);
  nb = std::sqrt(nb);
  if (na < tensor::kCosineNormFloor || nb < tensor::kCosineNormFloor) return 0.0;
  return std::clamp(dot / (na * nb), -1.0, 1.0);
}

std::vector<RankedSentence> sorted(std::vector<RankedSentence> ranked) {
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const RankedSentence& a, const RankedSentence& b) { return a.score > b.score; });
  return ranked;
}

}  // namespace

Baseline parse_baseline(const std::string& name) {
  if (name == "lead") return Baseline::Lead;
  if (name == "querysim" || name == "query_sim") return Baseline::QuerySim;
  if (name == "isolation") return Baseline::Isolation;
  throw Error("unknown baseline method '" + name + "'");
}

std::vector<double> tfidf_query_similarity(const Cluster& cluster) {
  const auto sentences = corpus::compile_cluster(cluster);
  std::vector<std::map<std::string, long>> tfs;
  tfs.reserve(sentences.size());
  std::map<std::string, long> df;
  for (const auto& s : sentences) {
    tfs.push_back(term_counts(s.tokens));
    for (const auto& [t, c] : tfs.back()) ++df[t];
  }
  const double n = static_cast<double>(sentences.size());
  auto idf = [&](const std::string& t) {
    const auto it = df.find(t);
    const double d = it == df.end() ? 0.0 : static_cast<double>(it->second);
    return std::log((n + 1.0) / (d + 1.0)) + 1.0;
  };
  auto weigh = [&](const std::map<std::string, long>& tf) {
    TermVector v;
    for (const auto& [t, c] : tf) v[t] = static_cast<double>(c) * idf(t);
    return v;
  };
  const TermVector q = weigh(term_counts(cluster.query.tokens));
  std::vector<double> out;
  out.reserve(sentences.size());
  for (const auto& tf : tfs) out.push_back(sparse_cosine(weigh(tf), q));
  return out;
}

std::vector<RankedSentence> rank_baseline(Baseline method, const Cluster& cluster,
                                          const ModelParams* params, const EmbeddingTable* table,
                                          double lambda) {
  const auto sentences = corpus::compile_cluster(cluster);
  if (sentences.empty()) throw Error("cluster " + cluster.id + " has no sentences");
  std::vector<RankedSentence> ranked;
  ranked.reserve(sentences.size());
  const double n = static_cast<double>(sentences.size());
  auto add = [&](std::size_t i, double score) {
    ranked.push_back({sentences[i], i, 0.5, score, corpus::word_count(sentences[i].tokens)});
  };

  switch (method) {
    case Baseline::Lead:
      for (std::size_t i = 0; i < sentences.size(); ++i) add(i, 1.0 - static_cast<double>(i) / n);
      return ranked;
    case Baseline::QuerySim: {
      const auto sim = tfidf_query_similarity(cluster);
      for (std::size_t i = 0; i < sentences.size(); ++i) add(i, sim[i]);
      return sorted(std::move(ranked));
    }
    case Baseline::Isolation: {
      if (!params || !table) throw ContractViolation("ISOLATION needs trained params and embeddings");
      model::check_compatible(params->config, *table);
      const auto pc = prepare(cluster, *table, params->config.h);
      std::vector<Vector> embs;
      embs.reserve(pc.matrices.size());
      for (const auto& m : pc.matrices) embs.push_back(model::encode(*params, m).value);
      Vector doc(params->config.l, 0.0);
      for (const auto& v : embs) tensor::axpy(1.0, v, doc);
      const auto sim = tfidf_query_similarity(cluster);
      for (std::size_t i = 0; i < sentences.size(); ++i)
        add(i, model::rank_score(embs[i], doc) + lambda * sim[i]);
      return sorted(std::move(ranked));
    }
  }
  throw ContractViolation("unknown baseline method");
}

Summary run_baseline(Baseline method, const Cluster& cluster, const ModelParams* params,
                     const EmbeddingTable* table, double lambda, const SelectionConfig& selection) {
  return select_summary(rank_baseline(method, cluster, params, table, lambda), selection);
}

}  // namespace attsum::pipeline
