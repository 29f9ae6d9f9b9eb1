#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "attsum/corpus.hpp"
#include "attsum/embed.hpp"
#include "attsum/model.hpp"
#include "attsum/random.hpp"
#include "attsum/rouge.hpp"

namespace attsum {

struct TrainConfig {
  double margin = 0.5;
  double eta = 0.1;
  std::size_t batch_size = 100;
  std::size_t epochs = 10;
  std::uint64_t seed = 1;
  double pos_quantile = 0.25;
  double neg_quantile = 0.25;
  std::size_t cluster_cap = 1000;
  std::size_t jobs = 1;

  void validate() const;
};

struct TrainingPair {
  std::size_t cluster = 0;  // index into the sampler's cluster list
  std::size_t pos_idx = 0;
  std::size_t neg_idx = 0;

  friend bool operator==(const TrainingPair&, const TrainingPair&) = default;
};

struct RankedSentence {
  Sentence sentence;
  std::size_t compile_index = 0;
  double relevance = 0.5;
  double score = 0.0;
  std::size_t word_count = 0;
};

struct SummarySentence {
  Sentence sentence;            // tokens/text cut at the budget when truncated
  std::size_t word_count = 0;   // words before truncation
  double ratio_at_append = 0.0;
  bool truncated = false;
};

struct Summary {
  std::vector<SummarySentence> sentences;
  std::size_t total_words = 0;

  TokenList tokens() const;
};

struct SelectionConfig {
  std::size_t word_limit = 250;
  std::size_t min_words = 8;
  double ratio_cutoff = 0.5;
};

struct EpochLog {
  std::size_t epoch = 0;
  double mean_loss = 0.0;
  std::size_t pairs = 0;
};

namespace pipeline {

// Positive and negative index sets of one cluster, by quantile of the labels.
struct PairPools {
  std::vector<std::size_t> positives;
  std::vector<std::size_t> negatives;
  std::string skip_reason;  // non-empty when the cluster cannot supply pairs
};

PairPools pair_pools(const std::vector<double>& labels, const TrainConfig& config);

// Stream of training-pair batches. Each pair picks a usable cluster uniformly,
// then a positive and a negative uniformly from its pools.
class PairSampler {
 public:
  // names label the clusters in warnings; defaults to "#<index>".
  PairSampler(const std::vector<std::vector<double>>& labels, const TrainConfig& config,
              const std::vector<std::string>& names = {});

  std::vector<TrainingPair> next_batch();

  std::size_t usable_clusters() const { return usable_.size(); }
  // Sum over usable clusters of |positives| * |negatives|.
  std::size_t total_pairs() const { return total_pairs_; }
  // Ceil(total_pairs / batch_size).
  std::size_t batches_per_epoch() const;

  const PairPools& pools(std::size_t cluster) const { return pools_[cluster]; }
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  std::vector<PairPools> pools_;
  std::vector<std::size_t> usable_;
  std::size_t total_pairs_ = 0;
  std::size_t batch_size_;
  Rng rng_;
  std::vector<std::string> warnings_;
};

// Embedding matrices of one cluster, in compile order.
struct PreparedCluster {
  std::string id;
  std::vector<Sentence> sentences;
  std::vector<Matrix> matrices;
  Matrix query;
};

PreparedCluster prepare(const Cluster& cluster, const EmbeddingTable& table, std::size_t h,
                        std::optional<std::size_t> cap = std::nullopt);

struct TrainResult {
  ModelParams params;
  std::vector<EpochLog> epochs;
  std::vector<std::string> warnings;
};

// Writes one "epoch <i> mean_loss <v> pairs <n>" line per epoch to log when
// given.
TrainResult train(const std::vector<Cluster>& corpus, const EmbeddingTable& table,
                  const ModelConfig& model_config, const TrainConfig& train_config,
                  std::ostream* log = nullptr);

std::string format_epoch(const EpochLog& e);

// Sorted by score descending; ties by compile order.
std::vector<RankedSentence> rank_sentences(const ModelParams& params,
                                           const EmbeddingTable& table, const Cluster& cluster);

// Fraction of (positive, negative) pool pairs with cos+ > cos- on one cluster.
struct PairAccuracy {
  std::size_t correct = 0;
  std::size_t total = 0;
};
PairAccuracy pairwise_accuracy(const ModelParams& params, const EmbeddingTable& table,
                               const Cluster& cluster, const TrainConfig& config);

// Distinct-bigram ratio of a candidate against the sentences already chosen.
double new_bigram_ratio(const TokenList& candidate, const Summary& current);

Summary select_summary(const std::vector<RankedSentence>& ranked,
                       const SelectionConfig& config = {});

enum class Baseline { Lead, QuerySim, Isolation };

Baseline parse_baseline(const std::string& name);

// TF-IDF cosine of every compiled sentence to the query. IDF is computed over
// the compiled sentences: idf = ln((N+1)/(df+1)) + 1, tf = raw count.
std::vector<double> tfidf_query_similarity(const Cluster& cluster);

std::vector<RankedSentence> rank_baseline(Baseline method, const Cluster& cluster,
                                          const ModelParams* params = nullptr,
                                          const EmbeddingTable* table = nullptr,
                                          double lambda = 1.0);

Summary run_baseline(Baseline method, const Cluster& cluster, const ModelParams* params = nullptr,
                     const EmbeddingTable* table = nullptr, double lambda = 1.0,
                     const SelectionConfig& selection = {});

// One selected sentence per line, surface text.
std::string format_summary(const Summary& summary);

struct EvalRow {
  std::string cluster_id;
  double rouge1 = 0.0;
  double rouge2 = 0.0;
  std::string error;  // non-empty rows are excluded from the mean
};

struct EvalReport {
  std::vector<EvalRow> rows;
  double mean_rouge1 = 0.0;
  double mean_rouge2 = 0.0;
  std::size_t scored = 0;

  std::string to_tsv() const;
};

EvalRow evaluate_one(const Cluster& cluster, const TokenList& summary);

// Reads <summaries_dir>/<cluster_id>.sum.txt for every cluster.
EvalReport evaluate(const std::vector<Cluster>& corpus,
                    const std::filesystem::path& summaries_dir);

}  // namespace pipeline
}  // namespace attsum
