#include "attsum/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "attsum/error.hpp"

namespace attsum {

void TrainConfig::validate() const {
  if (!(pos_quantile > 0.0 && pos_quantile <= 0.5))
    throw ContractViolation("TrainConfig: pos_quantile must lie in (0, 0.5]");
  if (!(neg_quantile > 0.0 && neg_quantile < 1.0))
    throw ContractViolation("TrainConfig: neg_quantile must lie in (0, 1)");
  if (batch_size < 1) throw ContractViolation("TrainConfig: batch_size must be >= 1");
  if (!(eta > 0.0)) throw ContractViolation("TrainConfig: eta must be positive");
  if (!(margin > 0.0)) throw ContractViolation("TrainConfig: margin must be positive");
  if (cluster_cap < 1) throw ContractViolation("TrainConfig: cluster_cap must be >= 1");
  if (jobs < 1) throw ContractViolation("TrainConfig: jobs must be >= 1");
}

TokenList Summary::tokens() const {
  TokenList out;
  for (const auto& s : sentences) out.insert(out.end(), s.sentence.tokens.begin(), s.sentence.tokens.end());
  return out;
}

namespace pipeline {
namespace {

template <typename Fn>
void parallel_for(std::size_t n, std::size_t jobs, Fn&& fn) {
  const std::size_t workers = std::min(jobs, n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w)
    threads.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  for (auto& t : threads) t.join();
}

std::size_t quantile_count(double q, std::size_t n) {
  const auto c = static_cast<std::size_t>(std::floor(q * static_cast<double>(n) + 1e-9));
  return std::max<std::size_t>(1, c);
}

using Bigram = std::pair<std::string, std::string>;

std::set<Bigram> bigram_set(const TokenList& tokens) {
  const auto words = corpus::words_of(tokens);
  std::set<Bigram> out;
  for (std::size_t i = 0; i + 1 < words.size(); ++i) out.emplace(words[i], words[i + 1]);
  return out;
}

double ratio_against(const std::set<Bigram>& candidate, const std::set<Bigram>& seen) {
  if (candidate.empty()) return 0.0;
  std::size_t fresh = 0;
  for (const auto& b : candidate)
    if (seen.count(b) == 0) ++fresh;
  return static_cast<double>(fresh) / static_cast<double>(candidate.size());
}

struct BatchResult {
  double loss_sum = 0.0;
  Gradients grads;
};

BatchResult batch_gradient(const ModelParams& params, const std::vector<PreparedCluster>& clusters,
                           const std::vector<TrainingPair>& batch, double margin, std::size_t jobs) {
  // Pairs grouped by cluster, groups in order of first appearance.
  std::vector<std::size_t> group_cluster;
  std::vector<std::vector<std::size_t>> group_pairs;
  std::vector<std::ptrdiff_t> slot(clusters.size(), -1);
  for (std::size_t p = 0; p < batch.size(); ++p) {
    const std::size_t c = batch[p].cluster;
    if (slot[c] < 0) {
      slot[c] = static_cast<std::ptrdiff_t>(group_cluster.size());
      group_cluster.push_back(c);
      group_pairs.emplace_back();
    }
    group_pairs[static_cast<std::size_t>(slot[c])].push_back(p);
  }

  std::vector<BatchResult> partial(group_cluster.size());
  parallel_for(group_cluster.size(), jobs, [&](std::size_t g) {
    const auto& pc = clusters[group_cluster[g]];
    model::ClusterForward fwd(params, pc.matrices, pc.query);
    model::ClusterBackward back(fwd);
    BatchResult r{0.0, Gradients::zeros_like(params)};
    for (std::size_t p : group_pairs[g]) r.loss_sum += back.add_pair(batch[p].pos_idx, batch[p].neg_idx, margin);
    back.finish(r.grads);
    partial[g] = std::move(r);
  });

  BatchResult total{0.0, Gradients::zeros_like(params)};
  for (const auto& r : partial) {
    total.loss_sum += r.loss_sum;
    total.grads.add(r.grads);
  }
  return total;
}

std::vector<double> sentence_labels(const std::vector<Sentence>& sentences,
                                    const std::vector<TokenList>& references) {
  std::vector<std::vector<std::string>> refs;
  for (const auto& r : references) refs.push_back(corpus::words_of(r));
  std::vector<double> labels;
  labels.reserve(sentences.size());
  for (const auto& s : sentences)
    labels.push_back(rouge::rouge_n(corpus::words_of(s.tokens), refs, RougeConfig::sentence(2)).recall);
  return labels;
}

}  // namespace

PairPools pair_pools(const std::vector<double>& labels, const TrainConfig& config) {
  PairPools pools;
  const std::size_t n = labels.size();
  if (n < 2) {
    pools.skip_reason = "fewer than two sentences";
    return pools;
  }
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return labels[a] > labels[b]; });
  const std::size_t npos = quantile_count(config.pos_quantile, n);
  const std::size_t nneg = quantile_count(config.neg_quantile, n);
  if (npos + nneg > n) {
    pools.skip_reason = "positive and negative quantiles overlap";
    return pools;
  }
  pools.negatives.assign(order.end() - static_cast<std::ptrdiff_t>(nneg), order.end());
  const double max_neg = labels[pools.negatives.front()];
  for (std::size_t i = 0; i < npos; ++i)
    if (labels[order[i]] > max_neg) pools.positives.push_back(order[i]);
  if (pools.positives.empty()) {
    pools.negatives.clear();
    pools.skip_reason = "labels do not separate positives from negatives";
  }
  return pools;
}

PairSampler::PairSampler(const std::vector<std::vector<double>>& labels, const TrainConfig& config,
                         const std::vector<std::string>& names)
    : batch_size_(config.batch_size), rng_(config.seed ^ 0x9E3779B97F4A7C15ULL) {
  config.validate();
  pools_.reserve(labels.size());
  for (std::size_t c = 0; c < labels.size(); ++c) {
    pools_.push_back(pair_pools(labels[c], config));
    const auto& p = pools_.back();
    if (!p.skip_reason.empty()) {
      const std::string name = c < names.size() ? names[c] : "#" + std::to_string(c);
      warnings_.push_back("skipping cluster " + name + ": " + p.skip_reason);
      continue;
    }
    usable_.push_back(c);
    total_pairs_ += p.positives.size() * p.negatives.size();
  }
}

std::size_t PairSampler::batches_per_epoch() const {
  return (total_pairs_ + batch_size_ - 1) / batch_size_;
}

std::vector<TrainingPair> PairSampler::next_batch() {
  if (usable_.empty()) throw Error("no cluster can supply training pairs");
  std::vector<TrainingPair> batch;
  batch.reserve(batch_size_);
  for (std::size_t i = 0; i < batch_size_; ++i) {
    const std::size_t c = usable_[rng_.index(usable_.size())];
    const auto& p = pools_[c];
    const std::size_t pos = p.positives[rng_.index(p.positives.size())];
    const std::size_t neg = p.negatives[rng_.index(p.negatives.size())];
    batch.push_back({c, pos, neg});
  }
  return batch;
}

PreparedCluster prepare(const Cluster& cluster, const EmbeddingTable& table, std::size_t h,
                        std::optional<std::size_t> cap) {
  PreparedCluster pc;
  pc.id = cluster.id;
  pc.sentences = corpus::compile_cluster(cluster);
  if (pc.sentences.empty()) throw Error("cluster " + cluster.id + " has no sentences");
  if (cap && pc.sentences.size() > *cap) pc.sentences.resize(*cap);
  pc.matrices.reserve(pc.sentences.size());
  for (const auto& s : pc.sentences) pc.matrices.push_back(embed::sentence_matrix(table, s.tokens, h));
  pc.query = embed::sentence_matrix(table, cluster.query.tokens, h);
  return pc;
}

std::string format_epoch(const EpochLog& e) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "epoch %zu mean_loss %.10f pairs %zu", e.epoch, e.mean_loss, e.pairs);
  return buf;
}

TrainResult train(const std::vector<Cluster>& corpus, const EmbeddingTable& table,
                  const ModelConfig& model_config, const TrainConfig& train_config,
                  std::ostream* log) {
  model_config.validate();
  train_config.validate();
  if (corpus.empty()) throw Error("empty training corpus");
  model::check_compatible(model_config, table);

  std::vector<PreparedCluster> prepared;
  std::vector<std::vector<double>> labels;
  prepared.reserve(corpus.size());
  for (const auto& cluster : corpus) {
    if (cluster.references.empty())
      throw Error("training cluster " + cluster.id + " has no reference summaries");
    prepared.push_back(prepare(cluster, table, model_config.h, train_config.cluster_cap));
    labels.push_back(sentence_labels(prepared.back().sentences, cluster.references));
  }

  std::vector<std::string> names;
  for (const auto& c : corpus) names.push_back(c.id);
  PairSampler sampler(labels, train_config, names);
  TrainResult result;
  result.warnings = sampler.warnings();
  if (log)
    for (const auto& w : result.warnings) *log << "warning: " << w << '\n';
  if (sampler.usable_clusters() == 0) throw Error("all training clusters were skipped");

  result.params = model::init_params(model_config, train_config.seed);
  AdaGradState state = AdaGradState::fresh(result.params);
  const std::size_t batches = sampler.batches_per_epoch();
  for (std::size_t epoch = 1; epoch <= train_config.epochs; ++epoch) {
    double loss_sum = 0.0;
    std::size_t pairs = 0;
    for (std::size_t b = 0; b < batches; ++b) {
      const auto batch = sampler.next_batch();
      auto step = batch_gradient(result.params, prepared, batch, train_config.margin, train_config.jobs);
      model::adagrad_step(result.params, state, step.grads, train_config.eta);
      loss_sum += step.loss_sum;
      pairs += batch.size();
    }
    EpochLog e{epoch, pairs ? loss_sum / static_cast<double>(pairs) : 0.0, pairs};
    result.epochs.push_back(e);
    if (log) *log << format_epoch(e) << '\n';
  }
  return result;
}

std::vector<RankedSentence> rank_sentences(const ModelParams& params, const EmbeddingTable& table,
                                           const Cluster& cluster) {
  model::check_compatible(params.config, table);
  const PreparedCluster pc = prepare(cluster, table, params.config.h);
  const model::ClusterForward fwd(params, pc.matrices, pc.query);
  std::vector<RankedSentence> ranked;
  ranked.reserve(pc.sentences.size());
  for (std::size_t i = 0; i < pc.sentences.size(); ++i)
    ranked.push_back({pc.sentences[i], i, fwd.doc().weights[i], fwd.cos(i),
                      corpus::word_count(pc.sentences[i].tokens)});
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const RankedSentence& a, const RankedSentence& b) { return a.score > b.score; });
  return ranked;
}

PairAccuracy pairwise_accuracy(const ModelParams& params, const EmbeddingTable& table,
                               const Cluster& cluster, const TrainConfig& config) {
  model::check_compatible(params.config, table);
  const PreparedCluster pc = prepare(cluster, table, params.config.h);
  const auto labels = sentence_labels(pc.sentences, cluster.references);
  const auto pools = pair_pools(labels, config);
  const model::ClusterForward fwd(params, pc.matrices, pc.query);
  PairAccuracy acc;
  for (std::size_t p : pools.positives)
    for (std::size_t n : pools.negatives) {
      ++acc.total;
      if (fwd.cos(p) > fwd.cos(n)) ++acc.correct;
    }
  return acc;
}

double new_bigram_ratio(const TokenList& candidate, const Summary& current) {
  std::set<Bigram> seen;
  for (const auto& s : current.sentences) {
    const auto b = bigram_set(s.sentence.tokens);
    seen.insert(b.begin(), b.end());
  }
  return ratio_against(bigram_set(candidate), seen);
}

Summary select_summary(const std::vector<RankedSentence>& ranked, const SelectionConfig& config) {
  Summary summary;
  std::set<Bigram> seen;
  for (const auto& r : ranked) {
    if (summary.total_words >= config.word_limit) break;
    if (r.word_count < config.min_words) continue;
    const auto bigrams = bigram_set(r.sentence.tokens);
    const double ratio = ratio_against(bigrams, seen);
    if (ratio < config.ratio_cutoff) continue;

    SummarySentence chosen{r.sentence, r.word_count, ratio, false};
    const std::size_t remaining = config.word_limit - summary.total_words;
    if (r.word_count > remaining) {
      TokenList kept;
      std::size_t words = 0;
      for (const auto& t : r.sentence.tokens) {
        if (words == remaining) break;
        kept.push_back(t);
        if (corpus::is_word(t)) ++words;
      }
      chosen.sentence.tokens = std::move(kept);
      chosen.sentence.text = corpus::join_surface(chosen.sentence.tokens);
      chosen.truncated = true;
      summary.total_words += remaining;
    } else {
      summary.total_words += r.word_count;
    }
    seen.insert(bigrams.begin(), bigrams.end());
    summary.sentences.push_back(std::move(chosen));
  }
  return summary;
}

std::string format_summary(const Summary& summary) {
  std::string out;
  for (const auto& s : summary.sentences) {
    out += s.sentence.text;
    out.push_back('\n');
  }
  return out;
}

std::string EvalReport::to_tsv() const {
  std::string out = "cluster_id\tROUGE-1\tROUGE-2\n";
  char buf[64];
  for (const auto& row : rows) {
    if (!row.error.empty()) {
      out += row.cluster_id + "\tERROR\tERROR\t" + row.error + "\n";
      continue;
    }
    std::snprintf(buf, sizeof buf, "\t%.2f\t%.2f\n", row.rouge1, row.rouge2);
    out += row.cluster_id + buf;
  }
  std::snprintf(buf, sizeof buf, "mean\t%.2f\t%.2f\n", mean_rouge1, mean_rouge2);
  out += buf;
  return out;
}

EvalRow evaluate_one(const Cluster& cluster, const TokenList& summary) {
  EvalRow row{cluster.id, 0.0, 0.0, {}};
  if (cluster.references.empty()) {
    row.error = "no reference summaries";
    return row;
  }
  row.rouge1 = 100.0 * rouge::rouge_n(summary, cluster.references, RougeConfig::summary(1)).recall;
  row.rouge2 = 100.0 * rouge::rouge_n(summary, cluster.references, RougeConfig::summary(2)).recall;
  return row;
}

EvalReport evaluate(const std::vector<Cluster>& corpus, const std::filesystem::path& summaries_dir) {
  EvalReport report;
  for (const auto& cluster : corpus) {
    const auto path = summaries_dir / (cluster.id + ".sum.txt");
    std::ifstream in(path, std::ios::binary);
    if (!in) {
      report.rows.push_back({cluster.id, 0.0, 0.0, "missing summary file " + path.string()});
      continue;
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    EvalRow row;
    try {
      corpus::validate_utf8(ss.str(), path.string());
      row = evaluate_one(cluster, corpus::tokenize(ss.str()));
    } catch (const Error& e) {
      row = {cluster.id, 0.0, 0.0, e.what()};
    }
    report.rows.push_back(std::move(row));
  }
  for (const auto& row : report.rows) {
    if (!row.error.empty()) continue;
    report.mean_rouge1 += row.rouge1;
    report.mean_rouge2 += row.rouge2;
    ++report.scored;
  }
  if (report.scored) {
    report.mean_rouge1 /= static_cast<double>(report.scored);
    report.mean_rouge2 /= static_cast<double>(report.scored);
  }
  return report;
}

}  // namespace pipeline
}  // namespace attsum
