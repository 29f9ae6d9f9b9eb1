#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "attsum/embed.hpp"
#include "attsum/tensor.hpp"

namespace attsum {

enum class Pooling {
  Attention,  // weights r(s,q) = sigmoid(v(s) M v(q))
  Sum,        // weights frozen at 0.5; M unused and never updated
};

struct ModelConfig {
  std::size_t h = 2;   // convolution window
  std::size_t k = 50;  // word-embedding dim
  std::size_t l = 50;  // sentence-embedding dim
  Pooling pooling = Pooling::Attention;

  void validate() const;
  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

struct ModelParams {
  ModelConfig config;
  Matrix W;  // l x hk convolution filter
  Matrix M;  // l x l bilinear relevance tensor

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

struct Gradients {
  Matrix dW;
  Matrix dM;

  static Gradients zeros_like(const ModelParams& params);
  void add(const Gradients& other);
};

struct AdaGradState {
  Matrix gW_sq;
  Matrix gM_sq;
  double epsilon = 1e-6;

  static AdaGradState fresh(const ModelParams& params, double epsilon = 1e-6);
};

// Encoder output together with what its backward pass needs.
struct Encoding {
  Vector value;                      // length l, max over windows
  std::vector<std::size_t> argmax;   // winning window per feature
};

struct DocEmbedding {
  Vector doc;
  Vector weights;  // relevance per sentence
};

struct PairGradient {
  double loss = 0.0;
  Gradients grads;
};

namespace model {

ModelParams init_params(const ModelConfig& config, std::uint64_t seed);

// Convolution + tanh + max-over-time. mat is k x T with T >= h.
Encoding encode(const ModelParams& params, const Matrix& mat);

// Accumulates into dW the gradient flowing back from d(loss)/d(encoding).
void encode_backward(const ModelParams& params, const Matrix& mat, const Encoding& enc,
                     std::span<const double> upstream, Matrix& dW);

double relevance(const ModelParams& params, std::span<const double> v_s,
                 std::span<const double> v_q);

// Weighted-sum pooling of sentence embeddings by their query relevance.
DocEmbedding doc_embedding(const ModelParams& params, std::span<const Vector> sentence_embs,
                           std::span<const double> v_q);

double rank_score(std::span<const double> v_s, std::span<const double> v_d);

inline double hinge(double margin, double cos_pos, double cos_neg) {
  const double slack = margin - cos_pos + cos_neg;
  return slack > 0.0 ? slack : 0.0;
}

// Forward pass over a whole cluster. Every pair drawn from the same cluster
// under the same parameters shares it.
class ClusterForward {
 public:
  ClusterForward(const ModelParams& params, std::span<const Matrix> sentences,
                 const Matrix& query);

  const ModelParams& params() const { return *params_; }
  std::size_t size() const { return sentences_.size(); }
  const Encoding& sentence(std::size_t i) const { return encodings_[i]; }
  const Encoding& query() const { return query_enc_; }
  const DocEmbedding& doc() const { return doc_; }

  double cos(std::size_t i) const;
  double pair_loss(std::size_t pos, std::size_t neg, double margin) const;

 private:
  friend class ClusterBackward;
  const ModelParams* params_;
  std::span<const Matrix> sentences_;
  const Matrix* query_mat_;
  std::vector<Encoding> encodings_;
  std::vector<Vector> embs_;
  Encoding query_enc_;
  DocEmbedding doc_;
};

// Sums the gradients of several pair losses on one ClusterForward, then runs
// the encoder backward once per sentence.
class ClusterBackward {
 public:
  explicit ClusterBackward(const ClusterForward& forward);

  // Returns the pair's loss. A pair with loss exactly 0 adds nothing.
  double add_pair(std::size_t pos, std::size_t neg, double margin);

  // Adds the accumulated gradient into grads.
  void finish(Gradients& grads) const;

 private:
  const ClusterForward* fwd_;
  Vector d_doc_;
  std::vector<Vector> d_sent_;
  bool any_ = false;
};

double pair_loss(const ModelParams& params, std::span<const Matrix> sentences,
                 const Matrix& query, std::size_t pos, std::size_t neg, double margin);

PairGradient pair_backward(const ModelParams& params, std::span<const Matrix> sentences,
                           const Matrix& query, std::size_t pos, std::size_t neg,
                           double margin);

// Per coordinate: acc += g^2; theta -= eta * g / sqrt(acc + epsilon).
// Under Pooling::Sum the M block is left untouched.
void adagrad_step(ModelParams& params, AdaGradState& state, const Gradients& grads, double eta);

inline constexpr const char* kCheckpointFormat = "attsum.v1";

void save_checkpoint(const ModelParams& params, const std::filesystem::path& path);
std::string checkpoint_to_string(const ModelParams& params);
ModelParams load_checkpoint(const std::filesystem::path& path);
ModelParams checkpoint_from_string(const std::string& content);

// Throws DimensionError when the model's k differs from the table's dim.
void check_compatible(const ModelConfig& config, const EmbeddingTable& table);

}  // namespace model
}  // namespace attsum
