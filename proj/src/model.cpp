#include "attsum/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "attsum/error.hpp"
#include "attsum/random.hpp"

namespace attsum {

void ModelConfig::validate() const {
  if (h < 1 || k < 1 || l < 1) throw ContractViolation("ModelConfig: h, k and l must be >= 1");
}

Gradients Gradients::zeros_like(const ModelParams& params) {
  return {Matrix(params.W.rows(), params.W.cols()), Matrix(params.M.rows(), params.M.cols())};
}

void Gradients::add(const Gradients& other) {
  require(other.dW.size() == dW.size() && other.dM.size() == dM.size(),
          "Gradients::add: shape mismatch");
  tensor::axpy(1.0, other.dW.flat(), dW.flat());
  tensor::axpy(1.0, other.dM.flat(), dM.flat());
}

AdaGradState AdaGradState::fresh(const ModelParams& params, double epsilon) {
  return {Matrix(params.W.rows(), params.W.cols()), Matrix(params.M.rows(), params.M.cols()),
          epsilon};
}

namespace model {
namespace {

void window(const Matrix& mat, std::size_t start, std::size_t h, Vector& x) {
  const std::size_t k = mat.rows();
  x.resize(h * k);
  for (std::size_t j = 0; j < h; ++j)
    for (std::size_t d = 0; d < k; ++d) x[j * k + d] = mat(d, start + j);
}

}  // namespace

ModelParams init_params(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  ModelParams p{config, Matrix(config.l, config.h * config.k), Matrix(config.l, config.l)};
  Rng rng(seed);
  for (double& w : p.W.flat()) w = rng.uniform(-0.1, 0.1);
  for (double& m : p.M.flat()) m = rng.uniform(-0.1, 0.1);
  if (config.pooling == Pooling::Sum)
    for (double& m : p.M.flat()) m = 0.0;
  return p;
}

Encoding encode(const ModelParams& params, const Matrix& mat) {
  const std::size_t h = params.config.h;
  require(mat.rows() == params.config.k, "encode: sentence matrix rows must equal k");
  require(mat.cols() >= h, "encode: sentence matrix narrower than the window");
  const std::size_t windows = mat.cols() - h + 1;
  Matrix feature_map(params.config.l, windows);
  Vector x;
  for (std::size_t t = 0; t < windows; ++t) {
    window(mat, t, h, x);
    const Vector c = tensor::tanh_map(tensor::affine_window(params.W, x));
    for (std::size_t r = 0; r < c.size(); ++r) feature_map(r, t) = c[r];
  }
  auto pooled = tensor::max_over_time(feature_map);
  return {std::move(pooled.values), std::move(pooled.argmax)};
}

void encode_backward(const ModelParams& params, const Matrix& mat, const Encoding& enc,
                     std::span<const double> upstream, Matrix& dW) {
  require(upstream.size() == enc.value.size(), "encode_backward: upstream length mismatch");
  Vector x;
  for (std::size_t r = 0; r < enc.value.size(); ++r) {
    if (upstream[r] == 0.0) continue;
    const double v = enc.value[r];
    const double g = upstream[r] * (1.0 - v * v);
    window(mat, enc.argmax[r], params.config.h, x);
    tensor::axpy(g, x, dW.row(r));
  }
}

double relevance(const ModelParams& params, std::span<const double> v_s,
                 std::span<const double> v_q) {
  if (params.config.pooling == Pooling::Sum) return 0.5;
  // sigmoid rounds to exactly 0 or 1 once |z| passes roughly 37 (upper) or
  // 745 (lower); keep the weight strictly inside (0, 1).
  static const double lo = std::numeric_limits<double>::min();
  static const double hi = std::nextafter(1.0, 0.0);
  return std::clamp(tensor::sigmoid(tensor::bilinear(v_s, params.M, v_q)), lo, hi);
}

DocEmbedding doc_embedding(const ModelParams& params, std::span<const Vector> sentence_embs,
                           std::span<const double> v_q) {
  require(!sentence_embs.empty(), "doc_embedding: no sentences");
  DocEmbedding out{Vector(sentence_embs.front().size(), 0.0), {}};
  out.weights.reserve(sentence_embs.size());
  for (const auto& v : sentence_embs) {
    const double r = relevance(params, v, v_q);
    out.weights.push_back(r);
    tensor::axpy(r, v, out.doc);
  }
  return out;
}

double rank_score(std::span<const double> v_s, std::span<const double> v_d) {
  return tensor::cosine(v_s, v_d);
}

ClusterForward::ClusterForward(const ModelParams& params, std::span<const Matrix> sentences,
                               const Matrix& query)
    : params_(&params), sentences_(sentences), query_mat_(&query) {
  require(!sentences.empty(), "ClusterForward: cluster has no sentences");
  encodings_.reserve(sentences.size());
  embs_.reserve(sentences.size());
  for (const auto& m : sentences) {
    encodings_.push_back(encode(params, m));
    embs_.push_back(encodings_.back().value);
  }
  query_enc_ = encode(params, query);
  doc_ = doc_embedding(params, embs_, query_enc_.value);
}

double ClusterForward::cos(std::size_t i) const { return rank_score(embs_.at(i), doc_.doc); }

double ClusterForward::pair_loss(std::size_t pos, std::size_t neg, double margin) const {
  require(pos < size() && neg < size() && pos != neg, "pair_loss: invalid pair indices");
  return hinge(margin, cos(pos), cos(neg));
}

ClusterBackward::ClusterBackward(const ClusterForward& forward)
    : fwd_(&forward),
      d_doc_(forward.doc().doc.size(), 0.0),
      d_sent_(forward.size(), Vector(forward.doc().doc.size(), 0.0)) {}

double ClusterBackward::add_pair(std::size_t pos, std::size_t neg, double margin) {
  const double loss = fwd_->pair_loss(pos, neg, margin);
  if (loss <= 0.0) return 0.0;
  const auto& d = fwd_->doc().doc;
  tensor::cosine_backward(fwd_->embs_[pos], d, -1.0, d_sent_[pos], d_doc_);
  tensor::cosine_backward(fwd_->embs_[neg], d, 1.0, d_sent_[neg], d_doc_);
  any_ = true;
  return loss;
}

void ClusterBackward::finish(Gradients& grads) const {
  if (!any_) return;
  const ModelParams& params = fwd_->params();
  const bool attention = params.config.pooling == Pooling::Attention;
  const auto& v_q = fwd_->query_enc_.value;
  const auto& weights = fwd_->doc().weights;
  const Vector m_vq = attention ? tensor::affine_window(params.M, v_q) : Vector{};
  Vector d_query(v_q.size(), 0.0);

  for (std::size_t i = 0; i < fwd_->size(); ++i) {
    const auto& v_i = fwd_->embs_[i];
    Vector d_v = d_sent_[i];
    // doc = sum_i r_i v_i: the item path, then the weight path.
    tensor::axpy(weights[i], d_doc_, d_v);
    if (attention) {
      const double r = weights[i];
      const double dz = tensor::dot(d_doc_, v_i) * r * (1.0 - r);
      if (dz != 0.0) {
        tensor::add_outer(dz, v_i, v_q, grads.dM);
        tensor::axpy(dz, m_vq, d_v);
        tensor::axpy(dz, tensor::transpose_times(params.M, v_i), d_query);
      }
    }
    encode_backward(params, fwd_->sentences_[i], fwd_->encodings_[i], d_v, grads.dW);
  }
  if (attention) encode_backward(params, *fwd_->query_mat_, fwd_->query_enc_, d_query, grads.dW);
}

double pair_loss(const ModelParams& params, std::span<const Matrix> sentences,
                 const Matrix& query, std::size_t pos, std::size_t neg, double margin) {
  require(pos < sentences.size() && neg < sentences.size() && pos != neg,
          "pair_loss: invalid pair indices");
  return ClusterForward(params, sentences, query).pair_loss(pos, neg, margin);
}

PairGradient pair_backward(const ModelParams& params, std::span<const Matrix> sentences,
                           const Matrix& query, std::size_t pos, std::size_t neg,
                           double margin) {
  require(pos < sentences.size() && neg < sentences.size() && pos != neg,
          "pair_backward: invalid pair indices");
  ClusterForward fwd(params, sentences, query);
  ClusterBackward back(fwd);
  PairGradient out{back.add_pair(pos, neg, margin), Gradients::zeros_like(params)};
  back.finish(out.grads);
  return out;
}

void adagrad_step(ModelParams& params, AdaGradState& state, const Gradients& grads, double eta) {
  require(eta > 0.0, "adagrad_step: learning rate must be positive");
  auto update = [&](std::span<double> theta, std::span<double> acc, std::span<const double> g) {
    require(theta.size() == acc.size() && theta.size() == g.size(),
            "adagrad_step: shape mismatch");
    for (std::size_t i = 0; i < theta.size(); ++i) {
      acc[i] += g[i] * g[i];
      theta[i] -= eta * g[i] / std::sqrt(acc[i] + state.epsilon);
    }
  };
  update(params.W.flat(), state.gW_sq.flat(), grads.dW.flat());
  if (params.config.pooling == Pooling::Attention)
    update(params.M.flat(), state.gM_sq.flat(), grads.dM.flat());
}

void check_compatible(const ModelConfig& config, const EmbeddingTable& table) {
  if (config.k != table.dim())
    throw DimensionError("model expects word-embedding dim k=" + std::to_string(config.k) +
                         " but the embedding table has dim " + std::to_string(table.dim()));
}

}  // namespace model
}  // namespace attsum
