#include "attsum/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "attsum/error.hpp"

namespace attsum::gradcheck {
namespace {

Matrix random_sentence(Rng& rng, std::size_t k, std::size_t tokens, std::size_t h) {
  Matrix m(k, std::max(tokens, h));
  for (std::size_t c = 0; c < tokens; ++c)
    for (std::size_t d = 0; d < k; ++d) m(d, c) = rng.normal();
  return m;
}

std::size_t draw(Rng& rng, std::size_t lo, std::size_t hi) { return lo + rng.index(hi - lo + 1); }

double pool_gap(const Matrix& W, const Matrix& mat, std::size_t h) {
  const std::size_t k = mat.rows();
  const std::size_t windows = mat.cols() - h + 1;
  if (windows < 2) return std::numeric_limits<double>::infinity();
  Matrix pre(W.rows(), windows);
  Vector x(h * k);
  for (std::size_t t = 0; t < windows; ++t) {
    for (std::size_t j = 0; j < h; ++j)
      for (std::size_t d = 0; d < k; ++d) x[j * k + d] = mat(d, t + j);
    const Vector a = tensor::affine_window(W, x);
    for (std::size_t r = 0; r < a.size(); ++r) pre(r, t) = a[r];
  }
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < pre.rows(); ++r) {
    std::vector<double> row(pre.row(r).begin(), pre.row(r).end());
    std::partial_sort(row.begin(), row.begin() + 2, row.end(), std::greater<>());
    gap = std::min(gap, row[0] - row[1]);
  }
  return gap;
}

double max_abs_input(const TinyInstance& inst) {
  double m = 0.0;
  auto scan = [&](const Matrix& mat) {
    for (double x : mat.flat()) m = std::max(m, std::abs(x));
  };
  for (const auto& s : inst.sentences) scan(s);
  scan(inst.query);
  return m;
}

std::string coordinate_name(const ModelParams& p, std::size_t i) {
  const Matrix& m = i < p.W.size() ? p.W : p.M;
  const std::size_t j = i < p.W.size() ? i : i - p.W.size();
  return std::string(i < p.W.size() ? "W[" : "M[") + std::to_string(j / m.cols()) + "," +
         std::to_string(j % m.cols()) + "]";
}

// Reference forward pass in long double, written independently of the model
// code. theta is [W row-major, M row-major].
using Ld = long double;
using LdVec = std::vector<Ld>;

LdVec ref_encode(std::span<const double> theta, std::size_t l, std::size_t h, const Matrix& s) {
  const std::size_t k = s.rows();
  const std::size_t windows = s.cols() - h + 1;
  LdVec best(l, -std::numeric_limits<Ld>::infinity());
  for (std::size_t r = 0; r < l; ++r) {
    for (std::size_t t = 0; t < windows; ++t) {
      Ld a = 0.0L;
      for (std::size_t j = 0; j < h; ++j)
        for (std::size_t d = 0; d < k; ++d)
          a += static_cast<Ld>(theta[r * h * k + j * k + d]) * s(d, t + j);
      best[r] = std::max(best[r], std::tanh(a));
    }
  }
  return best;
}

Ld ref_cosine(const LdVec& u, const LdVec& v) {
  Ld uv = 0.0L, uu = 0.0L, vv = 0.0L;
  for (std::size_t i = 0; i < u.size(); ++i) {
    uv += u[i] * v[i];
    uu += u[i] * u[i];
    vv += v[i] * v[i];
  }
  if (std::sqrt(uu) < 1e-12L || std::sqrt(vv) < 1e-12L) return 0.0L;
  return uv / std::sqrt(uu * vv);
}

Ld ref_pair_loss(const TinyInstance& inst, std::span<const double> theta) {
  const std::size_t l = inst.params.config.l;
  const std::size_t h = inst.params.config.h;
  const std::size_t k = inst.params.config.k;
  const auto m = theta.subspan(l * h * k);
  const LdVec q = ref_encode(theta, l, h, inst.query);
  LdVec mq(l, 0.0L);
  for (std::size_t r = 0; r < l; ++r)
    for (std::size_t c = 0; c < l; ++c) mq[r] += static_cast<Ld>(m[r * l + c]) * q[c];
  std::vector<LdVec> v;
  LdVec doc(l, 0.0L);
  for (const auto& s : inst.sentences) {
    v.push_back(ref_encode(theta, l, h, s));
    Ld z = 0.0L;
    for (std::size_t r = 0; r < l; ++r) z += v.back()[r] * mq[r];
    const Ld w = 1.0L / (1.0L + std::exp(-z));
    for (std::size_t r = 0; r < l; ++r) doc[r] += w * v.back()[r];
  }
  const Ld slack = static_cast<Ld>(inst.margin) - ref_cosine(v[inst.pos], doc) +
                   ref_cosine(v[inst.neg], doc);
  return std::max(0.0L, slack);
}

}  // namespace

TinyInstance random_instance(Rng& rng, const InstanceShape& shape) {
  TinyInstance inst;
  ModelConfig config;
  config.h = shape.h;
  config.k = draw(rng, shape.min_dim, shape.max_dim);
  config.l = draw(rng, shape.min_dim, shape.max_dim);
  inst.params = ModelParams{config, Matrix(config.l, config.h * config.k), Matrix(config.l, config.l)};
  for (double& w : inst.params.W.flat()) w = rng.uniform(-shape.param_scale, shape.param_scale);
  for (double& m : inst.params.M.flat()) m = rng.uniform(-shape.param_scale, shape.param_scale);
  const std::size_t n = draw(rng, shape.min_sentences, shape.max_sentences);
  for (std::size_t i = 0; i < n; ++i)
    inst.sentences.push_back(
        random_sentence(rng, config.k, draw(rng, shape.min_tokens, shape.max_tokens), config.h));
  inst.query = random_sentence(rng, config.k, draw(rng, shape.min_tokens, shape.max_tokens), config.h);
  inst.pos = rng.index(n);
  inst.neg = (inst.pos + 1 + rng.index(n - 1)) % n;
  return inst;
}

double min_pool_gap(const TinyInstance& inst) {
  double gap = pool_gap(inst.params.W, inst.query, inst.params.config.h);
  for (const auto& s : inst.sentences)
    gap = std::min(gap, pool_gap(inst.params.W, s, inst.params.config.h));
  return gap;
}

Summary run(const Options& options) {
  require(options.trials >= 0, "gradcheck: trials must be non-negative");
  require(options.epsilon > 0.0, "gradcheck: epsilon must be positive");
  Rng rng(options.seed);
  Summary summary;
  for (int trial = 0; trial < options.trials; ++trial) {
    TinyInstance inst;
    for (;;) {
      inst = random_instance(rng);
      // A perturbation of one W entry moves a pre-activation by at most
      // epsilon * |x|, so any gap within 2 * epsilon * max|x| may flip.
      const double flip = 2.0 * options.epsilon * max_abs_input(inst);
      const bool tie = min_pool_gap(inst) <= std::max(options.tie_tolerance, flip);
      model::ClusterForward fwd(inst.params, inst.sentences, inst.query);
      const double slack = inst.margin - fwd.cos(inst.pos) + fwd.cos(inst.neg);
      if (!tie && slack > 1e-3) break;
      ++summary.resampled;
    }
    const auto analytic =
        model::pair_backward(inst.params, inst.sentences, inst.query, inst.pos, inst.neg, inst.margin);
    std::vector<double> theta(inst.params.W.flat().begin(), inst.params.W.flat().end());
    theta.insert(theta.end(), inst.params.M.flat().begin(), inst.params.M.flat().end());
    std::vector<double> grad(analytic.grads.dW.flat().begin(), analytic.grads.dW.flat().end());
    grad.insert(grad.end(), analytic.grads.dM.flat().begin(), analytic.grads.dM.flat().end());

    auto loss = [&](std::span<const double> t) { return ref_pair_loss(inst, t); };
    const auto report = tensor::grad_check(
        loss, theta, grad, options.epsilon, options.threshold,
        [&](std::size_t i) { return coordinate_name(inst.params, i); });
    ++summary.trials;
    if (summary.worst.empty() || report.max_rel_error > summary.max_rel_error) {
      summary.max_rel_error = report.max_rel_error;
      summary.worst = "trial " + std::to_string(trial) + " " + report.worst_parameter;
    }
  }
  summary.passed = summary.max_rel_error < options.threshold;
  return summary;
}

}  // namespace attsum::gradcheck
