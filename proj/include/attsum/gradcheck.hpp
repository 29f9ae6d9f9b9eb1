#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "attsum/model.hpp"
#include "attsum/random.hpp"

namespace attsum::gradcheck {

// A small random pair-loss problem.
struct TinyInstance {
  ModelParams params;
  std::vector<Matrix> sentences;
  Matrix query;
  std::size_t pos = 0;
  std::size_t neg = 1;
  double margin = 0.5;
};

struct InstanceShape {
  std::size_t min_dim = 2, max_dim = 6;             // k and l
  std::size_t min_sentences = 2, max_sentences = 5;
  std::size_t min_tokens = 1, max_tokens = 7;
  std::size_t h = 2;
  double param_scale = 0.5;                         // params ~ U[-scale, scale]
};

TinyInstance random_instance(Rng& rng, const InstanceShape& shape = {});

// Smallest gap between the best and second-best window pre-activation over
// every feature row of every encoder call in the instance. Infinity when no
// row has two windows.
double min_pool_gap(const TinyInstance& inst);

struct Options {
  std::uint64_t seed = 0;
  int trials = 200;
  double epsilon = 1e-5;
  double threshold = 1e-4;
  double tie_tolerance = 1e-6;
};

struct Summary {
  int trials = 0;
  int resampled = 0;
  double max_rel_error = 0.0;
  std::string worst;  // "trial <t> W[r,c]" style
  bool passed = true;
};

// Checks pair_backward against central differences on `trials` random
// instances. Instances near a max-pool tie or the hinge kink are redrawn.
// Finite differences come from an independent long double forward pass.
Summary run(const Options& options);

}  // namespace attsum::gradcheck
