// Writes the synthetic query-focused corpus used by the end-to-end tests:
//   <out>/train/<cluster>/, <out>/test/<cluster>/, <out>/embeddings.txt

#include <iostream>

#include "CLI11.hpp"
#include "attsum/error.hpp"
#include "attsum/synthetic.hpp"

int main(int argc, char** argv) {
  attsum::synthetic::Config config;
  std::string out;
  CLI::App app{"Generate a synthetic corpus with planted query-relevant sentences", "attsum-synth"};
  app.add_option("--out", out, "Output directory")->required();
  app.add_option("--seed", config.seed, "Random seed")->capture_default_str();
  app.add_option("--clusters", config.clusters, "Total clusters")->capture_default_str();
  app.add_option("--held-out", config.held_out, "Clusters written to test/")->capture_default_str();
  app.add_option("--dim", config.dim, "Word-vector dimension")->capture_default_str();
  app.add_option("--topics", config.topics, "Latent topics")->capture_default_str();
  CLI11_PARSE(app, argc, argv);
  try {
    const auto corpus = attsum::synthetic::generate(config);
    attsum::synthetic::write(corpus, out);
    std::cout << "wrote " << corpus.train.size() << " training and " << corpus.test.size()
              << " held-out clusters to " << out << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
