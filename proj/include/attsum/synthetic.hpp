#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "attsum/corpus.hpp"
#include "attsum/embed.hpp"

namespace attsum::synthetic {

// Toy query-focused corpus with a planted answer.
//
// Every cluster draws a topic. Its query is written with the topic's query
// words; its relevant sentences use the topic's content words (never the
// query words themselves), and its references are assembled from those
// relevant sentences. Distractors come in three kinds: a coherent
// off-topic background story, sentences that repeat query words inside
// noise, and pure noise. Relevant sentences are placed after the leading
// distractors of every document. Word vectors of one topic (query and
// content words alike) scatter around a shared centre; noise words are
// isotropic.
struct Config {
  std::uint64_t seed = 2016;
  std::size_t clusters = 20;
  std::size_t held_out = 5;
  std::size_t dim = 50;
  std::size_t topics = 8;
  std::size_t documents = 4;
  std::size_t relevant_per_doc = 3;
  std::size_t background_per_doc = 3;
  std::size_t bait_per_doc = 2;
  std::size_t noise_per_doc = 2;
  std::size_t references = 4;
  std::size_t min_words = 10, max_words = 16;
  double topic_spread = 0.35;  // per-word deviation from the topic centre
};

struct Corpus {
  std::vector<Cluster> train;
  std::vector<Cluster> test;
  EmbeddingTable table;
};

Corpus generate(const Config& config = {});

// <dir>/train/<cluster>/..., <dir>/test/<cluster>/..., <dir>/embeddings.txt
void write(const Corpus& corpus, const std::filesystem::path& dir);

}  // namespace attsum::synthetic
