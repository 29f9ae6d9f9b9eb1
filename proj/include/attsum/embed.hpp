#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "attsum/corpus.hpp"
#include "attsum/tensor.hpp"

namespace attsum {

// Frozen word vectors. Immutable after construction.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  explicit EmbeddingTable(std::size_t dim) : dim_(dim), zeros_(dim, 0.0) {}

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return index_.size(); }
  bool contains(const std::string& word) const { return index_.count(word) != 0; }

  // Returns false (and keeps the existing vector) for a duplicate word.
  bool insert(const std::string& word, std::span<const double> vec);

  // Stored vector for the normalized word, or zeros when out of vocabulary.
  std::span<const double> lookup(const std::string& normalized) const;
  std::span<const double> lookup(const Token& token) const { return lookup(token.normalized); }

  // Invokes fn(word, vector) in insertion order.
  template <typename Fn>
  void for_each(Fn&& fn) const {
    for (std::size_t i = 0; i < words_.size(); ++i)
      fn(words_[i], std::span<const double>(values_.data() + i * dim_, dim_));
  }

 private:
  std::size_t dim_ = 0;
  std::vector<std::string> words_;
  std::vector<double> values_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<double> zeros_;
};

namespace embed {

// Text format: optional "<count> <dim>" header, then "word c1 ... ck" lines.
EmbeddingTable load_embeddings(const std::filesystem::path& path);
EmbeddingTable parse_embeddings(const std::string& content);

void save_embeddings(const EmbeddingTable& table, const std::filesystem::path& path);

// k x max(n, h) matrix; column i is the vector of token i, pad columns are 0.
Matrix sentence_matrix(const EmbeddingTable& table, const TokenList& tokens, std::size_t h);

}  // namespace embed
}  // namespace attsum
