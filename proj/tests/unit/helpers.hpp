#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "attsum/corpus.hpp"

namespace testutil {

namespace fs = std::filesystem;

// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            ("attsum_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline void write_file(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << content;
}

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::vector<std::string> normalized(const attsum::TokenList& tokens) {
  std::vector<std::string> out;
  for (const auto& t : tokens) out.push_back(t.normalized);
  return out;
}

inline std::vector<std::string> split_words(const std::string& text) {
  return attsum::corpus::words_of(attsum::corpus::tokenize(text));
}

// Cluster built in memory, one document per entry in `docs`, each document
// holding the given sentences.
inline attsum::Cluster make_cluster(const std::string& id,
                                    const std::vector<std::vector<std::string>>& docs,
                                    const std::string& query,
                                    const std::vector<std::string>& refs = {}) {
  attsum::Cluster c;
  c.id = id;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    attsum::Document doc;
    doc.id = "d" + std::to_string(d);
    for (std::size_t p = 0; p < docs[d].size(); ++p) {
      attsum::Sentence s;
      s.doc_id = doc.id;
      s.position = p;
      s.id = doc.id + ":" + std::to_string(p);
      s.text = docs[d][p];
      s.tokens = attsum::corpus::tokenize(docs[d][p]);
      doc.sentences.push_back(std::move(s));
    }
    c.documents.push_back(std::move(doc));
  }
  c.query.tokens = attsum::corpus::tokenize(query);
  for (const auto& r : refs) c.references.push_back(attsum::corpus::tokenize(r));
  return c;
}

}  // namespace testutil
