#include "attsum/embed.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string_view>

#include "attsum/error.hpp"

namespace attsum {

bool EmbeddingTable::insert(const std::string& word, std::span<const double> vec) {
  require(vec.size() == dim_, "EmbeddingTable::insert: vector length differs from dim");
  if (index_.count(word) != 0) return false;
  index_.emplace(word, words_.size());
  words_.push_back(word);
  values_.insert(values_.end(), vec.begin(), vec.end());
  return true;
}

std::span<const double> EmbeddingTable::lookup(const std::string& normalized) const {
  const auto it = index_.find(normalized);
  if (it == index_.end()) return zeros_;
  return {values_.data() + it->second * dim_, dim_};
}

namespace embed {
namespace {

std::vector<std::string_view> fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

bool parse_unsigned(std::string_view s, std::size_t& out) {
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

bool parse_double(std::string_view s, double& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

}  // namespace

EmbeddingTable parse_embeddings(const std::string& content) {
  std::istringstream in(content);
  std::string line;
  std::size_t line_no = 0;
  std::size_t dim = 0;
  std::size_t header_dim = 0;
  bool first_content = true;
  EmbeddingTable table;
  std::vector<double> vec;
  while (std::getline(in, line)) {
    ++line_no;
    const auto f = fields(line);
    if (f.empty()) continue;
    if (first_content) {
      first_content = false;
      std::size_t count = 0;
      if (f.size() == 2 && parse_unsigned(f[0], count) && parse_unsigned(f[1], header_dim)) continue;
      header_dim = 0;
    }
    if (f.size() < 2)
      throw FormatError("embeddings line " + std::to_string(line_no) + ": missing vector");
    const std::size_t len = f.size() - 1;
    if (dim == 0) {
      if (header_dim != 0 && header_dim != len)
        throw FormatError("embeddings line " + std::to_string(line_no) + ": vector length " +
                          std::to_string(len) + " disagrees with header dim " +
                          std::to_string(header_dim));
      dim = len;
      table = EmbeddingTable(dim);
    } else if (len != dim) {
      throw FormatError("embeddings line " + std::to_string(line_no) + ": expected " +
                        std::to_string(dim) + " components, found " + std::to_string(len));
    }
    vec.resize(dim);
    for (std::size_t i = 0; i < dim; ++i)
      if (!parse_double(f[i + 1], vec[i]))
        throw FormatError("embeddings line " + std::to_string(line_no) +
                          ": non-numeric component '" + std::string(f[i + 1]) + "'");
    table.insert(std::string(f[0]), vec);
  }
  if (dim == 0) throw FormatError("embeddings: no vectors found");
  return table;
}

EmbeddingTable load_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot read embeddings " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_embeddings(ss.str());
}

void save_embeddings(const EmbeddingTable& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write embeddings " + path.string());
  out << table.size() << ' ' << table.dim() << '\n';
  char buf[32];
  table.for_each([&](const std::string& word, std::span<const double> v) {
    out << word;
    for (double x : v) {
      std::snprintf(buf, sizeof buf, "%.17g", x);
      out << ' ' << buf;
    }
    out << '\n';
  });
}

Matrix sentence_matrix(const EmbeddingTable& table, const TokenList& tokens, std::size_t h) {
  require(h >= 1, "sentence_matrix: window size must be >= 1");
  const std::size_t width = std::max(tokens.size(), h);
  Matrix m(table.dim(), width);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto v = table.lookup(tokens[i]);
    for (std::size_t d = 0; d < v.size(); ++d) m(d, i) = v[d];
  }
  return m;
}

}  // namespace embed
}  // namespace attsum
