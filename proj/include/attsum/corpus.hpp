#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace attsum {

struct Token {
  std::string surface;
  std::string normalized;

  friend bool operator==(const Token&, const Token&) = default;
};

using TokenList = std::vector<Token>;

struct Sentence {
  std::string id;  // "<doc_id>:<position>"
  std::string doc_id;
  std::size_t position = 0;
  std::string text;  // original surface text
  TokenList tokens;

  friend bool operator==(const Sentence&, const Sentence&) = default;
};

struct Document {
  std::string id;
  std::vector<Sentence> sentences;
};

struct Query {
  TokenList tokens;
};

struct Cluster {
  std::string id;
  std::vector<Document> documents;
  Query query;
  std::vector<TokenList> references;
};

namespace corpus {

// Tokenization rules:
//  * split on Unicode whitespace;
//  * leading punctuation characters of a chunk become one-character tokens;
//  * trailing punctuation characters are peeled off the same way, except that
//    a final '.' stays attached to guarded abbreviations ("dr.", "etc.") and
//    dotted acronyms with two or more letter groups ("u.s.", "e.g.");
//  * internal punctuation is kept ("don't", "e-mail", "3.5");
//  * normalized form is the ASCII-lowercased surface.
TokenList tokenize(std::string_view text);

// Sentence boundaries sit after '.', '!' or '?' (plus any closing quotes or
// brackets) when followed by whitespace and then an uppercase letter or digit,
// optionally behind an opening quote or bracket. A '.' ending a guarded
// abbreviation or a single-capital initial ("J.") never ends a sentence.
// A blank line always ends a sentence. Results are trimmed; empty pieces are
// dropped.
std::vector<std::string> split_sentences(std::string_view text);

// Abbreviations (lowercase, with final '.') protected by both rules above.
const std::vector<std::string>& abbreviation_guard_list();

// A token counts as a word when it holds at least one letter or digit.
// Non-ASCII code points count as letters unless they are known punctuation.
bool is_word(const Token& token);
std::size_t word_count(const TokenList& tokens);

// Normalized forms of the word tokens, in order.
std::vector<std::string> words_of(const TokenList& tokens);

// Throws IngestError with the byte offset of the first invalid sequence.
void validate_utf8(std::string_view bytes, const std::string& source);

Cluster load_cluster(const std::filesystem::path& dir);

// Every subdirectory of `dir`, in lexicographic order.
std::vector<Cluster> load_corpus(const std::filesystem::path& dir);

// Writes the directory layout load_cluster reads. Sentences are separated by
// blank lines so reloading reproduces the same segmentation.
void write_cluster(const Cluster& cluster, const std::filesystem::path& dir);

// Document order, then position order.
std::vector<Sentence> compile_cluster(const Cluster& cluster);

// Surfaces joined by single spaces.
std::string join_surface(const TokenList& tokens);

}  // namespace corpus
}  // namespace attsum
