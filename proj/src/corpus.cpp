#include "attsum/corpus.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "attsum/error.hpp"

namespace attsum::corpus {
namespace {

namespace fs = std::filesystem;

struct CodePoint {
  char32_t cp;
  std::size_t offset;
  std::size_t length;
};

// Lenient decoder: an invalid byte becomes a one-byte code point U+FFFD.
std::vector<CodePoint> decode(std::string_view s) {
  std::vector<CodePoint> out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    std::size_t len = 1;
    char32_t cp = b0;
    if (b0 >= 0x80) {
      if ((b0 & 0xE0) == 0xC0) {
        len = 2;
        cp = b0 & 0x1F;
      } else if ((b0 & 0xF0) == 0xE0) {
        len = 3;
        cp = b0 & 0x0F;
      } else if ((b0 & 0xF8) == 0xF0) {
        len = 4;
        cp = b0 & 0x07;
      } else {
        len = 0;
      }
      if (len == 0 || i + len > s.size()) {
        out.push_back({U'�', i, 1});
        ++i;
        continue;
      }
      bool ok = true;
      for (std::size_t j = 1; j < len; ++j) {
        const auto b = static_cast<unsigned char>(s[i + j]);
        if ((b & 0xC0) != 0x80) {
          ok = false;
          break;
        }
        cp = (cp << 6) | (b & 0x3F);
      }
      if (!ok) {
        out.push_back({U'�', i, 1});
        ++i;
        continue;
      }
    }
    out.push_back({cp, i, len});
    i += len;
  }
  return out;
}

bool is_space(char32_t c) {
  return (c >= 0x09 && c <= 0x0D) || c == 0x20 || c == 0x85 || c == 0xA0 || c == 0x1680 ||
         (c >= 0x2000 && c <= 0x200A) || c == 0x2028 || c == 0x2029 || c == 0x202F ||
         c == 0x205F || c == 0x3000;
}

bool is_punct(char32_t c) {
  if (c < 0x80) {
    return (c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) || (c >= 0x5B && c <= 0x60) ||
           (c >= 0x7B && c <= 0x7E);
  }
  return c == 0xA1 || c == 0xA7 || c == 0xAB || c == 0xB6 || c == 0xB7 || c == 0xBB ||
         c == 0xBF || (c >= 0x2010 && c <= 0x2027) || (c >= 0x2030 && c <= 0x205E) ||
         (c >= 0x3001 && c <= 0x303F);
}

bool is_terminator(char32_t c) { return c == U'.' || c == U'!' || c == U'?'; }

bool is_closer(char32_t c) {
  return is_terminator(c) || c == U'"' || c == U'\'' || c == U')' || c == U']' ||
         c == U'”' || c == U'’' || c == U'»';
}

bool is_opener(char32_t c) {
  return c == U'"' || c == U'\'' || c == U'(' || c == U'[' || c == U'“' ||
         c == U'‘' || c == U'«';
}

bool is_upper_or_digit(char32_t c) { return (c >= U'A' && c <= U'Z') || (c >= U'0' && c <= U'9'); }

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& ch : out)
    if (ch >= 'A' && ch <= 'Z') ch = static_cast<char>(ch - 'A' + 'a');
  return out;
}

const std::set<std::string, std::less<>>& guard_set() {
  static const std::set<std::string, std::less<>> set = [] {
    const auto& list = abbreviation_guard_list();
    return std::set<std::string, std::less<>>(list.begin(), list.end());
  }();
  return set;
}

// "u.s.", "e.g.", "u.s.a." : two or more single-letter groups each closed by '.'.
bool is_dotted_acronym(std::string_view lower) {
  if (lower.size() < 4 || lower.size() % 2 != 0) return false;
  for (std::size_t i = 0; i < lower.size(); i += 2) {
    const char c = lower[i];
    if (!(c >= 'a' && c <= 'z') || lower[i + 1] != '.') return false;
  }
  return true;
}

bool is_guarded(std::string_view word) {
  const std::string lower = ascii_lower(word);
  return guard_set().count(lower) != 0 || is_dotted_acronym(lower);
}

Token make_token(std::string_view surface) {
  return Token{std::string(surface), ascii_lower(surface)};
}

void tokenize_chunk(std::string_view text, const std::vector<CodePoint>& cps, std::size_t begin,
                    std::size_t end, TokenList& out) {
  auto bytes = [&](std::size_t a, std::size_t b) {
    const std::size_t from = cps[a].offset;
    const std::size_t to = cps[b - 1].offset + cps[b - 1].length;
    return text.substr(from, to - from);
  };
  while (begin < end && is_punct(cps[begin].cp)) {
    out.push_back(make_token(bytes(begin, begin + 1)));
    ++begin;
  }
  std::vector<Token> trailing;
  while (end > begin && is_punct(cps[end - 1].cp)) {
    if (cps[end - 1].cp == U'.' && is_guarded(bytes(begin, end))) break;
    trailing.push_back(make_token(bytes(end - 1, end)));
    --end;
  }
  if (end > begin) out.push_back(make_token(bytes(begin, end)));
  out.insert(out.end(), trailing.rbegin(), trailing.rend());
}

std::string collapse_whitespace(std::string_view s) {
  const auto cps = decode(s);
  std::string out;
  bool pending_space = false;
  for (const auto& c : cps) {
    if (is_space(c.cp)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.append(s.substr(c.offset, c.length));
  }
  return out;
}

// Word ending at code point `last` (inclusive), from the preceding whitespace,
// with leading punctuation stripped.
std::string_view word_ending_at(std::string_view text, const std::vector<CodePoint>& cps,
                                std::size_t last) {
  std::size_t first = last;
  while (first > 0 && !is_space(cps[first - 1].cp)) --first;
  while (first < last && is_punct(cps[first].cp)) ++first;
  const std::size_t from = cps[first].offset;
  const std::size_t to = cps[last].offset + cps[last].length;
  return text.substr(from, to - from);
}

bool is_single_initial(std::string_view word) {
  return word.size() == 2 && word[0] >= 'A' && word[0] <= 'Z' && word[0] != 'I' && word[1] == '.';
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string read_text_file(const fs::path& path) {
  std::string content = read_file(path);
  validate_utf8(content, path.string());
  return content;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IngestError("cannot write " + path.string());
  out << content;
  if (!out) throw IngestError("failed writing " + path.string());
}

std::vector<fs::path> text_files(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".txt") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  return files;
}

}  // namespace

const std::vector<std::string>& abbreviation_guard_list() {
  static const std::vector<std::string> list = {
      "mr.",   "mrs.",  "ms.",   "dr.",   "prof.", "st.",   "jr.",   "sr.",   "sen.",
      "rep.",  "gov.",  "gen.",  "col.",  "lt.",   "sgt.",  "capt.", "cmdr.", "adm.",
      "hon.",  "rev.",  "pres.", "vs.",   "etc.",  "inc.",  "ltd.",  "co.",   "corp.",
      "bros.", "dept.", "univ.", "assn.", "no.",   "nos.",  "vol.",  "fig.",  "approx.",
      "jan.",  "feb.",  "mar.",  "apr.",  "jun.",  "jul.",  "aug.",  "sep.",  "sept.",
      "oct.",  "nov.",  "dec.",  "ft.",   "mt.",   "ave.",  "blvd.", "rd.",   "cf.",
      "al.",   "ca.",   "p.m.",  "a.m.",
  };
  return list;
}

TokenList tokenize(std::string_view text) {
  TokenList out;
  const auto cps = decode(text);
  std::size_t i = 0;
  while (i < cps.size()) {
    while (i < cps.size() && is_space(cps[i].cp)) ++i;
    std::size_t j = i;
    while (j < cps.size() && !is_space(cps[j].cp)) ++j;
    if (j > i) tokenize_chunk(text, cps, i, j, out);
    i = j;
  }
  return out;
}

std::vector<std::string> split_sentences(std::string_view text) {
  const auto cps = decode(text);
  std::vector<std::string> out;
  auto emit = [&](std::size_t a, std::size_t b) {
    if (b <= a) return;
    const std::size_t from = cps[a].offset;
    const std::size_t to = cps[b - 1].offset + cps[b - 1].length;
    std::string piece = collapse_whitespace(text.substr(from, to - from));
    if (!piece.empty()) out.push_back(std::move(piece));
  };

  std::size_t start = 0;
  std::size_t i = 0;
  const std::size_t n = cps.size();
  while (i < n) {
    const char32_t c = cps[i].cp;
    if (c == U'\n') {
      std::size_t m = i;
      int newlines = 0;
      while (m < n && is_space(cps[m].cp)) {
        if (cps[m].cp == U'\n') ++newlines;
        ++m;
      }
      if (newlines >= 2) {
        emit(start, i);
        start = m;
        i = m;
        continue;
      }
      i = m;
      continue;
    }
    if (!is_terminator(c)) {
      ++i;
      continue;
    }
    std::size_t last = i;
    while (last + 1 < n && is_terminator(cps[last + 1].cp)) ++last;
    std::size_t j = last + 1;
    while (j < n && is_closer(cps[j].cp)) ++j;
    if (j >= n || !is_space(cps[j].cp)) {
      i = j;
      continue;
    }
    std::size_t m = j;
    while (m < n && is_space(cps[m].cp)) ++m;
    while (m < n && is_opener(cps[m].cp)) ++m;
    bool boundary = m < n && is_upper_or_digit(cps[m].cp);
    if (boundary && cps[last].cp == U'.' && last == i) {
      const std::string_view word = word_ending_at(text, cps, last);
      if (is_guarded(word) || is_single_initial(word)) boundary = false;
    }
    if (boundary) {
      emit(start, j);
      start = j;
    }
    i = j;
  }
  emit(start, n);
  return out;
}

bool is_word(const Token& token) {
  for (const auto& c : decode(token.normalized)) {
    if (c.cp < 0x80) {
      const char32_t x = c.cp;
      if ((x >= U'a' && x <= U'z') || (x >= U'A' && x <= U'Z') || (x >= U'0' && x <= U'9'))
        return true;
    } else if (!is_punct(c.cp) && !is_space(c.cp)) {
      return true;
    }
  }
  return false;
}

std::size_t word_count(const TokenList& tokens) {
  return static_cast<std::size_t>(std::count_if(tokens.begin(), tokens.end(), is_word));
}

std::vector<std::string> words_of(const TokenList& tokens) {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens)
    if (is_word(t)) out.push_back(t.normalized);
  return out;
}

void validate_utf8(std::string_view bytes, const std::string& source) {
  std::size_t i = 0;
  auto fail = [&](std::size_t at) {
    throw IngestError("invalid UTF-8 in " + source + " at byte offset " + std::to_string(at));
  };
  while (i < bytes.size()) {
    const auto b0 = static_cast<unsigned char>(bytes[i]);
    if (b0 < 0x80) {
      ++i;
      continue;
    }
    std::size_t len;
    char32_t cp;
    if (b0 >= 0xC2 && b0 <= 0xDF) {
      len = 2;
      cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
      len = 3;
      cp = b0 & 0x0F;
    } else if (b0 >= 0xF0 && b0 <= 0xF4) {
      len = 4;
      cp = b0 & 0x07;
    } else {
      fail(i);
    }
    if (i + len > bytes.size()) fail(i);
    for (std::size_t j = 1; j < len; ++j) {
      const auto b = static_cast<unsigned char>(bytes[i + j]);
      if ((b & 0xC0) != 0x80) fail(i);
      cp = (cp << 6) | (b & 0x3F);
    }
    const bool overlong = (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000);
    if (overlong || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) fail(i);
    i += len;
  }
}

Cluster load_cluster(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IngestError("cluster directory not found: " + dir.string());
  Cluster cluster;
  cluster.id = dir.filename().string();
  if (cluster.id.empty()) cluster.id = dir.parent_path().filename().string();

  const fs::path query_path = dir / "query.txt";
  if (!fs::is_regular_file(query_path)) throw IngestError("missing query: " + query_path.string());
  cluster.query.tokens = tokenize(read_text_file(query_path));
  if (cluster.query.tokens.empty()) throw IngestError("empty query: " + query_path.string());

  const fs::path docs_dir = dir / "docs";
  std::vector<fs::path> doc_files;
  if (fs::is_directory(docs_dir)) doc_files = text_files(docs_dir);
  if (doc_files.empty()) throw IngestError("empty docs/ directory: " + docs_dir.string());
  for (const auto& path : doc_files) {
    Document doc;
    doc.id = path.stem().string();
    for (auto& text : split_sentences(read_text_file(path))) {
      TokenList tokens = tokenize(text);
      if (tokens.empty()) continue;
      Sentence s;
      s.doc_id = doc.id;
      s.position = doc.sentences.size();
      s.id = doc.id + ":" + std::to_string(s.position);
      s.text = std::move(text);
      s.tokens = std::move(tokens);
      doc.sentences.push_back(std::move(s));
    }
    cluster.documents.push_back(std::move(doc));
  }

  const fs::path refs_dir = dir / "refs";
  if (fs::is_directory(refs_dir))
    for (const auto& path : text_files(refs_dir))
      cluster.references.push_back(tokenize(read_text_file(path)));
  return cluster;
}

std::vector<Cluster> load_corpus(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IngestError("corpus directory not found: " + dir.string());
  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_directory()) dirs.push_back(entry.path());
  std::sort(dirs.begin(), dirs.end());
  std::vector<Cluster> out;
  out.reserve(dirs.size());
  for (const auto& d : dirs) out.push_back(load_cluster(d));
  return out;
}

void write_cluster(const Cluster& cluster, const fs::path& dir) {
  fs::create_directories(dir / "docs");
  write_file(dir / "query.txt", join_surface(cluster.query.tokens) + "\n");
  for (const auto& doc : cluster.documents) {
    std::string body;
    for (const auto& s : doc.sentences) {
      if (!body.empty()) body += "\n\n";
      body += s.text;
    }
    write_file(dir / "docs" / (doc.id + ".txt"), body + "\n");
  }
  if (!cluster.references.empty()) {
    fs::create_directories(dir / "refs");
    for (std::size_t r = 0; r < cluster.references.size(); ++r) {
      char name[32];
      std::snprintf(name, sizeof name, "ref%03zu.txt", r);
      write_file(dir / "refs" / name, join_surface(cluster.references[r]) + "\n");
    }
  }
}

std::vector<Sentence> compile_cluster(const Cluster& cluster) {
  std::vector<Sentence> out;
  for (const auto& doc : cluster.documents)
    out.insert(out.end(), doc.sentences.begin(), doc.sentences.end());
  return out;
}

std::string join_surface(const TokenList& tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out.push_back(' ');
    out += t.surface;
  }
  return out;
}

}  // namespace attsum::corpus
