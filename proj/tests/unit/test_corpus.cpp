#include <string>
#include <vector>

#include "attsum/corpus.hpp"
#include "attsum/error.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace attsum;
using testutil::normalized;

namespace {

using Words = std::vector<std::string>;

std::vector<std::string> surfaces(const TokenList& tokens) {
  std::vector<std::string> out;
  for (const auto& t : tokens) out.push_back(t.surface);
  return out;
}

}  // namespace

TEST_CASE("tokenize: basic sentence and empty input") {
  CHECK(normalized(corpus::tokenize("Drug prices have soared.")) ==
        Words{"drug", "prices", "have", "soared", "."});
  CHECK(corpus::tokenize("").empty());
  CHECK(corpus::tokenize(" \t\n ").empty());
  CHECK(normalized(corpus::tokenize("U.S. policy")) == Words{"u.s.", "policy"});
}

TEST_CASE("tokenize: punctuation table") {
  struct Case {
    const char* text;
    Words expected;
  };
  // Each row follows the peeling rules by hand.
  const std::vector<Case> table = {
      {"Dr. Smith", {"dr.", "smith"}},
      {"(hello)", {"(", "hello", ")"}},
      {"\"Quoted,\" he said.", {"\"", "quoted", ",", "\"", "he", "said", "."}},
      {"don't", {"don't"}},
      {"e-mail", {"e-mail"}},
      {"3.5%", {"3.5", "%"}},
      {"end!", {"end", "!"}},
      {"what?!", {"what", "?", "!"}},
      {"etc.", {"etc."}},
      {"e.g.", {"e.g."}},
      {"hi...", {"hi", ".", ".", "."}},
      {"--dash", {"-", "-", "dash"}},
      {"[1]", {"[", "1", "]"}},
      {"A.B.C.", {"a.b.c."}},
      {"U.S.A.)", {"u.s.a.", ")"}},
      {"J.", {"j", "."}},
      {"end.\"", {"end", ".", "\""}},
      {"'tis", {"'", "tis"}},
      {"caf\xc3\xa9,", {"caf\xc3\xa9", ","}},
      {"\xc2\xab" "bonjour\xc2\xbb", {"\xc2\xab", "bonjour", "\xc2\xbb"}},
      {"\xe2\x80\x9cHi\xe2\x80\x9d", {"\xe2\x80\x9c", "hi", "\xe2\x80\x9d"}},
      {",,", {",", ","}},
  };
  for (const auto& c : table) {
    CAPTURE(c.text);
    CHECK(normalized(corpus::tokenize(c.text)) == c.expected);
  }
}

TEST_CASE("tokenize: surface keeps case, normalized is lowercase without whitespace") {
  const auto tokens = corpus::tokenize("The  QUICK\tBrown\nFox.");
  CHECK(surfaces(tokens) == Words{"The", "QUICK", "Brown", "Fox", "."});
  CHECK(normalized(tokens) == Words{"the", "quick", "brown", "fox", "."});
  for (const auto& t : tokens) {
    CHECK_FALSE(t.normalized.empty());
    CHECK(t.normalized.find_first_of(" \t\n") == std::string::npos);
  }
}

TEST_CASE("tokenize: idempotent on normalized single tokens") {
  for (const char* text : {"Drug prices have soared.", "A quick (brown) fox!", "Hunan province"}) {
    for (const auto& t : corpus::tokenize(text)) {
      const auto again = corpus::tokenize(t.normalized);
      REQUIRE(again.size() == 1);
      CHECK(again[0].normalized == t.normalized);
      CHECK(again[0].surface == t.normalized);
    }
  }
}

TEST_CASE("split_sentences: documented examples") {
  CHECK(corpus::split_sentences("A b. C d.") == Words{"A b.", "C d."});
  CHECK(corpus::split_sentences("One sentence") == Words{"One sentence"});
  CHECK(corpus::split_sentences("Dr. Smith left. He ran.") == Words{"Dr. Smith left.", "He ran."});
}

TEST_CASE("split_sentences: guards, closers, digits and blank lines") {
  CHECK(corpus::split_sentences("He said \"Stop.\" Then left.") ==
        Words{"He said \"Stop.\"", "Then left."});
  CHECK(corpus::split_sentences("J. Smith went. 3 left.") == Words{"J. Smith went.", "3 left."});
  CHECK(corpus::split_sentences("Hi! (Yes.) No?") == Words{"Hi!", "(Yes.)", "No?"});
  CHECK(corpus::split_sentences("U.S. Army left. It was.") == Words{"U.S. Army left.", "It was."});
  CHECK(corpus::split_sentences("end. lower start") == Words{"end. lower start"});
  CHECK(corpus::split_sentences("first part\n\nsecond part") == Words{"first part", "second part"});
  CHECK(corpus::split_sentences("wrapped\nline. Next one") == Words{"wrapped line.", "Next one"});
  CHECK(corpus::split_sentences("").empty());
  CHECK(corpus::split_sentences("\n\n  \n").empty());
}

TEST_CASE("split_sentences: every guarded abbreviation blocks a boundary") {
  for (const auto& abbr : corpus::abbreviation_guard_list()) {
    std::string cap = abbr;
    cap[0] = static_cast<char>(cap[0] - 'a' + 'A');
    const std::string text = "See " + cap + " Next word.";
    CAPTURE(text);
    CHECK(corpus::split_sentences(text).size() == 1);
  }
}

TEST_CASE("word rule: only tokens with a letter or digit count") {
  const auto tokens = corpus::tokenize("Hello , world -- 42 !");
  CHECK(corpus::word_count(tokens) == 3);
  CHECK(corpus::words_of(tokens) == Words{"hello", "world", "42"});
  CHECK(corpus::is_word(Token{"\xc3\xa9t\xc3\xa9", "\xc3\xa9t\xc3\xa9"}));
  CHECK_FALSE(corpus::is_word(Token{"\xe2\x80\x94", "\xe2\x80\x94"}));
}

TEST_CASE("validate_utf8 reports the byte offset") {
  CHECK_NOTHROW(corpus::validate_utf8("plain caf\xc3\xa9", "x"));
  try {
    corpus::validate_utf8("abc\xff" "def", "file.txt");
    FAIL("expected IngestError");
  } catch (const IngestError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("file.txt") != std::string::npos);
    CHECK(msg.find("3") != std::string::npos);
  }
  CHECK_THROWS_AS(corpus::validate_utf8("\xc3", "x"), IngestError);
  CHECK_THROWS_AS(corpus::validate_utf8("\xc0\xaf", "x"), IngestError);
}

TEST_CASE("load_cluster: well-formed directory") {
  testutil::TempDir tmp;
  const auto dir = tmp / "d0701";
  testutil::write_file(dir / "query.txt", "What happened to drug prices?\n");
  testutil::write_file(dir / "docs" / "b.txt", "Second doc here. It has two sentences.");
  testutil::write_file(dir / "docs" / "a.txt", "Drug prices have soared. Officials worry.");
  testutil::write_file(dir / "docs" / "notes.md", "ignored");
  testutil::write_file(dir / "refs" / "r1.txt", "Drug prices soared.");

  const Cluster c = corpus::load_cluster(dir);
  CHECK(c.id == "d0701");
  REQUIRE(c.documents.size() == 2);
  CHECK(c.documents[0].id == "a");
  CHECK(c.documents[1].id == "b");
  REQUIRE(c.documents[0].sentences.size() == 2);
  const Sentence& s = c.documents[0].sentences[1];
  CHECK(s.doc_id == "a");
  CHECK(s.position == 1);
  CHECK(s.id == "a:1");
  CHECK(s.text == "Officials worry.");
  CHECK(normalized(c.query.tokens) == Words{"what", "happened", "to", "drug", "prices", "?"});
  REQUIRE(c.references.size() == 1);
  CHECK(normalized(c.references[0]) == Words{"drug", "prices", "soared", "."});
}

TEST_CASE("load_cluster: optional refs and error cases") {
  testutil::TempDir tmp;
  const auto ok = tmp / "noref";
  testutil::write_file(ok / "query.txt", "Query?");
  testutil::write_file(ok / "docs" / "a.txt", "Only one sentence.");
  CHECK(corpus::load_cluster(ok).references.empty());

  const auto noq = tmp / "noquery";
  testutil::write_file(noq / "docs" / "a.txt", "Text.");
  try {
    corpus::load_cluster(noq);
    FAIL("expected IngestError");
  } catch (const IngestError& e) {
    CHECK(std::string(e.what()).find("missing query") != std::string::npos);
    CHECK(std::string(e.what()).find("query.txt") != std::string::npos);
  }

  const auto nodocs = tmp / "nodocs";
  testutil::write_file(nodocs / "query.txt", "Query?");
  std::filesystem::create_directories(nodocs / "docs");
  try {
    corpus::load_cluster(nodocs);
    FAIL("expected IngestError");
  } catch (const IngestError& e) {
    CHECK(std::string(e.what()).find("docs") != std::string::npos);
  }

  const auto bad = tmp / "badutf";
  testutil::write_file(bad / "query.txt", "Query?");
  testutil::write_file(bad / "docs" / "a.txt", "Good start \xfe bad byte.");
  try {
    corpus::load_cluster(bad);
    FAIL("expected IngestError");
  } catch (const IngestError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("a.txt") != std::string::npos);
    CHECK(msg.find("11") != std::string::npos);
  }
}

TEST_CASE("compile_cluster: ordering, identity and empty documents") {
  const Cluster two =
      testutil::make_cluster("c", {{"A one.", "A two."}, {"B one.", "B two."}}, "q");
  const auto compiled = corpus::compile_cluster(two);
  REQUIRE(compiled.size() == 4);
  CHECK(compiled[0].id == "d0:0");
  CHECK(compiled[1].id == "d0:1");
  CHECK(compiled[2].id == "d1:0");
  CHECK(compiled[3].id == "d1:1");

  const Cluster one = testutil::make_cluster("c", {{"X.", "Y.", "Z."}}, "q");
  CHECK(corpus::compile_cluster(one) == one.documents[0].sentences);

  const Cluster with_empty = testutil::make_cluster("c", {{"A."}, {}, {"B.", "C."}}, "q");
  const auto c3 = corpus::compile_cluster(with_empty);
  std::size_t total = 0;
  for (const auto& d : with_empty.documents) total += d.sentences.size();
  CHECK(c3.size() == total);
  CHECK(c3.size() == 3);
}

TEST_CASE("write_cluster then load_cluster is token-identical") {
  testutil::TempDir tmp;
  const auto src = tmp / "orig";
  testutil::write_file(src / "query.txt", "Why did U.S. drug prices rise? Explain.");
  testutil::write_file(src / "docs" / "x.txt",
                       "Dr. Smith left early. He said \"Stop.\" Then (quietly) went home!\n\n"
                       "A heading without a stop\nNew paragraph, 3.5% growth.");
  testutil::write_file(src / "docs" / "y.txt", "caf\xc3\xa9 owners met. They agreed.");
  testutil::write_file(src / "refs" / "a.txt", "Prices rose.");
  testutil::write_file(src / "refs" / "b.txt", "Smith left; prices rose.");

  const Cluster first = corpus::load_cluster(src);
  const auto copy = tmp / "orig_copy" / "orig";
  corpus::write_cluster(first, copy);
  const Cluster second = corpus::load_cluster(copy);

  CHECK(second.id == first.id);
  REQUIRE(second.documents.size() == first.documents.size());
  for (std::size_t d = 0; d < first.documents.size(); ++d) {
    CHECK(second.documents[d].id == first.documents[d].id);
    REQUIRE(second.documents[d].sentences.size() == first.documents[d].sentences.size());
    for (std::size_t i = 0; i < first.documents[d].sentences.size(); ++i)
      CHECK(second.documents[d].sentences[i].tokens == first.documents[d].sentences[i].tokens);
  }
  CHECK(second.query.tokens == first.query.tokens);
  REQUIRE(second.references.size() == first.references.size());
  for (std::size_t r = 0; r < first.references.size(); ++r)
    CHECK(second.references[r] == first.references[r]);
}

TEST_CASE("load_corpus lists clusters in lexicographic order") {
  testutil::TempDir tmp;
  for (const char* id : {"c2", "c10", "c1"}) {
    testutil::write_file(tmp / id / "query.txt", "Q?");
    testutil::write_file(tmp / id / "docs" / "a.txt", "Some text.");
  }
  const auto corpus = corpus::load_corpus(tmp.path());
  REQUIRE(corpus.size() == 3);
  CHECK(corpus[0].id == "c1");
  CHECK(corpus[1].id == "c10");
  CHECK(corpus[2].id == "c2");
}
