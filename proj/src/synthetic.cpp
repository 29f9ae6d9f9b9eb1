#include "attsum/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "attsum/error.hpp"
#include "attsum/random.hpp"

namespace attsum::synthetic {
namespace {

struct Topic {
  std::vector<std::string> query_words;
  std::vector<std::string> content_words;
};

class Lexicon {
 public:
  explicit Lexicon(Rng& rng) : rng_(rng) {}

  std::string fresh_word() {
    static constexpr const char* kConsonants = "bdfgklmnprstvz";
    static constexpr const char* kVowels = "aeiou";
    for (;;) {
      std::string w;
      const std::size_t syllables = 2 + rng_.index(2);
      for (std::size_t s = 0; s < syllables; ++s) {
        w.push_back(kConsonants[rng_.index(14)]);
        w.push_back(kVowels[rng_.index(5)]);
      }
      if (rng_.index(2) == 0) w.push_back(kConsonants[rng_.index(14)]);
      if (used_.insert(w).second) return w;
    }
  }

 private:
  Rng& rng_;
  std::set<std::string> used_;
};

Vector unit_gaussian(Rng& rng, std::size_t dim) {
  Vector v(dim);
  double n2 = 0.0;
  for (double& x : v) {
    x = rng.normal();
    n2 += x * x;
  }
  const double inv = 1.0 / std::sqrt(n2);
  for (double& x : v) x *= inv;
  return v;
}

std::string capitalize(std::string w) {
  if (!w.empty() && w[0] >= 'a' && w[0] <= 'z') w[0] = static_cast<char>(w[0] - 'a' + 'A');
  return w;
}

std::string make_sentence(std::vector<std::string> words, char terminator) {
  std::string out = capitalize(words.front());
  for (std::size_t i = 1; i < words.size(); ++i) out += " " + words[i];
  out.push_back(terminator);
  return out;
}

const std::string& pick(Rng& rng, const std::vector<std::string>& from) {
  return from[rng.index(from.size())];
}

Sentence to_sentence(const std::string& doc_id, std::size_t position, std::string text) {
  Sentence s;
  s.doc_id = doc_id;
  s.position = position;
  s.id = doc_id + ":" + std::to_string(position);
  s.tokens = corpus::tokenize(text);
  s.text = std::move(text);
  return s;
}

}  // namespace

Corpus generate(const Config& config) {
  require(config.clusters > config.held_out, "synthetic: need at least one training cluster");
  require(config.topics >= 2, "synthetic: need at least two topics");
  require(config.min_words >= 2 && config.max_words >= config.min_words,
          "synthetic: bad sentence length range");
  Rng rng(config.seed);
  Lexicon lexicon(rng);

  std::vector<Topic> topics(config.topics);
  Corpus out;
  out.table = EmbeddingTable(config.dim);
  auto add_word = [&](const std::string& w, const Vector& centre, double spread) {
    Vector v(config.dim);
    const double scale = spread / std::sqrt(static_cast<double>(config.dim));
    for (std::size_t d = 0; d < config.dim; ++d) v[d] = centre[d] + scale * rng.normal();
    out.table.insert(w, v);
  };
  for (auto& t : topics) {
    const Vector centre = unit_gaussian(rng, config.dim);
    for (int i = 0; i < 8; ++i) t.query_words.push_back(lexicon.fresh_word());
    for (int i = 0; i < 40; ++i) t.content_words.push_back(lexicon.fresh_word());
    for (const auto& w : t.query_words) add_word(w, centre, config.topic_spread);
    for (const auto& w : t.content_words) add_word(w, centre, config.topic_spread);
  }
  std::vector<std::string> noise;
  const Vector origin(config.dim, 0.0);
  for (int i = 0; i < 400; ++i) {
    noise.push_back(lexicon.fresh_word());
    add_word(noise.back(), origin, 1.0);
  }

  auto length = [&] { return config.min_words + rng.index(config.max_words - config.min_words + 1); };
  auto words_from = [&](const std::vector<std::string>& pool, std::size_t n) {
    std::vector<std::string> w;
    for (std::size_t i = 0; i < n; ++i) w.push_back(pick(rng, pool));
    return w;
  };

  for (std::size_t c = 0; c < config.clusters; ++c) {
    const std::size_t topic = rng.index(config.topics);
    std::size_t background = rng.index(config.topics - 1);
    if (background >= topic) ++background;
    const Topic& t = topics[topic];
    const Topic& bg = topics[background];

    Cluster cluster;
    char id[16];
    std::snprintf(id, sizeof id, "syn%02zu", c);
    cluster.id = id;

    std::string query = make_sentence(words_from(t.query_words, 5 + rng.index(3)), '?');
    if (rng.index(2) == 0) query += " " + make_sentence(words_from(t.query_words, 4 + rng.index(3)), '?');
    cluster.query.tokens = corpus::tokenize(query);

    std::vector<std::string> relevant_texts;
    for (std::size_t d = 0; d < config.documents; ++d) {
      enum Kind { Relevant, Background, Bait, Noise };
      std::vector<Kind> kinds;
      kinds.insert(kinds.end(), config.background_per_doc, Background);
      kinds.insert(kinds.end(), config.bait_per_doc, Bait);
      kinds.insert(kinds.end(), config.noise_per_doc, Noise);
      for (std::size_t i = kinds.size(); i > 1; --i) std::swap(kinds[i - 1], kinds[rng.index(i)]);
      // Relevant sentences go after at least the first two distractors.
      for (std::size_t r = 0; r < config.relevant_per_doc; ++r) {
        const std::size_t lo = std::min<std::size_t>(2, kinds.size());
        const std::size_t at = lo + rng.index(kinds.size() - lo + 1);
        kinds.insert(kinds.begin() + static_cast<std::ptrdiff_t>(at), Relevant);
      }

      Document doc;
      doc.id = "doc" + std::to_string(d);
      for (Kind kind : kinds) {
        const std::size_t n = length();
        std::vector<std::string> words;
        switch (kind) {
          case Relevant:
            words = words_from(t.content_words, n);
            break;
          case Background:
            words = words_from(bg.content_words, n);
            break;
          case Bait: {
            words = words_from(noise, n);
            const std::size_t hits = 2 + rng.index(2);
            for (std::size_t h = 0; h < hits; ++h) words[rng.index(n)] = pick(rng, t.query_words);
            break;
          }
          case Noise:
            words = words_from(noise, n);
            break;
        }
        std::string text = make_sentence(std::move(words), '.');
        if (kind == Relevant) relevant_texts.push_back(text);
        doc.sentences.push_back(to_sentence(doc.id, doc.sentences.size(), std::move(text)));
      }
      cluster.documents.push_back(std::move(doc));
    }

    for (std::size_t r = 0; r < config.references; ++r) {
      std::vector<std::string> chosen = relevant_texts;
      for (std::size_t i = chosen.size(); i > 1; --i) std::swap(chosen[i - 1], chosen[rng.index(i)]);
      chosen.resize(std::max<std::size_t>(1, chosen.size() * 2 / 3));
      std::string text;
      for (const auto& s : chosen) text += (text.empty() ? "" : " ") + s;
      cluster.references.push_back(corpus::tokenize(text));
    }

    if (c < config.clusters - config.held_out)
      out.train.push_back(std::move(cluster));
    else
      out.test.push_back(std::move(cluster));
  }
  return out;
}

void write(const Corpus& corpus, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "train");
  std::filesystem::create_directories(dir / "test");
  for (const auto& c : corpus.train) corpus::write_cluster(c, dir / "train" / c.id);
  for (const auto& c : corpus.test) corpus::write_cluster(c, dir / "test" / c.id);
  embed::save_embeddings(corpus.table, dir / "embeddings.txt");
}

}  // namespace attsum::synthetic
