// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "attsum/cli.hpp"
#include "attsum/corpus.hpp"
#include "attsum/gradcheck.hpp"
#include "attsum/model.hpp"
#include "attsum/pipeline.hpp"
#include "attsum/random.hpp"
#include "attsum/rouge.hpp"
#include "attsum/synthetic.hpp"
#include "json.hpp"

using namespace attsum;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct Cli {
  int code;
  std::string out;
  std::string err;
};

Cli cli_run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run_command(args, out, err);
  return {code, out.str(), err.str()};
}

class Scratch {
 public:
  Scratch() : path_(fs::temp_directory_path() / ("attsum_accept_" + std::to_string(::getpid()))) {
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~Scratch() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

// 1. Central differences against pair_backward, through the CLI.
Outcome gradient_fidelity() {
  const auto t0 = std::chrono::steady_clock::now();
  const Cli r = cli_run({"gradcheck"});
  const double secs = seconds_since(t0);
  std::string line = r.out;
  while (!line.empty() && line.back() == '\n') line.pop_back();
  const bool ok = r.code == cli::kOk && line.find("PASS") != std::string::npos &&
                  line.find("trials 200") != std::string::npos && secs < 10.0;
  return {ok, line + ", " + fmt("%.2f s", secs)};
}

// 2. Hand-counted ROUGE recalls.
Outcome rouge_oracle() {
  using Words = std::vector<std::string>;
  auto w = [](const std::string& s) { return corpus::words_of(corpus::tokenize(s)); };
  Words long_cand;
  for (int i = 0; i < 300; ++i) long_cand.push_back("w" + std::to_string(i));
  struct Case {
    const char* name;
    Words cand;
    std::vector<Words> refs;
    RougeConfig config;
    double expected;
  };
  const std::vector<Case> cases = {
      // identical: 3/3 bigrams
      {"identity", w("a b c d"), {w("a b c d")}, RougeConfig::sentence(2), 1.0},
      // ab matched, bd not: 1/2
      {"one of two bigrams", w("a b c"), {w("a b d")}, RougeConfig::sentence(2), 0.5},
      {"disjoint", w("x y z"), {w("a b c")}, RougeConfig::sentence(2), 0.0},
      // candidate aa x2 against reference aa x1, ab x1: clipped 1 of 2
      {"clipped multiplicity", w("a a a"), {w("a a b")}, RougeConfig::sentence(2), 0.5},
      // reference aa x2, candidate aa x1 (a a b): 1 of 2
      {"reference multiplicity", w("a a b"), {w("a a a")}, RougeConfig::sentence(2), 0.5},
      // unigrams: a x2 (cand 3), b x1 (cand 0): 2 of 3
      {"unigram clipping", w("a a a"), {w("a a b")}, RougeConfig::sentence(1), 2.0 / 3.0},
      // ref1 1/2, ref2 1/1 -> mean 3/4
      {"two references", w("a b c"), {w("a b d"), w("b c")}, RougeConfig::sentence(2), 0.75},
      // bigram-free reference scores 0: (1 + 0) / 2
      {"reference without bigrams", w("a b"), {w("a b"), w("q")}, RougeConfig::sentence(2), 0.5},
      // w249 w250 straddles the 250-word cut
      {"truncation drops boundary bigram", long_cand, {w("w249 w250")}, RougeConfig::summary(2), 0.0},
      {"truncation keeps last pair", long_cand, {w("w248 w249")}, RougeConfig::summary(2), 1.0},
      {"truncation unigrams", long_cand, {w("w0 w250 w299 w100")}, RougeConfig::summary(1), 0.5},
      // punctuation and case are ignored: 3/3
      {"punctuation ignored", w("Prices, have SOARED!"), {w("prices have soared")},
       RougeConfig::sentence(2), 1.0},
      // refs: 2/3 and 1/3 bigrams, mean 1/2
      {"three-way mean", w("a b c"), {w("a b c d"), w("a b x y"), w("p q")}, RougeConfig::sentence(2),
       (2.0 / 3.0 + 1.0 / 3.0 + 0.0) / 3.0},
  };
  int bad = 0;
  double worst = 0.0;
  std::string first_bad;
  for (const auto& c : cases) {
    const double got = rouge::rouge_n(c.cand, c.refs, c.config).recall;
    const double d = std::abs(got - c.expected);
    worst = std::max(worst, d);
    if (!(d < 1e-12)) {
      if (bad++ == 0) first_bad = c.name;
    }
  }
  std::string detail = std::to_string(cases.size()) + " cases, max |delta| " + fmt("%.3g", worst);
  if (bad) detail += ", first mismatch: " + first_bad;
  return {bad == 0 && cases.size() >= 10, detail};
}

// 3. Budget, length and replayed ratio of every selected sentence.
Outcome selection_invariants() {
  Rng rng(20160807);
  const std::vector<std::string> punct = {",", ".", ";", "--", "(", ")"};
  std::size_t violations = 0, sentences = 0;
  for (int list = 0; list < 1000; ++list) {
    const std::size_t vocab = 5 + rng.index(60);
    const std::size_t n = 1 + rng.index(80);
    std::vector<RankedSentence> ranked;
    for (std::size_t i = 0; i < n; ++i) {
      std::string text;
      const std::size_t len = 1 + rng.index(40);
      for (std::size_t t = 0; t < len; ++t) {
        if (!text.empty()) text += ' ';
        text += rng.index(8) == 0 ? punct[rng.index(punct.size())] : "v" + std::to_string(rng.index(vocab));
      }
      RankedSentence r;
      r.sentence.id = "d:" + std::to_string(i);
      r.sentence.text = text;
      r.sentence.tokens = corpus::tokenize(text);
      r.compile_index = i;
      r.score = 1.0 - static_cast<double>(i) / static_cast<double>(n);
      r.word_count = corpus::word_count(r.sentence.tokens);
      ranked.push_back(std::move(r));
    }
    const Summary s = pipeline::select_summary(ranked);
    if (s.total_words > 250 || corpus::word_count(s.tokens()) > 250) ++violations;
    Summary prefix;
    for (const auto& chosen : s.sentences) {
      ++sentences;
      const std::size_t idx = std::stoul(chosen.sentence.id.substr(2));
      const RankedSentence& orig = ranked[idx];
      if (orig.word_count < 8) ++violations;
      if (pipeline::new_bigram_ratio(orig.sentence.tokens, prefix) < 0.5) ++violations;
      prefix.sentences.push_back(chosen);
    }
  }
  return {violations == 0, "1000 lists, " + std::to_string(sentences) + " selected sentences, " +
                               std::to_string(violations) + " violations"};
}

// 4. Generator, default training through the CLI, and held-out evaluation.
Outcome synthetic_end_to_end(const fs::path& scratch) {
  const fs::path root = scratch / "synthetic";
  synthetic::write(synthetic::generate(), root);
  const auto t0 = std::chrono::steady_clock::now();
  const Cli tr = cli_run({"train", "--corpus", (root / "train").string(), "--embeddings",
                          (root / "embeddings.txt").string(), "--out", (root / "model.json").string()});
  const double secs = seconds_since(t0);
  if (tr.code != cli::kOk) return {false, "train exited " + std::to_string(tr.code) + ": " + tr.err};

  std::vector<double> losses;
  std::istringstream log(tr.out);
  std::string line;
  while (std::getline(log, line)) {
    unsigned long epoch, pairs;
    double loss;
    if (std::sscanf(line.c_str(), "epoch %lu mean_loss %lf pairs %lu", &epoch, &loss, &pairs) == 3)
      losses.push_back(loss);
  }
  const bool decreasing = losses.size() >= 3 && losses[0] > losses[1] && losses[1] > losses[2];

  const auto params = model::load_checkpoint(root / "model.json");
  const auto table = embed::load_embeddings(root / "embeddings.txt");
  const auto test = corpus::load_corpus(root / "test");
  std::size_t correct = 0, total = 0;
  double attsum = 0.0, lead = 0.0, querysim = 0.0;
  for (const auto& c : test) {
    const auto acc = pipeline::pairwise_accuracy(params, table, c, TrainConfig{});
    correct += acc.correct;
    total += acc.total;
    const auto ours = pipeline::select_summary(pipeline::rank_sentences(params, table, c));
    attsum += pipeline::evaluate_one(c, ours.tokens()).rouge2;
    lead += pipeline::evaluate_one(c, pipeline::run_baseline(pipeline::Baseline::Lead, c).tokens()).rouge2;
    querysim +=
        pipeline::evaluate_one(c, pipeline::run_baseline(pipeline::Baseline::QuerySim, c).tokens()).rouge2;
  }
  const double n = static_cast<double>(test.size());
  attsum /= n;
  lead /= n;
  querysim /= n;
  const double accuracy = total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;
  const bool ok = decreasing && accuracy >= 0.9 && attsum > lead && attsum > querysim &&
                  test.size() == 5 && secs <= 300.0;
  std::string detail = "loss";
  for (std::size_t i = 0; i < std::min<std::size_t>(3, losses.size()); ++i)
    detail += fmt(" %.4f", losses[i]);
  detail += decreasing ? " (decreasing)" : " (NOT decreasing)";
  detail += ", held-out pair accuracy " + fmt("%.4f", accuracy) + " over " + std::to_string(total) +
            " pairs, ROUGE-2 AttSum " + fmt("%.2f", attsum) + " LEAD " + fmt("%.2f", lead) +
            " QUERY_SIM " + fmt("%.2f", querysim) + ", train " + fmt("%.1f s", secs);
  return {ok, detail};
}

// 5. M = 0 pooling against the unweighted sum.
Outcome isolation_identity() {
  Rng rng(44);
  std::size_t pool_bad = 0, order_bad = 0;
  double worst = 0.0;
  for (int cluster = 0; cluster < 100; ++cluster) {
    ModelConfig mc;
    mc.k = 2 + rng.index(20);
    mc.l = 2 + rng.index(20);
    auto params = model::init_params(mc, rng.next());
    for (double& m : params.M.flat()) m = 0.0;
    const std::size_t n = 1 + rng.index(40);
    std::vector<Vector> embs;
    Vector sum(mc.l, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      Matrix s(mc.k, std::max<std::size_t>(mc.h, 1 + rng.index(30)));
      for (double& x : s.flat()) x = rng.normal();
      embs.push_back(model::encode(params, s).value);
      tensor::axpy(1.0, embs.back(), sum);
    }
    Vector q(mc.l);
    for (double& x : q) x = rng.uniform(-1, 1);
    const auto d = model::doc_embedding(params, embs, q);
    for (std::size_t j = 0; j < mc.l; ++j) {
      const double diff = std::abs(d.doc[j] - 0.5 * sum[j]);
      worst = std::max(worst, diff);
      if (!(diff <= 1e-12)) ++pool_bad;
    }
    auto order = [&](const Vector& target) {
      std::vector<std::size_t> idx(n);
      for (std::size_t i = 0; i < n; ++i) idx[i] = i;
      std::vector<double> score(n);
      for (std::size_t i = 0; i < n; ++i) score[i] = model::rank_score(embs[i], target);
      std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return score[a] > score[b]; });
      return idx;
    };
    if (order(d.doc) != order(sum)) ++order_bad;
  }
  return {pool_bad == 0 && order_bad == 0,
          "100 clusters, max |v(d|q) - 0.5 sum| " + fmt("%.3g", worst) + ", " +
              std::to_string(order_bad) + " ranking mismatches"};
}

// 6. Two training runs from the same manifest.
Outcome determinism(const fs::path& scratch) {
  const fs::path root = scratch / "determinism";
  synthetic::write(synthetic::generate(), root);
  const fs::path ckpt = root / "model.json";
  const Cli a = cli_run({"train", "--corpus", (root / "train").string(), "--embeddings",
                         (root / "embeddings.txt").string(), "--out", ckpt.string()});
  if (a.code != cli::kOk) return {false, "first run exited " + std::to_string(a.code)};
  const std::string ckpt_a = read_file(ckpt);
  const std::string manifest_a = read_file(ckpt.string() + ".manifest.json");
  fs::remove(ckpt);

  const auto manifest = nlohmann::json::parse(manifest_a);
  const auto argv = manifest["argv"].get<std::vector<std::string>>();
  const Cli b = cli_run(argv);
  if (b.code != cli::kOk) return {false, "second run exited " + std::to_string(b.code)};
  const std::string ckpt_b = read_file(ckpt);
  const std::string manifest_b = read_file(ckpt.string() + ".manifest.json");
  const bool same_ckpt = !ckpt_a.empty() && ckpt_a == ckpt_b;
  const bool same_log = !a.out.empty() && a.out == b.out;
  const bool same_manifest = manifest_a == manifest_b;
  return {same_ckpt && same_log && same_manifest,
          std::string("checkpoint ") + (same_ckpt ? "identical" : "DIFFERS") + " (" +
              std::to_string(ckpt_a.size()) + " bytes), epoch log " +
              (same_log ? "identical" : "DIFFERS") + ", manifest " +
              (same_manifest ? "identical" : "DIFFERS")};
}

// 7. Output ranges over random inputs, including saturating scales.
Outcome numeric_ranges() {
  Rng rng(7070);
  std::size_t violations = 0;
  const double margin = 0.5;
  for (int trial = 0; trial < 100000; ++trial) {
    ModelConfig mc;
    mc.k = 1 + rng.index(6);
    mc.l = 1 + rng.index(6);
    const double w_scale = std::pow(10.0, rng.uniform(-3, 2));
    const double m_scale = std::pow(10.0, rng.uniform(-3, 4));
    const double x_scale = std::pow(10.0, rng.uniform(-3, 2));
    ModelParams p{mc, Matrix(mc.l, mc.h * mc.k), Matrix(mc.l, mc.l)};
    for (double& w : p.W.flat()) w = rng.uniform(-w_scale, w_scale);
    for (double& m : p.M.flat()) m = rng.uniform(-m_scale, m_scale);
    const std::size_t n = 2 + rng.index(5);
    std::vector<Matrix> sentences;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t len = 1 + rng.index(7);
      Matrix s(mc.k, std::max(len, mc.h));
      for (std::size_t c = 0; c < len; ++c)
        for (std::size_t d = 0; d < mc.k; ++d) s(d, c) = rng.normal() * x_scale;
      sentences.push_back(std::move(s));
    }
    Matrix q(mc.k, 2 + rng.index(5));
    for (double& x : q.flat()) x = rng.normal() * x_scale;

    const model::ClusterForward fwd(p, sentences, q);
    for (double v : fwd.query().value) violations += !(v >= -1.0 && v <= 1.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (double v : fwd.sentence(i).value) violations += !(v >= -1.0 && v <= 1.0);
      const double r = fwd.doc().weights[i];
      violations += !(r > 0.0 && r < 1.0);
      const double c = fwd.cos(i);
      violations += !(c >= -1.0 && c <= 1.0);
    }
    const std::size_t pos = rng.index(n);
    const std::size_t neg = (pos + 1 + rng.index(n - 1)) % n;
    const double loss = fwd.pair_loss(pos, neg, margin);
    violations += !(loss >= 0.0 && loss <= margin + 2.0);
  }
  return {violations == 0, "100000 random instances, " + std::to_string(violations) + " violations"};
}

}  // namespace

int main() {
  Scratch scratch;
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {"gradient fidelity", gradient_fidelity},
      {"ROUGE oracle equivalence", rouge_oracle},
      {"selection invariants", selection_invariants},
      {"synthetic end-to-end", [&] { return synthetic_end_to_end(scratch.path()); }},
      {"ISOLATION identity", isolation_identity},
      {"determinism", [&] { return determinism(scratch.path()); }},
      {"numeric range invariants", numeric_ranges},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("[%s] %zu. %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].name,
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed ? 1 : 0;
}
