#include "attsum/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>

#include "CLI11.hpp"
#include "attsum/error.hpp"
#include "attsum/gradcheck.hpp"
#include "attsum/pipeline.hpp"
#include "json.hpp"

namespace attsum::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Options {
  // train
  std::string corpus, embeddings, out, pooling = "attention";
  std::size_t epochs = 10, batch = 100, h = 2, l = 50, cluster_cap = 1000, jobs = 1;
  double eta = 0.1, margin = 0.5, pos_q = 0.25, neg_q = 0.25;
  std::uint64_t seed = 1;
  // summarize / baseline
  std::string model, cluster, method;
  std::size_t limit = 250, min_words = 8;
  double ratio = 0.5, lambda = 1.0;
  // evaluate
  std::string summaries;
  // gradcheck
  int trials = 200;
  double eps = 1e-5, threshold = 1e-4;
};

void write_text(const fs::path& path, const std::string& content) {
  if (path.has_parent_path() && !fs::exists(path.parent_path()))
    throw Error("output directory does not exist: " + path.parent_path().string());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << content;
  if (!out) throw Error("failed writing " + path.string());
}

// Numbers stay numbers; everything else is kept as the option's text.
json typed(const std::string& value) {
  json parsed = json::parse(value, nullptr, false);
  return parsed.is_number() ? parsed : json(value);
}

// Resolved value of every option of the subcommand, defaults included.
json resolved_options(const CLI::App& sub) {
  json config = json::object();
  for (const CLI::Option* opt : sub.get_options()) {
    const std::string name = opt->get_single_name();
    if (name == "help" || name.empty()) continue;
    if (opt->count() > 0) {
      const auto& res = opt->results();
      if (res.size() == 1) {
        config[name] = typed(res.front());
      } else {
        json all = json::array();
        for (const auto& r : res) all.push_back(typed(r));
        config[name] = all;
      }
    } else {
      config[name] = typed(opt->get_default_str());
    }
  }
  return config;
}

void write_manifest(const fs::path& out_path, const CLI::App& sub,
                    const std::vector<std::string>& args, const json& extra = json::object()) {
  json m;
  m["command"] = sub.get_name();
  m["tool_version"] = kVersion;
  m["argv"] = args;
  m["config"] = resolved_options(sub);
  for (const auto& [k, v] : extra.items()) m[k] = v;
  write_text(fs::path(out_path.string() + ".manifest.json"), m.dump(2) + "\n");
}

SelectionConfig selection_of(const Options& o) { return {o.limit, o.min_words, o.ratio}; }

fs::path summary_path(const std::string& out, const std::string& cluster_id) {
  if (fs::is_directory(out)) return fs::path(out) / (cluster_id + ".sum.txt");
  return out;
}

int do_train(const Options& o, const CLI::App& sub, const std::vector<std::string>& args,
             std::ostream& out, std::ostream& err) {
  const auto corpus = corpus::load_corpus(o.corpus);
  const auto table = embed::load_embeddings(o.embeddings);
  ModelConfig mc;
  mc.h = o.h;
  mc.k = table.dim();
  mc.l = o.l;
  mc.pooling = o.pooling == "sum" ? Pooling::Sum : Pooling::Attention;
  TrainConfig tc;
  tc.margin = o.margin;
  tc.eta = o.eta;
  tc.batch_size = o.batch;
  tc.epochs = o.epochs;
  tc.seed = o.seed;
  tc.pos_quantile = o.pos_q;
  tc.neg_quantile = o.neg_q;
  tc.cluster_cap = o.cluster_cap;
  tc.jobs = o.jobs;
  const auto result = pipeline::train(corpus, table, mc, tc, nullptr);
  for (const auto& w : result.warnings) err << "warning: " << w << '\n';
  for (const auto& e : result.epochs) out << pipeline::format_epoch(e) << '\n';
  model::save_checkpoint(result.params, o.out);
  json inputs = {{"corpus", o.corpus}, {"embeddings", o.embeddings}};
  write_manifest(o.out, sub, args, {{"seed", o.seed}, {"inputs", inputs}, {"k", mc.k}});
  return kOk;
}

int do_summarize(const Options& o, const CLI::App& sub, const std::vector<std::string>& args,
                 std::ostream& out) {
  const auto params = model::load_checkpoint(o.model);
  const auto table = embed::load_embeddings(o.embeddings);
  const auto cluster = corpus::load_cluster(o.cluster);
  const auto summary =
      pipeline::select_summary(pipeline::rank_sentences(params, table, cluster), selection_of(o));
  const auto path = summary_path(o.out, cluster.id);
  write_text(path, pipeline::format_summary(summary));
  write_manifest(path, sub, args,
                 {{"inputs", {{"model", o.model}, {"embeddings", o.embeddings}, {"cluster", o.cluster}}}});
  out << cluster.id << ": " << summary.sentences.size() << " sentences, " << summary.total_words
      << " words -> " << path.string() << '\n';
  return kOk;
}

int do_baseline(const Options& o, const CLI::App& sub, const std::vector<std::string>& args,
                std::ostream& out, std::ostream& err) {
  const auto method = pipeline::parse_baseline(o.method);
  const auto cluster = corpus::load_cluster(o.cluster);
  std::optional<ModelParams> params;
  std::optional<EmbeddingTable> table;
  if (method == pipeline::Baseline::Isolation) {
    if (o.model.empty() || o.embeddings.empty()) {
      err << "baseline isolation requires --model and --embeddings\n";
      return kUsage;
    }
    params = model::load_checkpoint(o.model);
    table = embed::load_embeddings(o.embeddings);
    if (params->config.pooling != Pooling::Sum)
      err << "warning: " << o.model << " was trained with attention pooling; ISOLATION expects "
          << "a model trained with --pooling sum\n";
  }
  const auto summary = pipeline::run_baseline(method, cluster, params ? &*params : nullptr,
                                              table ? &*table : nullptr, o.lambda, selection_of(o));
  const auto path = summary_path(o.out, cluster.id);
  write_text(path, pipeline::format_summary(summary));
  write_manifest(path, sub, args, {{"inputs", {{"cluster", o.cluster}, {"model", o.model}}}});
  out << cluster.id << ": " << summary.sentences.size() << " sentences, " << summary.total_words
      << " words -> " << path.string() << '\n';
  return kOk;
}

int do_evaluate(const Options& o, const CLI::App& sub, const std::vector<std::string>& args,
                std::ostream& out) {
  const auto corpus = corpus::load_corpus(o.corpus);
  const auto report = pipeline::evaluate(corpus, o.summaries);
  const std::string tsv = report.to_tsv();
  write_text(o.out, tsv);
  write_manifest(o.out, sub, args, {{"inputs", {{"corpus", o.corpus}, {"summaries", o.summaries}}}});
  out << tsv;
  return kOk;
}

int do_gradcheck(const Options& o, std::ostream& out) {
  gradcheck::Options g;
  g.seed = o.seed;
  g.trials = o.trials;
  g.epsilon = o.eps;
  g.threshold = o.threshold;
  const auto s = gradcheck::run(g);
  char buf[96];
  std::snprintf(buf, sizeof buf, "%.3e", s.max_rel_error);
  out << "gradcheck trials " << s.trials << " resampled " << s.resampled << " max_rel_error " << buf
      << " worst " << (s.worst.empty() ? "-" : s.worst) << ' ' << (s.passed ? "PASS" : "FAIL")
      << '\n';
  return s.passed ? kOk : kInternal;
}

int do_label(const Options& o, const CLI::App& sub, const std::vector<std::string>& args,
             std::ostream& out) {
  const auto cluster = corpus::load_cluster(o.cluster);
  const auto labels = rouge::label_sentences(cluster, 2);
  const auto sentences = corpus::compile_cluster(cluster);
  std::string tsv = "sentence_id\trouge2\ttext\n";
  char buf[32];
  for (const auto& l : labels) {
    std::snprintf(buf, sizeof buf, "%.6f", l.score);
    tsv += sentences[l.index].id + "\t" + buf + "\t" + sentences[l.index].text + "\n";
  }
  write_text(o.out, tsv);
  write_manifest(o.out, sub, args, {{"inputs", {{"cluster", o.cluster}}}});
  out << cluster.id << ": labeled " << labels.size() << " sentences -> " << o.out << '\n';
  return kOk;
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Query-focused extractive summarization with attentive sentence ranking", "attsum"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.set_help_flag("--help", "Print this help message and exit");
  app.set_version_flag("--version", kVersion);

  auto* train = app.add_subcommand("train", "Train a model on a corpus of clusters");
  train->add_option("--corpus", o.corpus, "Directory of cluster directories")->required();
  train->add_option("--embeddings", o.embeddings, "Word-vector text file")->required();
  train->add_option("--out", o.out, "Checkpoint path")->required();
  train->add_option("--epochs", o.epochs, "Training epochs");
  train->add_option("--eta", o.eta, "AdaGrad learning rate")->check(CLI::PositiveNumber);
  train->add_option("--batch", o.batch, "Pairs per mini-batch")->check(CLI::Range(1, 1 << 30));
  train->add_option("--margin", o.margin, "Hinge margin")->check(CLI::PositiveNumber);
  train->add_option("--h", o.h, "Convolution window")->check(CLI::Range(1, 64));
  train->add_option("--l", o.l, "Sentence-embedding dimension")->check(CLI::Range(1, 4096));
  train->add_option("--seed", o.seed, "Random seed");
  train->add_option("--pos-q", o.pos_q, "Top quantile used as positives")->check(CLI::Range(1e-9, 0.5));
  train->add_option("--neg-q", o.neg_q, "Bottom quantile used as negatives")
      ->check(CLI::Range(1e-9, 1.0 - 1e-9));
  train->add_option("--cluster-cap", o.cluster_cap, "Max sentences per cluster during training")
      ->check(CLI::Range(1, 1 << 30));
  train->add_option("--pooling", o.pooling, "attention, or sum for the ISOLATION model")
      ->check(CLI::IsMember({"attention", "sum"}));
  train->add_option("--jobs", o.jobs, "Worker threads per batch")->check(CLI::Range(1, 256));

  auto* summarize = app.add_subcommand("summarize", "Summarize one cluster with a trained model");
  summarize->add_option("--model", o.model, "Checkpoint")->required();
  summarize->add_option("--embeddings", o.embeddings, "Word-vector text file")->required();
  summarize->add_option("--cluster", o.cluster, "Cluster directory")->required();
  summarize->add_option("--out", o.out, "Summary file, or directory for <cluster>.sum.txt")->required();
  for (auto* sub : {summarize}) {
    sub->add_option("--limit", o.limit, "Word budget")->check(CLI::Range(1, 1 << 30));
    sub->add_option("--min-words", o.min_words, "Shortest eligible sentence");
    sub->add_option("--ratio", o.ratio, "New-bigram ratio cut-off")->check(CLI::Range(0.0, 1.0));
  }

  auto* evaluate = app.add_subcommand("evaluate", "ROUGE-1/2 recall of summaries against references");
  evaluate->add_option("--corpus", o.corpus, "Directory of cluster directories")->required();
  evaluate->add_option("--summaries", o.summaries, "Directory of <cluster>.sum.txt files")->required();
  evaluate->add_option("--out", o.out, "Report path (TSV)")->required();

  auto* baseline = app.add_subcommand("baseline", "Summarize with LEAD, QUERY_SIM or ISOLATION");
  baseline->add_option("--method", o.method, "lead | querysim | isolation")
      ->required()
      ->check(CLI::IsMember({"lead", "querysim", "query_sim", "isolation"}));
  baseline->add_option("--cluster", o.cluster, "Cluster directory")->required();
  baseline->add_option("--model", o.model, "Checkpoint (isolation)");
  baseline->add_option("--embeddings", o.embeddings, "Word-vector text file (isolation)");
  baseline->add_option("--lambda", o.lambda, "Weight of the TF-IDF query feature (isolation)");
  baseline->add_option("--out", o.out, "Summary file, or directory for <cluster>.sum.txt")->required();
  baseline->add_option("--limit", o.limit, "Word budget")->check(CLI::Range(1, 1 << 30));
  baseline->add_option("--min-words", o.min_words, "Shortest eligible sentence");
  baseline->add_option("--ratio", o.ratio, "New-bigram ratio cut-off")->check(CLI::Range(0.0, 1.0));

  auto* grad = app.add_subcommand("gradcheck", "Finite-difference check of the analytic gradients");
  grad->add_option("--seed", o.seed, "Random seed");
  grad->add_option("--trials", o.trials, "Random instances")->check(CLI::NonNegativeNumber);
  grad->add_option("--eps", o.eps, "Central-difference step")->check(CLI::PositiveNumber);
  grad->add_option("--threshold", o.threshold, "Max relative error")->check(CLI::PositiveNumber);

  auto* label = app.add_subcommand("label", "Dump per-sentence ROUGE-2 training labels");
  label->add_option("--cluster", o.cluster, "Cluster directory")->required();
  label->add_option("--out", o.out, "Label file (TSV)")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return kUsage;
  }

  try {
    if (*train) return do_train(o, *train, args, out, err);
    if (*summarize) return do_summarize(o, *summarize, args, out);
    if (*evaluate) return do_evaluate(o, *evaluate, args, out);
    if (*baseline) return do_baseline(o, *baseline, args, out, err);
    if (*grad) return do_gradcheck(o, out);
    if (*label) return do_label(o, *label, args, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const ContractViolation& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternal;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternal;
  }
  return kUsage;
}

}  // namespace attsum::cli
