// jnrf: synthetic corpus generation, training, prediction, evaluation,
// benchmarking and corpus statistics.
//
// Exit codes: 0 ok, 2 configuration error, 3 data error, 4 runtime error.
// Failures print one line to stderr: error<TAB>kind<TAB>message.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "jnrf/bench.hpp"
#include "jnrf/config.hpp"
#include "jnrf/corpus.hpp"
#include "jnrf/eval.hpp"
#include "jnrf/stats.hpp"
#include "jnrf/synth.hpp"
#include "jnrf/train.hpp"

namespace fs = std::filesystem;
using namespace jnrf;

namespace {

std::vector<Document> load_annotated(const fs::path& dir, const Vocab& vocab) {
  if (!fs::is_directory(dir)) throw DataError("corpus directory not found: " + dir.string());
  auto docs = read_brat_dir(dir);
  annotate_all(docs, vocab);
  return docs;
}

Vocab load_vocab(const RunConfig& cfg) {
  const fs::path p = cfg.vocab_path();
  if (!fs::exists(p)) throw DataError("vocabulary not found: " + p.string());
  return Vocab::load(p);
}

int cmd_synth(const RunConfig& cfg) {
  const fs::path root = fs::path(cfg.out_dir) / "corpus";
  const Vocab vocab = synth_vocab();
  struct Split {
    const char* name;
    std::size_t n;
    std::string dir;
  };
  const Split splits[] = {{"train", cfg.n_train, cfg.train_path()}, {"dev", cfg.n_dev, cfg.dev_path()},
                          {"test", cfg.n_test, cfg.test_path()}};
  std::uint64_t k = 0;
  for (const auto& s : splits) {
    ++k;
    if (s.n == 0) continue;
    SynthConfig sc;
    sc.seed = cfg.seed * 31 + k;
    sc.n_docs = s.n;
    sc.min_tokens = cfg.min_tokens;
    sc.max_tokens = cfg.max_tokens;
    sc.entity_density = cfg.entity_density;
    sc.profile = cfg.relation_profile;
    sc.id_prefix = s.name;
    const SynthCorpus corpus = synth_corpus(sc);
    fs::remove_all(s.dir);
    write_synth_corpus(s.dir, corpus);
    std::cout << s.name << "\t" << corpus.docs.size() << "\t" << s.dir << "\n";
  }
  fs::create_directories(fs::path(cfg.vocab_path()).parent_path());
  vocab.save(cfg.vocab_path());
  return 0;
}

JnrfModel build_model(const RunConfig& cfg, EmbeddingTable table) {
  ModelConfig mc = cfg.model;
  mc.init_seed = cfg.seed;
  return JnrfModel(mc, std::move(table));
}

int cmd_train(const RunConfig& cfg) {
  const Vocab vocab = load_vocab(cfg);
  const auto train = load_annotated(cfg.train_path(), vocab);
  const auto dev = load_annotated(cfg.dev_path(), vocab);
  JnrfModel model = build_model(cfg, load_table(cfg.embeddings, vocab, cfg.embedding_dim, cfg.seed));
  Adam opt(cfg.train.adam);
  TrainConfig tc = cfg.train;
  tc.seed = cfg.seed;
  fs::create_directories(cfg.out_dir);
  std::ofstream log(fs::path(cfg.out_dir) / "train.log");
  log << "epoch\ttrain_loss\tdev_f1\twall_seconds\n";
  const FitResult res = fit(model, opt, train, dev, tc, [&](const EpochRecord& r) {
    log << log_line(r) << "\n" << std::flush;
    std::cout << log_line(r) << std::endl;
  });
  fs::path ckpt = cfg.checkpoint_path();
  if (ckpt.has_parent_path()) fs::create_directories(ckpt.parent_path());
  save_checkpoint(ckpt, make_checkpoint(model, opt, config_text(cfg)));
  std::cout << "best_epoch\t" << res.best_epoch << "\t" << ckpt.string() << "\n";
  return 0;
}

/// Rebuilds the trained model; settings come from the checkpoint, paths from
/// the current configuration.
JnrfModel load_model(const RunConfig& cfg) {
  const Checkpoint c = load_checkpoint(cfg.checkpoint_path());
  RunConfig saved = parse_config(c.config_text);
  JnrfModel model = build_model(saved, checkpoint_table(c));
  apply_checkpoint(c, model);
  return model;
}

int cmd_predict(const RunConfig& cfg, const std::string& corpus_dir, const std::string& pred_dir) {
  const Vocab vocab = load_vocab(cfg);
  const JnrfModel model = load_model(cfg);
  if (model.table().vocab_size() != vocab.size()) {
    throw DataError("vocabulary has " + std::to_string(vocab.size()) + " tokens, checkpoint table has " +
                    std::to_string(model.table().vocab_size()));
  }
  const auto docs = load_annotated(corpus_dir, vocab);
  fs::remove_all(pred_dir);
  fs::create_directories(pred_dir);
  for (const auto& d : predict_documents(model, docs)) write_brat_doc(pred_dir, d);
  std::cout << "predicted\t" << docs.size() << "\t" << pred_dir << "\n";
  return 0;
}

int cmd_evaluate(const RunConfig& cfg, const std::string& pred_dir, const std::string& gold_dir) {
  const Vocab vocab = load_vocab(cfg);
  if (!fs::is_directory(pred_dir)) throw DataError("prediction directory not found: " + pred_dir);
  if (!fs::is_directory(gold_dir)) throw DataError("gold directory not found: " + gold_dir);
  const auto pred = read_brat_dir(pred_dir);
  auto gold = read_brat_dir(gold_dir);
  for (auto& d : gold) d.tokens = wordpiece_tokenize(d.text, vocab);
  const EvalReport rep = build_report(pred, gold, cfg.match_mode);
  fs::create_directories(cfg.out_dir);
  write_file(fs::path(cfg.out_dir) / "report.txt", render_report(rep));
  write_file(fs::path(cfg.out_dir) / "report.tsv", report_tsv(rep));
  std::cout << render_report(rep);
  return 0;
}

int cmd_bench(const RunConfig& cfg) {
  const Vocab vocab = synth_vocab();
  BenchOptions opt;
  opt.lengths = cfg.bench_lengths;
  opt.trials = cfg.bench_trials;
  opt.seed = cfg.seed;
  std::vector<BenchResult> results;
  for (const auto& name : cfg.bench_systems) {
    results.push_back(bench_system(preset_system(name, cfg.model.mixer), vocab, opt));
    std::cout << bench_tsv({results.back()}) << std::flush;
  }
  fs::create_directories(cfg.out_dir);
  write_file(fs::path(cfg.out_dir) / "bench.tsv", bench_tsv(results));
  if (results.size() >= 2) {
    const std::string cmp = compare_report(results);
    write_file(fs::path(cfg.out_dir) / "compare.txt", cmp);
    std::cout << cmp;
  }
  return 0;
}

int cmd_stats(const RunConfig& cfg, std::vector<std::string> dirs) {
  const Vocab vocab = load_vocab(cfg);
  if (dirs.empty()) dirs = {cfg.train_path(), cfg.dev_path(), cfg.test_path()};
  std::vector<std::pair<std::string, CorpusStats>> splits;
  for (const auto& d : dirs) splits.emplace_back(fs::path(d).filename().string(), corpus_stats(load_annotated(d, vocab)));
  const std::string out = render_stats(splits);
  fs::create_directories(cfg.out_dir);
  write_file(fs::path(cfg.out_dir) / "stats.txt", out);
  std::cout << out;
  return 0;
}

int fail(int code, const char* kind, const std::string& msg) {
  std::string one_line = msg;
  for (char& c : one_line)
    if (c == '\n' || c == '\t') c = ' ';
  std::cerr << "error\t" << kind << "\t" << one_line << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint entity and relation extraction with Fourier token mixing"};
  app.require_subcommand(1);
  std::string config_path, out_dir;
  std::optional<std::uint64_t> seed;
  app.add_option("--config", config_path, "key = value configuration file")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "overrides the configured seed");
  app.add_option("--out", out_dir, "overrides out_dir");

  auto* synth = app.add_subcommand("synth", "generate a synthetic train/dev/test corpus");
  auto* train = app.add_subcommand("train", "train and save the best checkpoint");
  auto* predict = app.add_subcommand("predict", "write predicted .ann files");
  std::string corpus_dir, pred_dir, gold_dir;
  predict->add_option("--corpus", corpus_dir, "documents to label (default test_dir)");
  predict->add_option("--pred", pred_dir, "output directory (default out_dir/pred)");
  auto* evaluate = app.add_subcommand("evaluate", "score predictions against gold");
  evaluate->add_option("--pred", pred_dir, "predicted corpus (default out_dir/pred)");
  evaluate->add_option("--gold", gold_dir, "gold corpus (default test_dir)");
  auto* bench = app.add_subcommand("bench", "time and count a training step across lengths");
  auto* stats = app.add_subcommand("stats", "entity, relation and length statistics");
  std::vector<std::string> stats_dirs;
  stats->add_option("--corpus", stats_dirs, "corpus directories (default train, dev, test)");
  auto* show = app.add_subcommand("config", "print the effective configuration with defaults");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(2, "config", e.what());
  }

  try {
    RunConfig cfg = config_path.empty() ? RunConfig{} : parse_config(read_file(config_path));
    if (seed) cfg.seed = *seed;
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    cfg.validate();
    if (pred_dir.empty()) pred_dir = (fs::path(cfg.out_dir) / "pred").string();
    if (*synth) return cmd_synth(cfg);
    if (*train) return cmd_train(cfg);
    if (*predict) return cmd_predict(cfg, corpus_dir.empty() ? cfg.test_path() : corpus_dir, pred_dir);
    if (*evaluate) return cmd_evaluate(cfg, pred_dir, gold_dir.empty() ? cfg.test_path() : gold_dir);
    if (*bench) return cmd_bench(cfg);
    if (*stats) return cmd_stats(cfg, stats_dirs);
    if (*show) {
      std::cout << config_text(cfg, true);
      return 0;
    }
  } catch (const ConfigError& e) {
    return fail(2, "config", e.what());
  } catch (const DataError& e) {
    return fail(3, "data", e.what());
  } catch (const CheckpointError& e) {
    return fail(3, "checkpoint", e.what());
  } catch (const std::exception& e) {
    return fail(4, "runtime", e.what());
  }
  return 0;
}
