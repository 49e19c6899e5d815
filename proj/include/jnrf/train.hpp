#pragma once

// Adam, the epoch loop over unit-size instances with gradient accumulation,
// dev-set model selection, and the binary checkpoint container.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "jnrf/annotate.hpp"
#include "jnrf/errors.hpp"
#include "jnrf/eval.hpp"
#include "jnrf/model.hpp"
#include "jnrf/rng.hpp"

namespace jnrf {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

class Adam {
 public:
  struct Moments {
    Matrix m, v;
  };

  explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}

  const AdamConfig& config() const { return cfg_; }
  std::uint64_t steps() const { return step_; }
  const std::map<std::string, Moments>& moments() const { return state_; }

  /// One update from the accumulated gradients. A parameter without a
  /// gradient is treated as having a zero gradient.
  void step(std::vector<std::pair<std::string, Tensor>>& params) {
    for (const auto& [name, t] : params)
      for (double g : t.grad().data)
        if (!std::isfinite(g)) throw NumericError("non-finite gradient in parameter " + name);
    ++step_;
    const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
    const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));
    for (auto& [name, t] : params) {
      Matrix& w = t.mutable_value();
      auto& st = state_[name];
      if (st.m.empty()) {
        st.m = Matrix(w.rows, w.cols);
        st.v = Matrix(w.rows, w.cols);
      }
      const Matrix& g = t.grad();
      const bool has = !g.empty();
      for (std::size_t i = 0; i < w.size(); ++i) {
        const double gi = has ? g.data[i] : 0.0;
        st.m.data[i] = cfg_.beta1 * st.m.data[i] + (1.0 - cfg_.beta1) * gi;
        st.v.data[i] = cfg_.beta2 * st.v.data[i] + (1.0 - cfg_.beta2) * gi * gi;
        const double mh = st.m.data[i] / c1, vh = st.v.data[i] / c2;
        w.data[i] -= cfg_.lr * mh / (std::sqrt(vh) + cfg_.eps);
      }
    }
  }

  // Checkpoint restore.
  void restore(std::uint64_t steps, std::map<std::string, Moments> state) {
    step_ = steps;
    state_ = std::move(state);
  }

 private:
  AdamConfig cfg_;
  std::uint64_t step_ = 0;
  std::map<std::string, Moments> state_;
};

enum class Granularity { kDocument, kSentence, kMixed };

inline std::string granularity_name(Granularity g) {
  switch (g) {
    case Granularity::kDocument: return "document";
    case Granularity::kSentence: return "sentence";
    case Granularity::kMixed: return "mixed";
  }
  return "?";
}

inline Granularity parse_granularity(const std::string& s) {
  if (s == "document") return Granularity::kDocument;
  if (s == "sentence") return Granularity::kSentence;
  if (s == "mixed") return Granularity::kMixed;
  throw ConfigError("unknown granularity '" + s + "' (document, sentence, mixed)");
}

struct TrainConfig {
  Granularity granularity = Granularity::kDocument;
  std::size_t doc_accumulate = 1;      // documents per update
  std::size_t sentence_batch = 64;     // sentences per update
  std::size_t epochs = 30;
  std::uint64_t seed = 13;
  AdamConfig adam;

  void validate() const {
    if (doc_accumulate == 0 || sentence_batch == 0) throw ConfigError("accumulation counts must be >= 1");
    if (epochs == 0) throw ConfigError("epochs must be >= 1");
    if (!(adam.lr > 0.0)) throw ConfigError("lr must be positive");
  }
};

/// Training instances built once from annotated documents.
struct TrainingSet {
  std::vector<Instance> documents;
  std::vector<Instance> sentences;
};

inline TrainingSet training_set(const std::vector<Document>& docs, Granularity g) {
  if (docs.empty()) throw DataError("empty training corpus");
  TrainingSet ts;
  for (const auto& d : docs) {
    if (g != Granularity::kSentence) ts.documents.push_back(document_instance(d));
    if (g != Granularity::kDocument)
      for (auto& s : sentence_instances(d)) ts.sentences.push_back(std::move(s));
  }
  return ts;
}

struct EpochStats {
  std::size_t steps = 0;
  std::size_t instances = 0;
  double mean_loss = 0.0;  // per instance
};

namespace detail {

inline std::vector<std::vector<const Instance*>> chunk(const std::vector<Instance>& items, std::size_t size, Rng& rng) {
  std::vector<const Instance*> order;
  order.reserve(items.size());
  for (const auto& it : items) order.push_back(&it);
  rng.shuffle(order);
  std::vector<std::vector<const Instance*>> out;
  for (std::size_t b = 0; b < order.size(); b += size)
    out.emplace_back(order.begin() + static_cast<long>(b), order.begin() + static_cast<long>(std::min(order.size(), b + size)));
  return out;
}

}  // namespace detail

/// One pass over the training set. Every instance is forwarded at its native
/// length; gradients of a group are summed before a single update.
inline EpochStats train_epoch(JnrfModel& model, Adam& opt, const TrainingSet& data, const TrainConfig& cfg, Rng& rng) {
  if (data.documents.empty() && data.sentences.empty()) throw DataError("empty training corpus");
  auto docs = detail::chunk(data.documents, cfg.doc_accumulate, rng);
  auto sents = detail::chunk(data.sentences, cfg.sentence_batch, rng);
  std::vector<const std::vector<const Instance*>*> units;
  for (std::size_t i = 0; i < std::max(docs.size(), sents.size()); ++i) {
    if (i < docs.size()) units.push_back(&docs[i]);
    if (i < sents.size()) units.push_back(&sents[i]);
  }
  auto params = model.trainable();
  EpochStats st;
  double total = 0.0;
  for (const auto* unit : units) {
    model.params().zero_grad();
    for (const Instance* in : *unit) {
      if (in->ids.size() != in->labels.size()) throw DimensionError("instance ids and labels differ in length");
      const LossParts lp = model.loss(*in);
      const double v = lp.total.item();
      if (!std::isfinite(v)) throw NumericError("non-finite loss");
      total += v;
      backward(lp.total);
      ++st.instances;
    }
    opt.step(params);
    ++st.steps;
  }
  st.mean_loss = st.instances ? total / static_cast<double>(st.instances) : 0.0;
  return st;
}

/// 1-based epoch with the highest score; ties go to the earliest.
inline std::size_t select_best(const std::vector<double>& scores) {
  if (scores.empty()) throw DataError("select_best needs at least one epoch");
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i)
    if (scores[i] > scores[best]) best = i;
  return best + 1;
}

/// Predicted documents for annotated inputs.
inline std::vector<Document> predict_documents(const JnrfModel& model, const std::vector<Document>& docs) {
  std::vector<Document> out;
  out.reserve(docs.size());
  for (const auto& d : docs) out.push_back(prediction_document(d, model.predict(token_ids(d))));
  return out;
}

inline double e2e_f1(const JnrfModel& model, const std::vector<Document>& docs) {
  return build_report(predict_documents(model, docs), docs).e2e.f1();
}

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double dev_f1 = 0.0;
  double seconds = 0.0;
};

/// epoch<TAB>train_loss<TAB>dev_f1<TAB>wall_seconds
inline std::string log_line(const EpochRecord& r) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%zu\t%.6f\t%.4f\t%.3f", r.epoch, r.train_loss, r.dev_f1, r.seconds);
  return buf;
}

struct FitResult {
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;  // 1-based
};

/// Trains for cfg.epochs and leaves the model at the epoch with the best dev
/// end-to-end F1. `on_epoch` (optional) sees each record as it completes.
inline FitResult fit(JnrfModel& model, Adam& opt, const std::vector<Document>& train, const std::vector<Document>& dev,
                     const TrainConfig& cfg, const std::function<void(const EpochRecord&)>& on_epoch = {}) {
  cfg.validate();
  if (dev.empty()) throw DataError("empty dev corpus");
  const TrainingSet data = training_set(train, cfg.granularity);
  Rng rng(cfg.seed);
  FitResult res;
  std::vector<double> scores;
  std::vector<Matrix> best;
  for (std::size_t e = 1; e <= cfg.epochs; ++e) {
    const auto t0 = std::chrono::steady_clock::now();
    const EpochStats st = train_epoch(model, opt, data, cfg, rng);
    EpochRecord rec;
    rec.epoch = e;
    rec.train_loss = st.mean_loss;
    rec.dev_f1 = e2e_f1(model, dev);
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    scores.push_back(rec.dev_f1);
    if (select_best(scores) == e) {
      best.clear();
      for (const auto& [n, t] : model.params().entries()) best.push_back(t.value());
    }
    res.epochs.push_back(rec);
    if (on_epoch) on_epoch(rec);
  }
  res.best_epoch = select_best(scores);
  auto& entries = model.params().entries();
  for (std::size_t i = 0; i < entries.size(); ++i) entries[i].second.mutable_value() = best[i];
  model.params().zero_grad();
  return res;
}

// ---------------------------------------------------------------- checkpoint
//
//   "JNRFCKPT" u32 version
//   u64 len, config text
//   u64 count, then per record: u32 name len, name, u64 rows, u64 cols, f64[]
//   u64 adam step, f64 lr beta1 beta2 eps
//   u64 count, then per record: name, m record, v record (shapes + f64[])
//
// Little-endian host order; the container is not meant to move across
// architectures.

inline constexpr char kCheckpointMagic[8] = {'J', 'N', 'R', 'F', 'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  std::string config_text;
  std::vector<std::pair<std::string, Matrix>> params;
  std::uint64_t adam_step = 0;
  AdamConfig adam;
  std::map<std::string, Adam::Moments> moments;
};

namespace detail {

class Writer {
 public:
  template <class T>
  void pod(const T& v) {
    out_.append(reinterpret_cast<const char*>(&v), sizeof v);
  }
  void str(const std::string& s) {
    pod<std::uint32_t>(static_cast<std::uint32_t>(s.size()));
    out_ += s;
  }
  void matrix(const Matrix& m) {
    pod<std::uint64_t>(m.rows);
    pod<std::uint64_t>(m.cols);
    out_.append(reinterpret_cast<const char*>(m.data.data()), m.data.size() * sizeof(double));
  }
  std::string& bytes() { return out_; }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(const std::string& in) : in_(in) {}
  void need(std::size_t n) const {
    if (pos_ + n > in_.size()) throw CheckpointError("truncated checkpoint at byte " + std::to_string(pos_));
  }
  template <class T>
  T pod() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, in_.data() + pos_, sizeof v);
    pos_ += sizeof v;
    return v;
  }
  std::string raw(std::size_t n) {
    need(n);
    std::string s = in_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::string str() { return raw(pod<std::uint32_t>()); }
  Matrix matrix() {
    const auto r = pod<std::uint64_t>(), c = pod<std::uint64_t>();
    if (c != 0 && r > (in_.size() - pos_) / sizeof(double) / c) throw CheckpointError("truncated checkpoint: matrix payload");
    Matrix m(r, c);
    need(m.data.size() * sizeof(double));
    std::memcpy(m.data.data(), in_.data() + pos_, m.data.size() * sizeof(double));
    pos_ += m.data.size() * sizeof(double);
    return m;
  }
  bool done() const { return pos_ == in_.size(); }

 private:
  const std::string& in_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline std::string encode_checkpoint(const Checkpoint& c) {
  detail::Writer w;
  w.bytes().append(kCheckpointMagic, sizeof kCheckpointMagic);
  w.pod(kCheckpointVersion);
  w.pod<std::uint64_t>(c.config_text.size());
  w.bytes() += c.config_text;
  w.pod<std::uint64_t>(c.params.size());
  for (const auto& [name, m] : c.params) {
    w.str(name);
    w.matrix(m);
  }
  w.pod(c.adam_step);
  w.pod(c.adam.lr);
  w.pod(c.adam.beta1);
  w.pod(c.adam.beta2);
  w.pod(c.adam.eps);
  w.pod<std::uint64_t>(c.moments.size());
  for (const auto& [name, mv] : c.moments) {
    w.str(name);
    w.matrix(mv.m);
    w.matrix(mv.v);
  }
  return std::move(w.bytes());
}

inline Checkpoint decode_checkpoint(const std::string& bytes) {
  detail::Reader r(bytes);
  if (r.raw(sizeof kCheckpointMagic) != std::string(kCheckpointMagic, sizeof kCheckpointMagic)) {
    throw CheckpointError("not a checkpoint (bad magic)");
  }
  const auto version = r.pod<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw CheckpointError("checkpoint version " + std::to_string(version) + ", expected " + std::to_string(kCheckpointVersion));
  }
  Checkpoint c;
  c.config_text = r.raw(static_cast<std::size_t>(r.pod<std::uint64_t>()));
  const auto n = r.pod<std::uint64_t>();
  for (std::uint64_t i = 0; i < n; ++i) {
    std::string name = r.str();
    c.params.emplace_back(std::move(name), r.matrix());
  }
  c.adam_step = r.pod<std::uint64_t>();
  c.adam.lr = r.pod<double>();
  c.adam.beta1 = r.pod<double>();
  c.adam.beta2 = r.pod<double>();
  c.adam.eps = r.pod<double>();
  const auto nm = r.pod<std::uint64_t>();
  for (std::uint64_t i = 0; i < nm; ++i) {
    std::string name = r.str();
    Adam::Moments mv;
    mv.m = r.matrix();
    mv.v = r.matrix();
    c.moments.emplace(std::move(name), std::move(mv));
  }
  if (!r.done()) throw CheckpointError("trailing bytes after checkpoint");
  return c;
}

/// Snapshot of a model (including the frozen table as "emb.table") and its
/// optimizer.
inline Checkpoint make_checkpoint(const JnrfModel& model, const Adam& opt, std::string config_text) {
  Checkpoint c;
  c.config_text = std::move(config_text);
  c.params.emplace_back("emb.table", model.table().weights);
  for (const auto& [n, t] : model.params().entries()) c.params.emplace_back(n, t.value());
  c.adam_step = opt.steps();
  c.adam = opt.config();
  c.moments = opt.moments();
  return c;
}

/// Embedding table stored in a checkpoint.
inline EmbeddingTable checkpoint_table(const Checkpoint& c) {
  for (const auto& [n, m] : c.params)
    if (n == "emb.table") return EmbeddingTable{m};
  throw CheckpointError("checkpoint has no emb.table record");
}

/// Copies parameter values into a model built from the same configuration.
inline void apply_checkpoint(const Checkpoint& c, JnrfModel& model, Adam* opt = nullptr) {
  std::map<std::string, const Matrix*> by_name;
  for (const auto& [n, m] : c.params) by_name[n] = &m;
  for (auto& [n, t] : model.params().entries()) {
    auto it = by_name.find(n);
    if (it == by_name.end()) throw CheckpointError("checkpoint lacks parameter " + n);
    if (!it->second->same_shape(t.value())) {
      throw CheckpointError("parameter " + n + ": checkpoint " + shape_str(*it->second) + " vs model " + shape_str(t.value()));
    }
    t.mutable_value() = *it->second;
  }
  if (by_name.size() != model.params().size() + 1) throw CheckpointError("checkpoint has parameters the model does not");
  if (opt) {
    *opt = Adam(c.adam);
    opt->restore(c.adam_step, c.moments);
  }
}

inline void save_checkpoint(const std::filesystem::path& path, const Checkpoint& c) { write_file(path, encode_checkpoint(c)); }

inline Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return decode_checkpoint(ss.str());
}

}  // namespace jnrf
