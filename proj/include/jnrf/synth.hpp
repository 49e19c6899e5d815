#pragma once

// Seeded synthetic medication corpus.
//
// Documents are runs of short clinical-style sentences. Medication events
// (one drug plus related attributes) are separated by entity-free filler so
// that a relation's drug is the nearest drug in nearly all cases. Condition
// words are shared between Reason and ADE and numbers between Strength,
// Dosage, Duration and Frequency; only the surrounding words decide the type.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "jnrf/corpus.hpp"
#include "jnrf/errors.hpp"
#include "jnrf/rng.hpp"
#include "jnrf/schema.hpp"
#include "jnrf/wordpiece.hpp"

namespace jnrf {

inline constexpr std::size_t kMinSynthTokens = 16;
inline constexpr std::size_t kMaxSynthTokens = 32768;
inline constexpr double kMaxEntityDensity = 0.3;
inline constexpr int kMaxSentenceDistance = 4;

/// Distribution over signed sentence distance sIdx(drug) - sIdx(attribute).
struct RelationProfile {
  std::vector<std::pair<int, double>> weights;

  /// "0:0.8,-1:0.12,1:0.08"
  static RelationProfile parse(std::string_view s) {
    RelationProfile p;
    for (std::string_view item : detail::split(s, ',')) {
      while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
      while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
      if (item.empty()) continue;
      const auto colon = item.find(':');
      if (colon == std::string_view::npos) throw ConfigError("relation profile entry '" + std::string(item) + "' lacks ':'");
      try {
        const int d = std::stoi(std::string(item.substr(0, colon)));
        const double w = std::stod(std::string(item.substr(colon + 1)));
        p.weights.emplace_back(d, w);
      } catch (const std::logic_error&) {
        throw ConfigError("relation profile entry '" + std::string(item) + "' is not <int>:<weight>");
      }
    }
    p.validate();
    return p;
  }

  std::string str() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < weights.size(); ++i) os << (i ? "," : "") << weights[i].first << ':' << weights[i].second;
    return os.str();
  }

  void validate() const {
    double total = 0.0;
    for (auto [d, w] : weights) {
      if (d < -kMaxSentenceDistance || d > kMaxSentenceDistance) {
        throw ConfigError("relation profile distance " + std::to_string(d) + " outside [-4, 4]");
      }
      if (!(w >= 0.0)) throw ConfigError("relation profile weights must be non-negative");
      total += w;
    }
    if (!(total > 0.0)) throw ConfigError("relation profile has no positive weight");
  }

  int sample(Rng& rng) const {
    double total = 0.0;
    for (auto [d, w] : weights) total += w;
    double u = rng.uniform() * total;
    for (auto [d, w] : weights) {
      if (u < w) return d;
      u -= w;
    }
    return weights.back().first;
  }
};

inline RelationProfile default_relation_profile() { return {{{0, 0.8}, {-1, 0.1}, {-2, 0.03}, {1, 0.07}}}; }

struct SynthConfig {
  std::uint64_t seed = 13;
  std::size_t n_docs = 16;
  std::size_t min_tokens = 200;
  std::size_t max_tokens = 2000;
  double entity_density = 0.2;
  RelationProfile profile = default_relation_profile();
  std::string id_prefix = "doc";
};

struct SynthCorpus {
  Vocab vocab;
  std::vector<Document> docs;
};

namespace synth {

// Drug names as wordpiece sequences.
inline const std::vector<std::vector<std::string>>& drugs() {
  static const std::vector<std::vector<std::string>> v = {
      {"meto", "##prolol"}, {"lisino", "##pril"}, {"aspirin"},          {"warfarin"},       {"hepar", "##in"},
      {"insulin"},          {"lasix"},            {"vanco", "##mycin"}, {"amox", "##icillin"}, {"predni", "##sone"},
      {"atorva", "##statin"}, {"simva", "##statin"}, {"gaba", "##pentin"}, {"oxy", "##codone"}, {"acetamin", "##ophen"},
      {"furo", "##semide"}, {"digoxin"},          {"cipro", "##floxacin"}, {"ceftri", "##axone"}, {"morphine"},
      {"amlo", "##dipine"}, {"levo", "##thyroxine"}, {"pantopra", "##zole"}, {"ondan", "##setron"}};
  return v;
}

inline const std::vector<std::string>& numbers() {
  static const std::vector<std::string> v = {"1", "2", "3", "4", "5", "6", "7", "8", "10", "12", "14", "20", "25", "40", "50", "81", "100", "250", "500"};
  return v;
}
inline const std::vector<std::string>& units() {
  static const std::vector<std::string> v = {"mg", "mcg", "units", "g", "meq"};
  return v;
}
inline const std::vector<std::vector<std::string>>& forms() {
  static const std::vector<std::vector<std::string>> v = {{"tablet"}, {"tablets"}, {"capsule"}, {"tab"}, {"solution"}, {"patch"}, {"injection"}, {"cream"}};
  return v;
}
inline const std::vector<std::vector<std::string>>& routes() {
  static const std::vector<std::vector<std::string>> v = {{"po"}, {"iv"}, {"oral"}, {"by", "mouth"}, {"subcutaneous"}, {"topical"}, {"sq"}, {"im"}};
  return v;
}
inline const std::vector<std::vector<std::string>>& frequencies() {
  static const std::vector<std::vector<std::string>> v = {{"daily"}, {"bid"}, {"tid"}, {"qid"}, {"q6h"}, {"twice", "daily"}, {"at", "bedtime"}, {"prn"}, {"weekly"}};
  return v;
}
inline const std::vector<std::string>& hour_counts() {
  static const std::vector<std::string> v = {"4", "6", "8", "12"};
  return v;
}
inline const std::vector<std::string>& duration_units() {
  static const std::vector<std::string> v = {"days", "weeks", "months"};
  return v;
}
// Shared by Reason and ADE; also appear as plain context ("denies pain").
inline const std::vector<std::vector<std::string>>& conditions() {
  static const std::vector<std::vector<std::string>> v = {
      {"pain"},         {"fever"},      {"nausea"},          {"rash"},        {"hypertension"}, {"infection"},
      {"bleeding"},     {"hypotension"}, {"edema"},          {"anxiety"},     {"diarrhea"},     {"constipation"},
      {"atrial", "fibrillation"}, {"renal", "failure"}, {"chest", "pain"}, {"insomnia"}, {"hypokalemia"}, {"seizures"},
      {"dizziness"},    {"headache"},   {"cellulitis"},      {"pneumonia"}};
  return v;
}
inline const std::vector<std::string>& filler_words() {
  static const std::vector<std::string> v = {
      "patient", "seen",    "in",      "clinic",   "today",    "vital",   "signs",       "stable",   "no",
      "acute",   "distress", "labs",   "reviewed", "family",   "plan",    "discussed",   "follow",   "up",
      "scheduled", "history", "of",    "admitted", "the",      "and",     "exam",        "unremarkable", "lungs",
      "clear",   "heart",   "regular", "abdomen",  "soft",     "alert",   "oriented",    "social",   "work",
      "consulted", "imaging", "obtained", "results", "pending", "nursing", "notes",      "afebrile", "overnight",
      "comfortable", "ambulating", "diet", "tolerated", "home", "condition", "good", "discharged", "ward",
      "stable", "team", "rounds", "morning", "evening", "bed", "chart", "monitoring", "continued", "routine"};
  return v;
}
// Context words that occur only in event templates.
inline const std::vector<std::string>& template_words() {
  static const std::vector<std::string> v = {
      "started", "continue", "take", "given", "received", "resume", "on", "for", "with", "was", "treated", "to",
      "treat", "developed", "after", "stopped", "due", "secondary", "complicated", "by", "every", "hours", "dose",
      "is", "this", "indication", "then", "course", "attributed", "medication", "presented", "reported", "denies",
      "pulse", "held", "because", "of", "new", "onset"};
  return v;
}

inline Vocab build_vocab() {
  std::vector<std::string> out{".", ",", ":", "(", ")", "-", "/"};
  std::unordered_set<std::string> seen(out.begin(), out.end());
  auto add = [&](const std::string& w) {
    if (seen.insert(w).second) out.push_back(w);
  };
  auto add_all = [&](const auto& groups) {
    for (const auto& g : groups)
      for (const auto& w : g) add(w);
  };
  add_all(drugs());
  add_all(forms());
  add_all(routes());
  add_all(frequencies());
  add_all(conditions());
  for (const auto* list : {&numbers(), &units(), &hour_counts(), &duration_units(), &filler_words(), &template_words()})
    for (const auto& w : *list) add(w);
  return Vocab(std::move(out));
}

// One chunk of a sentence: plain context words or a typed entity.
struct Piece {
  std::vector<std::string> words;
  std::optional<EntityType> type;
};
using Sentence = std::vector<Piece>;

struct Event {
  std::vector<Sentence> sentences;
};

inline std::string join_drug(const std::vector<std::string>& pieces) {
  std::string w;
  for (const auto& p : pieces) w += p.rfind("##", 0) == 0 ? p.substr(2) : p;
  return w;
}

class Templates {
 public:
  explicit Templates(Rng& rng) : rng_(rng) {}

  Piece ctx(std::vector<std::string> w) { return {std::move(w), std::nullopt}; }
  Piece ent(EntityType t, std::vector<std::string> w) { return {std::move(w), t}; }

  Piece drug() { return ent(EntityType::kDrug, {join_drug(rng_.pick(drugs()))}); }
  Piece strength() { return ent(EntityType::kStrength, {rng_.pick(numbers()), rng_.pick(units())}); }
  Piece dosage() { return ent(EntityType::kDosage, {rng_.pick(numbers())}); }
  Piece form() { return ent(EntityType::kForm, rng_.pick(forms())); }
  Piece route() { return ent(EntityType::kRoute, rng_.pick(routes())); }
  Piece frequency() {
    if (rng_.chance(0.3)) return ent(EntityType::kFrequency, {"every", rng_.pick(hour_counts()), "hours"});
    return ent(EntityType::kFrequency, rng_.pick(frequencies()));
  }
  Piece duration() { return ent(EntityType::kDuration, {rng_.pick(numbers()), rng_.pick(duration_units())}); }
  Piece condition(EntityType t) { return ent(t, rng_.pick(conditions())); }

  Piece lead() {
    static const std::vector<std::vector<std::string>> v = {{"started"}, {"continue"}, {"take"}, {"given"}, {"received"}, {"resume"}, {"on"}};
    return ctx(rng_.pick(v));
  }

  // Medication attributes in one sentence after the drug.
  Sentence med_sentence(bool with_drug) {
    Sentence s;
    s.push_back(lead());
    if (with_drug) s.push_back(drug());
    std::size_t attrs = 0;
    if (rng_.chance(0.75)) {
      s.push_back(strength());
      ++attrs;
    }
    if (rng_.chance(0.35)) {
      s.push_back(dosage());
      s.push_back(form());
      attrs += 2;
    } else if (rng_.chance(0.3)) {
      s.push_back(form());
      ++attrs;
    }
    if (rng_.chance(0.55)) {
      s.push_back(route());
      ++attrs;
    }
    if (attrs == 0 || rng_.chance(0.7)) s.push_back(frequency());
    if (rng_.chance(0.2)) {
      s.push_back(ctx({"for"}));
      s.push_back(duration());
    }
    return s;
  }

  Event med(int d) {
    if (d == 0) return {{med_sentence(true)}};
    Sentence drug_s{lead(), drug()};
    Sentence attr_s;
    switch (rng_.below(3)) {
      case 0:
        attr_s = {ctx({"dose", "is"}), strength()};
        if (rng_.chance(0.6)) attr_s.push_back(frequency());
        break;
      case 1:
        attr_s = {ctx({"take"}), route(), frequency()};
        break;
      default:
        attr_s = {ctx({"continue", "for"}), duration()};
        break;
    }
    if (d < 0) return with_gap(drug_s, attr_s, -d);
    Sentence attr_first{ctx({"dose", "is"}), strength(), frequency()};
    Sentence drug_after{ctx({"medication", "is"}), drug()};
    return with_gap(attr_first, drug_after, d);
  }

  Event reason(int d) {
    const auto R = EntityType::kReason;
    if (d == 0) {
      switch (rng_.below(4)) {
        case 0: {
          Sentence s{lead(), drug()};
          if (rng_.chance(0.4)) s.push_back(strength());
          if (rng_.chance(0.4)) s.push_back(frequency());
          s.push_back(ctx({"for"}));
          s.push_back(condition(R));
          return {{s}};
        }
        case 1:
          return {{{drug(), ctx({"was", "given", "to", "treat"}), condition(R)}}};
        case 2:
          return {{{condition(R), ctx({"was", "treated", "with"}), drug()}}};
        default:
          return {{{ctx({"started"}), drug(), ctx({"for", "new", "onset"}), condition(R)}}};
      }
    }
    if (d < 0) return with_gap({lead(), drug()}, {ctx({"indication", "is"}), condition(R)}, -d);
    return with_gap({ctx({"presented", "with"}), condition(R)}, {ctx({"treated", "with"}), drug()}, d);
  }

  Event ade(int d) {
    const auto A = EntityType::kAde;
    if (d == 0) {
      switch (rng_.below(4)) {
        case 0:
          return {{{ctx({"developed"}), condition(A), ctx({"after"}), drug()}}};
        case 1:
          return {{{drug(), ctx({"was", "stopped", "due", "to"}), condition(A)}}};
        case 2:
          return {{{drug(), ctx({"held", "because", "of"}), condition(A)}}};
        default:
          return {{{condition(A), ctx({"secondary", "to"}), drug()}}};
      }
    }
    if (d < 0) return with_gap({ctx({"given"}), drug()}, {ctx({"then", "developed"}), condition(A)}, -d);
    return with_gap({ctx({"developed"}), condition(A)}, {ctx({"attributed", "to"}), drug()}, d);
  }

  Event event(int d) {
    const double u = rng_.uniform();
    if (u < 0.55) return med(d);
    if (u < 0.8) return reason(d);
    return ade(d);
  }

  // Entity-free sentence of exactly `tokens` tokens including the final '.'.
  Sentence filler(std::size_t tokens) {
    Sentence s;
    if (tokens == 0) return s;
    std::size_t words = tokens - 1;
    if (words >= 3 && rng_.chance(0.15)) {
      const auto& c = rng_.pick(conditions());
      if (c.size() + 1 <= words) {
        s.push_back(ctx({"denies"}));
        s.push_back(ctx(c));
        words -= c.size() + 1;
      }
    } else if (words >= 3 && rng_.chance(0.1)) {
      s.push_back(ctx({"pulse", rng_.pick(numbers())}));
      words -= 2;
    }
    std::vector<std::string> w;
    for (std::size_t i = 0; i < words; ++i) w.push_back(rng_.pick(filler_words()));
    if (!w.empty()) s.insert(s.begin(), ctx(std::move(w)));
    return s;
  }

 private:
  Event with_gap(Sentence first, Sentence second, int gap) {
    Event e;
    e.sentences.push_back(std::move(first));
    for (int i = 1; i < gap; ++i) e.sentences.push_back(filler(static_cast<std::size_t>(rng_.range(4, 8))));
    e.sentences.push_back(std::move(second));
    return e;
  }

  Rng& rng_;
};

class DocBuilder {
 public:
  explicit DocBuilder(const Vocab& vocab) : vocab_(vocab) {}

  std::size_t tokens() const { return tokens_; }
  std::size_t entity_tokens() const { return entity_tokens_; }

  std::size_t count(const std::string& w) {
    auto it = cache_.find(w);
    if (it != cache_.end()) return it->second;
    const std::size_t n = wordpiece_tokenize(w, vocab_).size();
    cache_.emplace(w, n);
    return n;
  }

  // Token count of a sentence including the terminating '.'.
  std::size_t measure(const Sentence& s, std::size_t* ent = nullptr) {
    std::size_t n = 1, e = 0;
    for (const auto& p : s) {
      std::size_t k = 0;
      for (const auto& w : p.words) k += count(w);
      n += k;
      if (p.type) e += k;
    }
    if (ent) *ent = e;
    return n;
  }

  std::size_t measure(const Event& ev, std::size_t* ent = nullptr) {
    std::size_t n = 0, e = 0;
    for (const auto& s : ev.sentences) {
      std::size_t se = 0;
      n += measure(s, &se);
      e += se;
    }
    if (ent) *ent = e;
    return n;
  }

  // Appends a sentence; returns indices of its entities in order.
  std::vector<std::size_t> sentence(const Sentence& s, bool newline_after) {
    std::vector<std::size_t> ids;
    for (const auto& p : s) {
      std::size_t start = 0;
      for (std::size_t i = 0; i < p.words.size(); ++i) {
        append_word(p.words[i]);
        if (i == 0) start = text_.size() - p.words[i].size();
        if (p.type) entity_tokens_ += count(p.words[i]);
      }
      if (p.type) {
        ids.push_back(entities_.size());
        EntitySpan e;
        e.id = "T" + std::to_string(entities_.size() + 1);
        e.type = *p.type;
        e.start = start;
        e.end = text_.size();
        e.surface = text_.substr(e.start, e.end - e.start);
        entities_.push_back(std::move(e));
      }
    }
    append_word(".");
    if (newline_after) text_ += '\n';
    return ids;
  }

  void event(const Event& ev, Rng& rng) {
    std::optional<std::size_t> drug;
    std::vector<std::size_t> attrs;
    for (const auto& s : ev.sentences) {
      for (std::size_t id : sentence(s, rng.chance(0.15))) {
        if (entities_[id].type == EntityType::kDrug) drug = id;
        else attrs.push_back(id);
      }
    }
    if (!drug) throw GenerationError("event without a drug");
    for (std::size_t a : attrs) {
      const int rtype = *relation_for_attribute(entities_[a].type);
      relations_.push_back({"R" + std::to_string(relations_.size() + 1), rtype, a, *drug});
    }
  }

  Document finish(std::string doc_id) {
    Document d;
    d.doc_id = std::move(doc_id);
    d.text = std::move(text_);
    if (!d.text.empty() && d.text.back() != '\n') d.text += '\n';
    d.gold_entities = std::move(entities_);
    d.gold_relations = std::move(relations_);
    return d;
  }

 private:
  void append_word(const std::string& w) {
    if (!text_.empty() && text_.back() != '\n') text_ += ' ';
    text_ += w;
    tokens_ += count(w);
  }

  const Vocab& vocab_;
  std::unordered_map<std::string, std::size_t> cache_;
  std::string text_;
  std::size_t tokens_ = 0;
  std::size_t entity_tokens_ = 0;
  std::vector<EntitySpan> entities_;
  std::vector<Relation> relations_;
};

}  // namespace synth

/// Vocabulary covering every word the generator can emit.
inline Vocab synth_vocab() { return synth::build_vocab(); }

/// One document of exactly `n_tokens` wordpiece tokens under `vocab`.
inline Document synth_document(const Vocab& vocab, Rng& rng, std::size_t n_tokens, double entity_density,
                               const RelationProfile& profile, std::string doc_id) {
  if (n_tokens < kMinSynthTokens || n_tokens > kMaxSynthTokens) {
    throw GenerationError("document length " + std::to_string(n_tokens) + " outside [16, 32768]");
  }
  if (!(entity_density >= 0.0) || entity_density > kMaxEntityDensity) {
    throw GenerationError("entity density " + std::to_string(entity_density) + " cannot be satisfied (max " +
                          std::to_string(kMaxEntityDensity) + ")");
  }
  synth::Templates tpl(rng);
  synth::DocBuilder b(vocab);
  auto remaining = [&] { return n_tokens - b.tokens(); };
  auto filler_run = [&](std::size_t k) {
    while (k > 0) {
      const std::size_t len = k <= 12 ? k : static_cast<std::size_t>(rng.range(5, 10));
      b.sentence(tpl.filler(len), rng.chance(0.15));
      k -= len;
    }
  };

  filler_run(std::min<std::size_t>(remaining(), static_cast<std::size_t>(rng.range(4, 10))));
  while (remaining() > 0) {
    bool placed = false;
    if (entity_density > 0.0) {
      const auto ev = tpl.event(profile.sample(rng));
      std::size_t ev_ent = 0;
      const std::size_t ev_len = b.measure(ev, &ev_ent);
      const std::size_t sep = static_cast<std::size_t>(rng.range(10, 18));
      const double after = static_cast<double>(b.entity_tokens() + ev_ent) / static_cast<double>(b.tokens() + sep + ev_len);
      if (sep + ev_len <= remaining() && after <= entity_density + 0.02) {
        filler_run(sep);
        b.event(ev, rng);
        placed = true;
      }
    }
    if (!placed) filler_run(std::min<std::size_t>(remaining(), static_cast<std::size_t>(rng.range(5, 10))));
  }

  const double achieved = static_cast<double>(b.entity_tokens()) / static_cast<double>(n_tokens);
  const double tol = std::max(0.05, 40.0 / static_cast<double>(n_tokens));
  if (std::abs(achieved - entity_density) > tol) {
    throw GenerationError("entity density " + std::to_string(entity_density) + " cannot be satisfied at length " +
                          std::to_string(n_tokens) + " (reached " + std::to_string(achieved) + ")");
  }
  return b.finish(std::move(doc_id));
}

inline SynthCorpus synth_corpus(const SynthConfig& cfg) {
  if (cfg.min_tokens > cfg.max_tokens || cfg.min_tokens < kMinSynthTokens || cfg.max_tokens > kMaxSynthTokens) {
    throw GenerationError("length range [" + std::to_string(cfg.min_tokens) + ", " + std::to_string(cfg.max_tokens) +
                          "] not within [16, 32768]");
  }
  cfg.profile.validate();
  SynthCorpus out{synth_vocab(), {}};
  const int width = static_cast<int>(std::to_string(cfg.n_docs > 0 ? cfg.n_docs - 1 : 0).size());
  for (std::size_t i = 0; i < cfg.n_docs; ++i) {
    Rng rng(cfg.seed * 1000003ull + i);
    const auto n = static_cast<std::size_t>(rng.range(static_cast<long>(cfg.min_tokens), static_cast<long>(cfg.max_tokens)));
    std::string idx = std::to_string(i);
    idx.insert(0, static_cast<std::size_t>(std::max(0, width - static_cast<int>(idx.size()))), '0');
    out.docs.push_back(synth_document(out.vocab, rng, n, cfg.entity_density, cfg.profile, cfg.id_prefix + idx));
  }
  return out;
}

/// Writes <id>.txt/<id>.ann for every document.
inline void write_synth_corpus(const std::filesystem::path& dir, const SynthCorpus& corpus) {
  std::filesystem::create_directories(dir);
  for (const auto& d : corpus.docs) write_brat_doc(dir, d);
}

}  // namespace jnrf
