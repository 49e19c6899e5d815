#pragma once

// Documents and the BRAT standoff wire format.
//
//   T<id>\t<Type> <start> <end>[;<start> <end>...]\t<surface>
//   R<id>\t<RType> Arg1:T<i> Arg2:T<j>
//
// Offsets in .ann files count Unicode code points; internally every offset is
// a byte offset into the UTF-8 text. Discontinuous spans collapse to their
// envelope. Lines of other kinds (events, attributes, notes) are skipped.

#include <algorithm>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "jnrf/errors.hpp"
#include "jnrf/schema.hpp"

namespace jnrf {

struct EntitySpan {
  std::string id;
  EntityType type = EntityType::kDrug;
  std::size_t start = 0;  // byte offset, inclusive
  std::size_t end = 0;    // byte offset, exclusive
  std::string surface;

  bool overlaps(const EntitySpan& o) const { return start < o.end && o.start < end; }
};

/// Attribute (arg1) -> drug (arg2), both indices into Document::gold_entities.
struct Relation {
  std::string id;
  int type = 0;
  std::size_t arg1 = 0;
  std::size_t arg2 = 0;
};

struct Token {
  std::string surface;
  std::size_t start = 0;
  std::size_t end = 0;
  int vocab_id = 0;
};

/// Half-open token range [begin, end) with an entity type.
struct TokenSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
  EntityType type = EntityType::kDrug;

  bool operator==(const TokenSpan&) const = default;
};

struct Document {
  std::string doc_id;
  std::string text;
  std::vector<Token> tokens;
  std::vector<std::size_t> sentence_starts;
  std::vector<EntitySpan> gold_entities;
  std::vector<Relation> gold_relations;
  std::vector<int> bio_labels;
  /// Token range of each gold entity, parallel to gold_entities; entities that
  /// cover no token get an empty range.
  std::vector<TokenSpan> gold_token_spans;
};

namespace detail {

inline bool utf8_continuation(unsigned char c) { return (c & 0xC0) == 0x80; }

// Code point index <-> byte offset for one text.
class OffsetMap {
 public:
  explicit OffsetMap(std::string_view text) {
    ascii_ = std::all_of(text.begin(), text.end(), [](char c) { return static_cast<unsigned char>(c) < 0x80; });
    if (ascii_) {
      size_ = text.size();
      return;
    }
    for (std::size_t i = 0; i < text.size(); ++i)
      if (!utf8_continuation(static_cast<unsigned char>(text[i]))) byte_of_cp_.push_back(i);
    size_ = byte_of_cp_.size();
    byte_of_cp_.push_back(text.size());
  }

  /// Number of code points.
  std::size_t size() const { return size_; }

  std::size_t to_byte(std::size_t cp) const { return ascii_ ? cp : byte_of_cp_.at(cp); }

  std::size_t to_cp(std::size_t byte) const {
    if (ascii_) return byte;
    auto it = std::lower_bound(byte_of_cp_.begin(), byte_of_cp_.end(), byte);
    return static_cast<std::size_t>(it - byte_of_cp_.begin());
  }

 private:
  bool ascii_ = true;
  std::size_t size_ = 0;
  std::vector<std::size_t> byte_of_cp_;
};

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t b = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.push_back(s.substr(b, i - b));
      b = i + 1;
    }
  }
  return out;
}

inline bool parse_size(std::string_view s, std::size_t& out) {
  if (s.empty()) return false;
  std::size_t v = 0;
  for (char c : s) {
    if (c < '0' || c > '9') return false;
    v = v * 10 + static_cast<std::size_t>(c - '0');
  }
  out = v;
  return true;
}

}  // namespace detail

/// Parses a .txt/.ann pair. Fills doc_id, text, gold_entities and
/// gold_relations; tokens and labels are left empty.
inline Document parse_brat(std::string doc_id, std::string txt, std::string_view ann) {
  Document doc;
  doc.doc_id = std::move(doc_id);
  doc.text = std::move(txt);
  const detail::OffsetMap offsets(doc.text);
  std::map<std::string, std::size_t, std::less<>> by_id;

  struct PendingRelation {
    std::size_t line;
    std::string id;
    int type;
    std::string arg1, arg2;
  };
  std::vector<PendingRelation> pending;

  std::size_t line_no = 0;
  for (std::string_view line : detail::split(ann, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (line[0] != 'T' && line[0] != 'R') continue;
    const auto fields = detail::split(line, '\t');
    if (fields.size() < 2) throw ParseError(line_no, "expected tab-separated fields");
    const std::string id(fields[0]);

    if (line[0] == 'T') {
      if (fields.size() < 3) throw ParseError(line_no, "entity line needs id, type/offsets and surface");
      const std::string_view body = fields[1];
      const std::size_t sp = body.find(' ');
      if (sp == std::string_view::npos) throw ParseError(line_no, "missing offsets");
      const auto type = parse_entity_type(body.substr(0, sp));
      if (!type) throw ParseError(line_no, "unknown entity type '" + std::string(body.substr(0, sp)) + "'");
      std::size_t lo = SIZE_MAX, hi = 0;
      for (std::string_view frag : detail::split(body.substr(sp + 1), ';')) {
        const auto nums = detail::split(frag, ' ');
        std::size_t a = 0, b = 0;
        if (nums.size() != 2 || !detail::parse_size(nums[0], a) || !detail::parse_size(nums[1], b)) {
          throw ParseError(line_no, "malformed offsets '" + std::string(frag) + "'");
        }
        if (a >= b) throw ParseError(line_no, "empty or reversed span");
        lo = std::min(lo, a);
        hi = std::max(hi, b);
      }
      if (hi > offsets.size()) {
        throw ParseError(line_no, "offset " + std::to_string(hi) + " outside text of length " + std::to_string(offsets.size()));
      }
      if (by_id.count(id)) throw ParseError(line_no, "duplicate id " + id);
      EntitySpan e;
      e.id = id;
      e.type = *type;
      e.start = offsets.to_byte(lo);
      e.end = offsets.to_byte(hi);
      e.surface = std::string(fields[2]);
      by_id.emplace(id, doc.gold_entities.size());
      doc.gold_entities.push_back(std::move(e));
    } else {
      const auto parts = detail::split(fields[1], ' ');
      if (parts.size() != 3) throw ParseError(line_no, "relation line needs type Arg1:<id> Arg2:<id>");
      const auto rtype = parse_relation_type(parts[0]);
      if (!rtype) throw ParseError(line_no, "unknown relation type '" + std::string(parts[0]) + "'");
      std::string arg1, arg2;
      for (std::size_t i = 1; i < 3; ++i) {
        if (parts[i].rfind("Arg1:", 0) == 0) arg1 = std::string(parts[i].substr(5));
        else if (parts[i].rfind("Arg2:", 0) == 0) arg2 = std::string(parts[i].substr(5));
      }
      if (arg1.empty() || arg2.empty()) throw ParseError(line_no, "relation needs Arg1 and Arg2");
      pending.push_back({line_no, id, *rtype, arg1, arg2});
    }
  }

  for (const auto& p : pending) {
    auto a1 = by_id.find(p.arg1);
    auto a2 = by_id.find(p.arg2);
    if (a1 == by_id.end()) throw ParseError(p.line, "dangling reference Arg1:" + p.arg1);
    if (a2 == by_id.end()) throw ParseError(p.line, "dangling reference Arg2:" + p.arg2);
    const auto& e1 = doc.gold_entities[a1->second];
    const auto& e2 = doc.gold_entities[a2->second];
    if (a1->second == a2->second) throw ParseError(p.line, "relation arguments must differ");
    if (e2.type != EntityType::kDrug) throw ParseError(p.line, "Arg2 of " + std::string(relation_name(p.type)) + " must be a Drug");
    if (e1.type != attribute_of_relation(p.type)) {
      throw ParseError(p.line, "Arg1 type " + std::string(entity_name(e1.type)) + " does not match " +
                                   std::string(relation_name(p.type)));
    }
    doc.gold_relations.push_back({p.id, p.type, a1->second, a2->second});
  }
  return doc;
}

/// Serializes entities and relations back into .ann lines. Entity ids are
/// renumbered T1.., relation ids R1.. in vector order.
inline std::string write_ann(const std::string& text, const std::vector<EntitySpan>& entities,
                             const std::vector<Relation>& relations) {
  const detail::OffsetMap offsets(text);
  std::ostringstream os;
  for (std::size_t i = 0; i < entities.size(); ++i) {
    const auto& e = entities[i];
    std::string surface = text.substr(e.start, e.end - e.start);
    std::replace(surface.begin(), surface.end(), '\n', ' ');
    std::replace(surface.begin(), surface.end(), '\t', ' ');
    os << 'T' << (i + 1) << '\t' << entity_name(e.type) << ' ' << offsets.to_cp(e.start) << ' '
       << offsets.to_cp(e.end) << '\t' << surface << '\n';
  }
  for (std::size_t i = 0; i < relations.size(); ++i) {
    const auto& r = relations[i];
    os << 'R' << (i + 1) << '\t' << relation_name(r.type) << " Arg1:T" << (r.arg1 + 1) << " Arg2:T" << (r.arg2 + 1)
       << '\n';
  }
  return os.str();
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw DataError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw DataError("cannot write " + p.string());
  out << content;
}

/// Reads every <id>.txt in `dir` with its <id>.ann (absent .ann = no
/// annotations), sorted by id.
inline std::vector<Document> read_brat_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw DataError("corpus directory not found: " + dir.string());
  std::vector<std::filesystem::path> txts;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".txt") txts.push_back(entry.path());
  std::sort(txts.begin(), txts.end());
  std::vector<Document> docs;
  docs.reserve(txts.size());
  for (const auto& t : txts) {
    auto ann_path = t;
    ann_path.replace_extension(".ann");
    const std::string ann = std::filesystem::exists(ann_path) ? read_file(ann_path) : std::string();
    try {
      docs.push_back(parse_brat(t.stem().string(), read_file(t), ann));
    } catch (const ParseError& e) {
      throw DataError(ann_path.string() + ": " + e.what());
    }
  }
  return docs;
}

inline void write_brat_doc(const std::filesystem::path& dir, const Document& doc) {
  write_file(dir / (doc.doc_id + ".txt"), doc.text);
  write_file(dir / (doc.doc_id + ".ann"), write_ann(doc.text, doc.gold_entities, doc.gold_relations));
}

}  // namespace jnrf
