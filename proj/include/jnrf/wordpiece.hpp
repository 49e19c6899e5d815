#pragma once

// Greedy longest-match-first wordpiece tokenizer.

#include <cctype>
#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "jnrf/corpus.hpp"
#include "jnrf/errors.hpp"

namespace jnrf {

inline constexpr std::string_view kUnkToken = "[UNK]";
inline constexpr std::string_view kContinuation = "##";

class Vocab {
 public:
  Vocab() : Vocab(std::vector<std::string>{}) {}

  /// Ids follow list order; "[UNK]" is appended when absent.
  explicit Vocab(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
      if (!ids_.emplace(tokens_[i], static_cast<int>(i)).second) throw DataError("duplicate vocab token '" + tokens_[i] + "'");
    }
    auto it = ids_.find(std::string(kUnkToken));
    if (it == ids_.end()) {
      unk_ = static_cast<int>(tokens_.size());
      ids_.emplace(std::string(kUnkToken), unk_);
      tokens_.emplace_back(kUnkToken);
    } else {
      unk_ = it->second;
    }
  }

  /// One token per line, line number = id.
  static Vocab load(const std::filesystem::path& path) {
    const std::string content = read_file(path);
    std::vector<std::string> tokens;
    for (std::string_view line : detail::split(content, '\n')) {
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      if (line.empty()) continue;
      tokens.emplace_back(line);
    }
    return Vocab(std::move(tokens));
  }

  void save(const std::filesystem::path& path) const {
    std::string out;
    for (const auto& t : tokens_) out += t + "\n";
    write_file(path, out);
  }

  std::size_t size() const { return tokens_.size(); }
  int unk_id() const { return unk_; }
  const std::string& token(int id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  int find(std::string_view piece) const {
    auto it = ids_.find(std::string(piece));
    return it == ids_.end() ? -1 : it->second;
  }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> ids_;
  int unk_ = 0;
};

inline bool is_split_punct(char c) {
  const auto u = static_cast<unsigned char>(c);
  return u < 0x80 && std::ispunct(u);
}

inline bool is_space(char c) {
  const auto u = static_cast<unsigned char>(c);
  return u < 0x80 && std::isspace(u);
}

/// Whitespace/punctuation pre-split; every ASCII punctuation char stands alone.
inline std::vector<std::pair<std::size_t, std::size_t>> pre_tokenize(std::string_view text) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  std::size_t i = 0;
  while (i < text.size()) {
    if (is_space(text[i])) {
      ++i;
    } else if (is_split_punct(text[i])) {
      out.emplace_back(i, i + 1);
      ++i;
    } else {
      std::size_t j = i;
      while (j < text.size() && !is_space(text[j]) && !is_split_punct(text[j])) ++j;
      out.emplace_back(i, j);
      i = j;
    }
  }
  return out;
}

inline std::vector<Token> wordpiece_tokenize(std::string_view text, const Vocab& vocab,
                                             std::size_t max_chars_per_word = 100) {
  if (vocab.size() == 0) throw DataError("wordpiece_tokenize: empty vocabulary");
  std::vector<Token> out;
  std::string candidate;
  for (const auto& [ws, we] : pre_tokenize(text)) {
    const std::string_view word = text.substr(ws, we - ws);
    std::vector<Token> pieces;
    bool bad = word.size() > max_chars_per_word;
    std::size_t pos = 0;
    while (!bad && pos < word.size()) {
      std::size_t end = word.size();
      int found = -1;
      while (end > pos) {
        candidate.assign(pos > 0 ? kContinuation : std::string_view{});
        candidate.append(word.substr(pos, end - pos));
        found = vocab.find(candidate);
        if (found >= 0) break;
        --end;
      }
      if (found < 0) {
        bad = true;
        break;
      }
      pieces.push_back({candidate, ws + pos, ws + end, found});
      pos = end;
    }
    if (bad) {
      out.push_back({std::string(kUnkToken), ws, we, vocab.unk_id()});
    } else {
      for (auto& p : pieces) out.push_back(std::move(p));
    }
  }
  return out;
}

}  // namespace jnrf
