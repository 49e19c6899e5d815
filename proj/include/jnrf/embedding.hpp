#pragma once

// Frozen token embeddings plus additive sinusoidal positional encoding.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "jnrf/corpus.hpp"
#include "jnrf/errors.hpp"
#include "jnrf/rng.hpp"
#include "jnrf/tensor.hpp"
#include "jnrf/wordpiece.hpp"

namespace jnrf {

/// Never trained; not part of any optimizer state.
struct EmbeddingTable {
  Matrix weights;  // vocab_size x d

  std::size_t vocab_size() const { return weights.rows; }
  std::size_t dim() const { return weights.cols; }
};

/// Unit-variance normal table, deterministic in `seed`.
inline EmbeddingTable random_table(std::size_t vocab_size, std::size_t d, std::uint64_t seed) {
  if (d == 0) throw ConfigError("embedding dimension must be positive");
  Rng rng(seed);
  EmbeddingTable t{Matrix(vocab_size, d)};
  for (auto& v : t.weights.data) v = rng.normal();
  return t;
}

/// Parses "token<TAB>v1 v2 ... vd" lines into rows ordered by vocab id. Every
/// vocab token must be present.
inline EmbeddingTable parse_table(std::string_view content, const Vocab& vocab) {
  EmbeddingTable t;
  std::vector<bool> seen(vocab.size(), false);
  std::size_t d = 0, line_no = 0;
  for (std::string_view line : detail::split(content, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string_view::npos) throw ParseError(line_no, "expected token<TAB>values");
    const std::string token(line.substr(0, tab));
    std::vector<double> values;
    for (std::string_view f : detail::split(line.substr(tab + 1), ' ')) {
      if (f.empty()) continue;
      try {
        std::size_t used = 0;
        values.push_back(std::stod(std::string(f), &used));
        if (used != f.size()) throw std::invalid_argument("trailing");
      } catch (const std::logic_error&) {
        throw ParseError(line_no, "bad number '" + std::string(f) + "'");
      }
    }
    if (values.empty()) throw ParseError(line_no, "no values for '" + token + "'");
    if (d == 0) {
      d = values.size();
      t.weights = Matrix(vocab.size(), d);
    } else if (values.size() != d) {
      throw ParseError(line_no, "dimension " + std::to_string(values.size()) + " differs from " + std::to_string(d));
    }
    const int id = vocab.find(token);
    if (id < 0) throw ParseError(line_no, "token '" + token + "' not in vocabulary");
    std::copy(values.begin(), values.end(), t.weights.row(static_cast<std::size_t>(id)));
    seen[static_cast<std::size_t>(id)] = true;
  }
  for (std::size_t i = 0; i < seen.size(); ++i)
    if (!seen[i]) throw DataError("embedding file lacks token '" + vocab.token(static_cast<int>(i)) + "'");
  return t;
}

/// Loads `path`, or falls back to random_table(vocab.size(), d, seed) when the
/// path is empty or does not exist.
inline EmbeddingTable load_table(const std::filesystem::path& path, const Vocab& vocab, std::size_t d, std::uint64_t seed) {
  if (path.empty() || !std::filesystem::exists(path)) return random_table(vocab.size(), d, seed);
  try {
    return parse_table(read_file(path), vocab);
  } catch (const ParseError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

/// PE(pos, 2i) = sin(pos / 10000^(2i/d)), PE(pos, 2i+1) = cos(same).
inline void positional_encoding(std::size_t pos, std::size_t d, double* out) {
  if (d % 2 != 0) throw ConfigError("positional encoding needs an even dimension, got " + std::to_string(d));
  for (std::size_t i = 0; i < d; i += 2) {
    const double angle = static_cast<double>(pos) / std::pow(10000.0, static_cast<double>(i) / static_cast<double>(d));
    out[i] = std::sin(angle);
    out[i + 1] = std::cos(angle);
  }
}

inline std::vector<double> positional_encoding(std::size_t pos, std::size_t d) {
  std::vector<double> v(d);
  positional_encoding(pos, d, v.data());
  return v;
}

/// Row i = weights[ids[i]] + PE(i). The result is a constant: no gradient
/// reaches the table.
inline Tensor embed(const std::vector<int>& ids, const EmbeddingTable& table) {
  const std::size_t d = table.dim();
  if (d % 2 != 0) throw ConfigError("positional encoding needs an even dimension, got " + std::to_string(d));
  Matrix out(ids.size(), d);
  std::vector<double> pe(d);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || static_cast<std::size_t>(ids[i]) >= table.vocab_size()) {
      throw DataError("token id " + std::to_string(ids[i]) + " outside vocabulary of " + std::to_string(table.vocab_size()));
    }
    positional_encoding(i, d, pe.data());
    const double* w = table.weights.row(static_cast<std::size_t>(ids[i]));
    double* o = out.row(i);
    for (std::size_t j = 0; j < d; ++j) o[j] = w[j] + pe[j];
  }
  return Tensor::constant(std::move(out));
}

inline std::vector<int> token_ids(const Document& doc) {
  std::vector<int> ids;
  ids.reserve(doc.tokens.size());
  for (const auto& t : doc.tokens) ids.push_back(t.vocab_id);
  return ids;
}

}  // namespace jnrf
