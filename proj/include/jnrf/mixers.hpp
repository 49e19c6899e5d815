#pragma once

// Sequence mixing blocks sharing one residual skeleton:
//
//   h   = LN1(x + mix(x))
//   out = LN2(h + FFN(h)),  FFN(h) = gelu(h W1 + b1) W2 + b2
//
// mix is the Fourier transform (fnet), absent (mlp: h = LN1(x)), or
// scaled dot-product self-attention inside non-overlapping windows.

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "jnrf/counters.hpp"
#include "jnrf/errors.hpp"
#include "jnrf/fourier.hpp"
#include "jnrf/ops.hpp"
#include "jnrf/params.hpp"
#include "jnrf/rng.hpp"

namespace jnrf {

enum class MixerKind { kFnet, kMlp, kWindowedAttention };

inline std::string mixer_kind_name(MixerKind k) {
  switch (k) {
    case MixerKind::kFnet: return "fnet";
    case MixerKind::kMlp: return "mlp";
    case MixerKind::kWindowedAttention: return "windowed_attention";
  }
  return "?";
}

inline MixerKind parse_mixer_kind(const std::string& s) {
  if (s == "fnet") return MixerKind::kFnet;
  if (s == "mlp") return MixerKind::kMlp;
  if (s == "windowed_attention") return MixerKind::kWindowedAttention;
  throw ConfigError("unknown mixer kind '" + s + "' (fnet, mlp, windowed_attention)");
}

struct MixerConfig {
  MixerKind kind = MixerKind::kFnet;
  std::size_t n_blocks = 2;
  std::size_t d = 64;
  std::size_t ffn_hidden = 128;
  std::size_t window = 512;      // windowed_attention
  std::size_t n_attn_heads = 1;  // windowed_attention
  std::size_t fnet_window = 0;   // fnet; 0 mixes the whole sequence at once

  void validate() const {
    if (d == 0 || ffn_hidden == 0) throw ConfigError("mixer widths must be >= 1");
    if (window == 0) throw ConfigError("window must be >= 1");
    if (n_attn_heads == 0 || d % n_attn_heads != 0) {
      throw ConfigError("n_attn_heads must divide d (d=" + std::to_string(d) + ")");
    }
  }
};

/// Half-open row ranges of the ceil(n / window) non-overlapping segments.
inline std::vector<std::pair<std::size_t, std::size_t>> window_segments(std::size_t n, std::size_t window) {
  if (window == 0) throw ConfigError("window must be >= 1");
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t b = 0; b < n; b += window) out.emplace_back(b, std::min(n, b + window));
  return out;
}

/// Parameters of one block under `prefix` ("lm.0." ...).
inline void register_block(ParamStore& ps, const std::string& prefix, const MixerConfig& cfg, Rng& rng) {
  const std::size_t d = cfg.d, h = cfg.ffn_hidden;
  if (cfg.kind == MixerKind::kWindowedAttention) {
    for (const char* m : {"q", "k", "v", "o"}) {
      ps.add_weight(prefix + "attn.w" + m, d, d, rng);
      ps.add_const(prefix + "attn.b" + m, 1, d, 0.0);
    }
  }
  ps.add_const(prefix + "ln1.g", 1, d, 1.0);
  ps.add_const(prefix + "ln1.b", 1, d, 0.0);
  ps.add_weight(prefix + "ffn.w1", d, h, rng);
  ps.add_const(prefix + "ffn.b1", 1, h, 0.0);
  ps.add_weight(prefix + "ffn.w2", h, d, rng);
  ps.add_const(prefix + "ffn.b2", 1, d, 0.0);
  ps.add_const(prefix + "ln2.g", 1, d, 1.0);
  ps.add_const(prefix + "ln2.b", 1, d, 0.0);
}

namespace detail {

inline void check_width(const char* who, const Tensor& x, const MixerConfig& cfg) {
  if (x.cols() != cfg.d) {
    throw DimensionError(std::string(who) + ": input " + shape_str(x.value()) + " does not match d=" + std::to_string(cfg.d));
  }
}

inline Tensor ffn_residual(const Tensor& h, const ParamStore& ps, const std::string& prefix) {
  const Tensor f = linear(gelu(linear(h, ps.get(prefix + "ffn.w1"), ps.get(prefix + "ffn.b1"))), ps.get(prefix + "ffn.w2"),
                          ps.get(prefix + "ffn.b2"));
  return layer_norm(add(h, f), ps.get(prefix + "ln2.g"), ps.get(prefix + "ln2.b"));
}

}  // namespace detail

/// Fourier mixing over the whole sequence, or per non-overlapping window when
/// `window` > 0.
inline Tensor windowed_fourier_mix(const Tensor& x, std::size_t window) {
  if (window == 0 || x.rows() <= window) return fourier_mix(x);
  std::vector<Tensor> parts;
  for (auto [b, e] : window_segments(x.rows(), window)) parts.push_back(fourier_mix(row_slice(x, b, e)));
  return concat_rows(parts);
}

inline Tensor fnet_block(const Tensor& x, const ParamStore& ps, const std::string& prefix, const MixerConfig& cfg) {
  detail::check_width("fnet_block", x, cfg);
  const Tensor h = layer_norm(add(x, windowed_fourier_mix(x, cfg.fnet_window)), ps.get(prefix + "ln1.g"), ps.get(prefix + "ln1.b"));
  return detail::ffn_residual(h, ps, prefix);
}

inline Tensor mlp_mixer_block(const Tensor& x, const ParamStore& ps, const std::string& prefix, const MixerConfig& cfg) {
  detail::check_width("mlp_mixer_block", x, cfg);
  const Tensor h = layer_norm(x, ps.get(prefix + "ln1.g"), ps.get(prefix + "ln1.b"));
  return detail::ffn_residual(h, ps, prefix);
}

/// Multi-head self-attention applied independently inside each window.
inline Tensor windowed_attention(const Tensor& x, const ParamStore& ps, const std::string& prefix, std::size_t window,
                                 std::size_t heads) {
  const std::size_t d = x.cols();
  const std::size_t dh = d / heads;
  const double scale_by = 1.0 / std::sqrt(static_cast<double>(dh));
  const Tensor q = linear(x, ps.get(prefix + "attn.wq"), ps.get(prefix + "attn.bq"));
  const Tensor k = linear(x, ps.get(prefix + "attn.wk"), ps.get(prefix + "attn.bk"));
  const Tensor v = linear(x, ps.get(prefix + "attn.wv"), ps.get(prefix + "attn.bv"));
  std::vector<Tensor> segs;
  for (auto [b, e] : window_segments(x.rows(), window)) {
    const bool whole = b == 0 && e == x.rows();
    const Tensor qs = whole ? q : row_slice(q, b, e);
    const Tensor ks = whole ? k : row_slice(k, b, e);
    const Tensor vs = whole ? v : row_slice(v, b, e);
    std::vector<Tensor> outs;
    for (std::size_t hd = 0; hd < heads; ++hd) {
      const std::size_t c0 = hd * dh, c1 = c0 + dh;
      const Tensor qh = heads == 1 ? qs : col_slice(qs, c0, c1);
      const Tensor kh = heads == 1 ? ks : col_slice(ks, c0, c1);
      const Tensor vh = heads == 1 ? vs : col_slice(vs, c0, c1);
      outs.push_back(matmul(attention_probs(qh, kh, scale_by), vh));
    }
    segs.push_back(heads == 1 ? outs[0] : concat_cols(outs));
  }
  const Tensor mixed = segs.size() == 1 ? segs[0] : concat_rows(segs);
  return linear(mixed, ps.get(prefix + "attn.wo"), ps.get(prefix + "attn.bo"));
}

inline Tensor windowed_attention_block(const Tensor& x, const ParamStore& ps, const std::string& prefix,
                                       const MixerConfig& cfg) {
  detail::check_width("windowed_attention_block", x, cfg);
  const Tensor a = windowed_attention(x, ps, prefix, cfg.window, cfg.n_attn_heads);
  const Tensor h = layer_norm(add(x, a), ps.get(prefix + "ln1.g"), ps.get(prefix + "ln1.b"));
  return detail::ffn_residual(h, ps, prefix);
}

inline std::string block_prefix(std::size_t i) { return "lm." + std::to_string(i) + "."; }

inline void register_shared_lm(ParamStore& ps, const MixerConfig& cfg, Rng& rng) {
  cfg.validate();
  for (std::size_t i = 0; i < cfg.n_blocks; ++i) register_block(ps, block_prefix(i), cfg, rng);
}

/// The single language model whose output feeds both the entity and the
/// relation heads.
inline Tensor shared_lm(const Tensor& x, const MixerConfig& cfg, const ParamStore& ps) {
  CountScope scope(OpCategory::kMixer);
  Tensor h = x;
  for (std::size_t i = 0; i < cfg.n_blocks; ++i) {
    const std::string p = block_prefix(i);
    switch (cfg.kind) {
      case MixerKind::kFnet: h = fnet_block(h, ps, p, cfg); break;
      case MixerKind::kMlp: h = mlp_mixer_block(h, ps, p, cfg); break;
      case MixerKind::kWindowedAttention: h = windowed_attention_block(h, ps, p, cfg); break;
    }
  }
  return h;
}

}  // namespace jnrf
