#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spantag/context.hpp"
#include "spantag/corpus.hpp"

namespace spantag {

enum class PositionBucket { Begin, Middle, End };

PositionBucket position_bucket(std::size_t index, std::size_t token_count);

// Deterministic sparse features for one token: lowercased text, character
// 3-grams of the padded token, prefixes/suffixes up to length 3, a shape
// class and the position bucket. Empty text yields no features.
std::vector<std::string> featurize_token(std::string_view token_text, PositionBucket bucket);

/// 64-bit FNV-1a over the UTF-8 bytes (offset basis 0xcbf29ce484222325).
std::uint64_t fnv1a64(std::string_view bytes);

/// Feature index in [0, dim): fnv1a64 reduced modulo dim.
std::size_t hash_feature(std::string_view feature, std::size_t dim);

/// Sorted, de-duplicated hashed feature indices of one token.
std::vector<std::size_t> token_feature_indices(std::string_view token_text, PositionBucket bucket,
                                               std::size_t dim);

/// Dense 0/1 indicator over the hashed features.
std::vector<double> token_feature_vector(std::string_view token_text, PositionBucket bucket,
                                         std::size_t dim);

// CLS analogue: mean of the tokens' hashed-feature indicator vectors,
// L2-normalized. Empty text gives the zero vector. Order-invariant by
// construction.
std::vector<double> encode_sequence(std::string_view text, std::size_t dim);

// How the sequence vector S and context vector C form the combined V:
//   NONE                V = S
//   CONCAT_TEXT         V = encode(context text + fragment text), no explicit S/C
//   CONCAT_EMBED        V = [S; C]
//   CONCAT_EMBED_HIDDEN V = [S; tanh(W*C + b)]
//   ADD                 V = S + C
//   WEIGHTED_AVG        V = alpha*S + (1 - alpha)*C
enum class CombineKind { NONE, CONCAT_TEXT, CONCAT_EMBED, CONCAT_EMBED_HIDDEN, ADD, WEIGHTED_AVG };

std::string_view combine_kind_name(CombineKind kind);
CombineKind combine_kind_from_name(std::string_view name);  // throws DataError

struct CombinationStrategy {
  CombineKind kind = CombineKind::NONE;
  double alpha = 0.5;            // WEIGHTED_AVG only
  std::size_t hidden_dim = 64;   // CONCAT_EMBED_HIDDEN only
};

// Dimension-reducing layer on the context vector; owned by the classifier
// model and read-only at inference.
struct HiddenLayer {
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;
  std::vector<double> weights;  // out_dim x in_dim, row-major
  std::vector<double> bias;     // out_dim
};

std::vector<double> hidden_forward(const HiddenLayer& layer, std::span<const double> input);

/// Output dimension of a strategy for d-dimensional S and C.
std::size_t combined_dim(const CombinationStrategy& strategy, std::size_t dim);

// Combines S and C per the strategy. Throws std::invalid_argument on
// dimension mismatch, alpha outside [0, 1], or a missing/ill-sized hidden
// layer. CONCAT_TEXT is rejected here: it bypasses combination.
std::vector<double> combine(std::span<const double> s, std::span<const double> c,
                            const CombinationStrategy& strategy,
                            const HiddenLayer* hidden = nullptr);

/// Override key for a fragment or sentence-context character range.
std::string span_key(const std::string& article_id, CharSpan span);
/// Override key for an article's title context.
std::string title_key(const std::string& article_id);

// Escape hatch for an external encoder: a TSV of precomputed vectors
// (key, then dim floats per row). When a key is present it overrides the
// hashed baseline.
class VectorStore {
 public:
  VectorStore() = default;
  static VectorStore parse_tsv(std::string_view tsv_text, std::string_view source = {});

  bool empty() const { return vectors_.empty(); }
  std::size_t size() const { return vectors_.size(); }
  std::size_t dim() const { return dim_; }
  const std::vector<double>* lookup(const std::string& key) const;

 private:
  std::map<std::string, std::vector<double>> vectors_;
  std::size_t dim_ = 0;
};

// Text-to-vector interface: the hashed baseline plus optional precomputed
// overrides looked up by key.
class SequenceEncoder {
 public:
  explicit SequenceEncoder(std::size_t dim, VectorStore overrides = {});

  std::size_t dim() const { return dim_; }
  std::vector<double> encode_text(std::string_view text) const;
  /// Returns the override for `key` when present, else the baseline encoding.
  std::vector<double> encode_keyed(const std::string& key, std::string_view text) const;

 private:
  std::size_t dim_;
  VectorStore overrides_;
};

}  // namespace spantag
