#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "spantag/corpus.hpp"

namespace spantag {

/// Technique -> instance count, descending (ties by name).
std::vector<std::pair<std::string, std::size_t>> class_histogram(
    std::span<const SpanAnnotation> annotations);

enum class LengthUnit { Chars, Words };
enum class LengthGrouping { Technique, Category, All };

// Span-length histogram for one group. Bins are [k*w, (k+1)*w) keyed by
// their low edge; counts sum to the instance count.
struct LengthHistogram {
  std::string key;
  std::size_t bin_width = 10;
  std::map<std::size_t, std::size_t> bins;  // bin low edge -> count
  double mean = 0.0;
  double median = 0.0;
  std::size_t total = 0;
};

// Per-group length distribution over end-begin (Chars) or tokenized word
// count (Words; requires the articles). bin_width 0 picks the default:
// 10 chars / 2 words. Groups are ordered by key.
std::vector<LengthHistogram> span_length_distribution(std::span<const SpanAnnotation> annotations,
                                                      std::span<const Article> articles,
                                                      LengthUnit unit, LengthGrouping grouping,
                                                      std::size_t bin_width = 0);

/// Arithmetic mean of end-begin; throws DataError on empty input.
double average_span_length(std::span<const CharSpan> spans);

// The two span-length categories: category 1 holds the seven techniques
// with peaky length distributions, every other technique is category 2.
const std::vector<std::string>& category1_techniques();
int technique_category(const std::string& technique);

/// CSV rows (group, bin_low, bin_high, count) with a header; fields
/// containing commas are quoted.
std::string histogram_csv(std::span<const LengthHistogram> histograms);

}  // namespace spantag
