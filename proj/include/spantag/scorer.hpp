#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "spantag/corpus.hpp"

namespace spantag {

struct PrfScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;

  bool operator==(const PrfScore&) const = default;
};

// Overlap-based SI score, pooled over all articles, plus a per-article
// breakdown computed with the same formula.
struct SiScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::map<std::string, PrfScore> per_article;
};

struct ClassScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

struct TcScore {
  double micro_f1 = 0.0;
  std::map<std::string, ClassScore> per_class;
};

/// 2PR/(P+R); 0 when P+R is 0 (exactly P when P == R).
double f1_score(double precision, double recall);

/// Overlap credit |s∩t|/h; h must be positive.
double overlap_fraction(CharSpan s, CharSpan t, std::size_t h);

/// Unions intervals that share at least one character; adjacent but disjoint
/// spans stay separate. Output is sorted and pairwise disjoint.
std::vector<CharSpan> merge_overlapping(std::vector<CharSpan> spans);

// Span-overlap precision/recall/F1:
//   P = (1/|S|) sum over predicted s of sum over same-article gold t of |s∩t|/|s|
//   R = (1/|T|) sum over the same pairs of |s∩t|/|t|
// Overlapping spans within one side of one article are merged first.
// Both sides empty scores 1; one side empty scores 0.
SiScore score_si(std::span<const SpanAnnotation> pred, std::span<const SpanAnnotation> gold);

// Micro-averaged F1 plus per-class precision/recall/F1/support for aligned
// single-label instances. pred and gold must match pairwise on article and
// span, in the same order.
TcScore score_tc(std::span<const SpanAnnotation> pred, std::span<const SpanAnnotation> gold);

}  // namespace spantag
