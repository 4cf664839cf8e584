#include "spantag/scorer.hpp"

#include <algorithm>
#include <stdexcept>

#include "spantag/errors.hpp"

namespace spantag {

double f1_score(double precision, double recall) {
  if (precision + recall == 0.0) return 0.0;
  if (precision == recall) return precision;  // harmonic mean of equals, kept exact
  return 2.0 * precision * recall / (precision + recall);
}

double overlap_fraction(CharSpan s, CharSpan t, std::size_t h) {
  if (h == 0) throw std::invalid_argument("overlap_fraction: normalizer must be positive");
  return static_cast<double>(overlap_length(s, t)) / static_cast<double>(h);
}

std::vector<CharSpan> merge_overlapping(std::vector<CharSpan> spans) {
  std::sort(spans.begin(), spans.end());
  std::vector<CharSpan> merged;
  for (const CharSpan& s : spans) {
    if (!merged.empty() && s.begin < merged.back().end)
      merged.back().end = std::max(merged.back().end, s.end);
    else
      merged.push_back(s);
  }
  return merged;
}

namespace {

std::map<std::string, std::vector<CharSpan>> group_and_merge(
    std::span<const SpanAnnotation> annotations) {
  std::map<std::string, std::vector<CharSpan>> by_article;
  for (const SpanAnnotation& ann : annotations) by_article[ann.article_id].push_back(ann.span);
  for (auto& [id, spans] : by_article) {
    spans = merge_overlapping(std::move(spans));
    for (std::size_t i = 1; i < spans.size(); ++i)
      if (spans[i].begin < spans[i - 1].end)
        throw std::logic_error("overlapping spans survived merging in article " + id);
  }
  return by_article;
}

struct PooledSums {
  double precision_sum = 0.0;
  double recall_sum = 0.0;
  std::size_t pred_count = 0;
  std::size_t gold_count = 0;

  PrfScore resolve() const {
    PrfScore score;
    if (pred_count == 0 && gold_count == 0) {
      score.precision = score.recall = score.f1 = 1.0;
      return score;
    }
    score.precision = pred_count == 0 ? 0.0 : precision_sum / static_cast<double>(pred_count);
    score.recall = gold_count == 0 ? 0.0 : recall_sum / static_cast<double>(gold_count);
    if (pred_count == 0 || gold_count == 0) score.precision = score.recall = 0.0;
    score.f1 = f1_score(score.precision, score.recall);
    return score;
  }
};

}  // namespace

SiScore score_si(std::span<const SpanAnnotation> pred, std::span<const SpanAnnotation> gold) {
  const auto pred_by_article = group_and_merge(pred);
  const auto gold_by_article = group_and_merge(gold);

  std::map<std::string, PooledSums> per_article;
  for (const auto& [id, spans] : pred_by_article) per_article[id].pred_count = spans.size();
  for (const auto& [id, spans] : gold_by_article) per_article[id].gold_count = spans.size();

  for (const auto& [id, pred_spans] : pred_by_article) {
    const auto git = gold_by_article.find(id);
    if (git == gold_by_article.end()) continue;
    PooledSums& sums = per_article[id];
    for (const CharSpan& s : pred_spans) {
      for (const CharSpan& t : git->second) {
        const std::size_t inter = overlap_length(s, t);
        if (inter == 0) continue;
        sums.precision_sum += static_cast<double>(inter) / static_cast<double>(s.length());
        sums.recall_sum += static_cast<double>(inter) / static_cast<double>(t.length());
      }
    }
  }

  PooledSums total;
  SiScore score;
  for (const auto& [id, sums] : per_article) {
    total.precision_sum += sums.precision_sum;
    total.recall_sum += sums.recall_sum;
    total.pred_count += sums.pred_count;
    total.gold_count += sums.gold_count;
    score.per_article[id] = sums.resolve();
  }
  const PrfScore pooled = total.resolve();
  score.precision = pooled.precision;
  score.recall = pooled.recall;
  score.f1 = pooled.f1;
  return score;
}

TcScore score_tc(std::span<const SpanAnnotation> pred, std::span<const SpanAnnotation> gold) {
  if (pred.size() != gold.size())
    throw DataError("prediction count " + std::to_string(pred.size()) +
                    " does not match gold count " + std::to_string(gold.size()));
  struct Counts {
    std::size_t tp = 0, fp = 0, fn = 0, support = 0;
  };
  std::map<std::string, Counts> counts;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i].article_id != gold[i].article_id || pred[i].span != gold[i].span)
      throw DataError("instance " + std::to_string(i + 1) +
                      " is misaligned between predictions and gold");
    if (!pred[i].technique || !gold[i].technique)
      throw DataError("instance " + std::to_string(i + 1) + " lacks a technique label");
    const std::string& p = *pred[i].technique;
    const std::string& g = *gold[i].technique;
    counts[g].support += 1;
    if (p == g) {
      counts[g].tp += 1;
      ++correct;
    } else {
      counts[p].fp += 1;
      counts[g].fn += 1;
    }
  }

  TcScore score;
  // Single pred and single gold label per instance make micro precision and
  // recall both equal accuracy.
  const double accuracy =
      pred.empty() ? 1.0 : static_cast<double>(correct) / static_cast<double>(pred.size());
  score.micro_f1 = f1_score(accuracy, accuracy);
  for (const auto& [name, c] : counts) {
    ClassScore cs;
    cs.support = c.support;
    cs.precision = (c.tp + c.fp) == 0 ? 0.0
                                      : static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
    cs.recall =
        (c.tp + c.fn) == 0 ? 0.0 : static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
    cs.f1 = f1_score(cs.precision, cs.recall);
    score.per_class[name] = cs;
  }
  return score;
}

}  // namespace spantag
