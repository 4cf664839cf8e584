#include "spantag/analytics.hpp"

#include <algorithm>

#include "spantag/errors.hpp"
#include "spantag/tokenizer.hpp"

namespace spantag {

std::vector<std::pair<std::string, std::size_t>> class_histogram(
    std::span<const SpanAnnotation> annotations) {
  std::map<std::string, std::size_t> counts;
  for (const SpanAnnotation& ann : annotations) {
    if (!ann.technique)
      throw DataError("annotation for article " + ann.article_id + " has no technique");
    counts[*ann.technique] += 1;
  }
  std::vector<std::pair<std::string, std::size_t>> out(counts.begin(), counts.end());
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  return out;
}

const std::vector<std::string>& category1_techniques() {
  static const std::vector<std::string> names = {
      "Exaggeration,Minimisation",
      "Flag-Waving",
      "Loaded_Language",
      "Name_Calling,Labeling",
      "Repetition",
      "Slogans",
      "Thought-terminating_Cliches",
  };
  return names;
}

int technique_category(const std::string& technique) {
  const auto& cat1 = category1_techniques();
  return std::binary_search(cat1.begin(), cat1.end(), technique) ? 1 : 2;
}

namespace {

double median_of(std::vector<std::size_t> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return static_cast<double>(values[n / 2]);
  return (static_cast<double>(values[n / 2 - 1]) + static_cast<double>(values[n / 2])) / 2.0;
}

}  // namespace

std::vector<LengthHistogram> span_length_distribution(std::span<const SpanAnnotation> annotations,
                                                      std::span<const Article> articles,
                                                      LengthUnit unit, LengthGrouping grouping,
                                                      std::size_t bin_width) {
  if (bin_width == 0) bin_width = unit == LengthUnit::Chars ? 10 : 2;
  const auto index = index_articles(articles);

  std::map<std::string, std::vector<std::size_t>> lengths_by_group;
  for (const SpanAnnotation& ann : annotations) {
    std::size_t length = 0;
    if (unit == LengthUnit::Chars) {
      length = ann.span.length();
    } else {
      const auto it = index.find(ann.article_id);
      if (it == index.end())
        throw DataError("annotation references missing article " + ann.article_id);
      length = tokenize(slice(*it->second, ann.span), 0).size();
    }
    std::string key;
    switch (grouping) {
      case LengthGrouping::Technique:
        if (!ann.technique)
          throw DataError("annotation for article " + ann.article_id + " has no technique");
        key = *ann.technique;
        break;
      case LengthGrouping::Category:
        if (!ann.technique)
          throw DataError("annotation for article " + ann.article_id + " has no technique");
        key = technique_category(*ann.technique) == 1 ? "category1" : "category2";
        break;
      case LengthGrouping::All:
        key = "all";
        break;
    }
    lengths_by_group[key].push_back(length);
  }

  std::vector<LengthHistogram> out;
  for (const auto& [key, lengths] : lengths_by_group) {
    LengthHistogram hist;
    hist.key = key;
    hist.bin_width = bin_width;
    hist.total = lengths.size();
    double sum = 0.0;
    for (std::size_t len : lengths) {
      hist.bins[(len / bin_width) * bin_width] += 1;
      sum += static_cast<double>(len);
    }
    hist.mean = sum / static_cast<double>(lengths.size());
    hist.median = median_of(lengths);
    out.push_back(std::move(hist));
  }
  return out;
}

double average_span_length(std::span<const CharSpan> spans) {
  if (spans.empty()) throw DataError("average span length of no spans");
  double sum = 0.0;
  for (const CharSpan& span : spans) sum += static_cast<double>(span.length());
  return sum / static_cast<double>(spans.size());
}

namespace {

std::string csv_field(const std::string& value) {
  if (value.find(',') == std::string::npos && value.find('"') == std::string::npos) return value;
  std::string quoted = "\"";
  for (char c : value) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  quoted += '"';
  return quoted;
}

}  // namespace

std::string histogram_csv(std::span<const LengthHistogram> histograms) {
  std::string out = "group,bin_low,bin_high,count\n";
  for (const LengthHistogram& hist : histograms) {
    for (const auto& [low, count] : hist.bins) {
      out += csv_field(hist.key);
      out += ',';
      out += std::to_string(low);
      out += ',';
      out += std::to_string(low + hist.bin_width - 1);
      out += ',';
      out += std::to_string(count);
      out += '\n';
    }
  }
  return out;
}

}  // namespace spantag
