#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "spantag/context.hpp"
#include "spantag/encoder.hpp"
#include "spantag/models.hpp"
#include "spantag/tagcodec.hpp"

namespace spantag::cli {

// Everything one pipeline run needs to know; populated from flags with a
// flat key=value config file underneath (flags win).
struct PipelineConfig {
  Scheme scheme = Scheme::BIOE;
  CombinationStrategy strategy;
  ContextKind context_kind = ContextKind::NONE;
  std::size_t context_cap = 130;
  bool cap_includes_fragment = true;
  bool length_feature = false;
  TrainConfig train;
  double split_fraction = 0.9;
};

// Deterministic article-granularity train/dev split: shuffle by seed, take
// round(fraction*N) ids for training. Throws DataError on empty input and
// std::invalid_argument for a fraction outside (0, 1].
std::pair<std::vector<std::string>, std::vector<std::string>> split_train_dev(
    std::vector<std::string> article_ids, double fraction, std::uint64_t seed);

// Entry point behind the spantag binary. Exit codes: 0 success, 1 usage
// error, 2 data error.
int run(int argc, const char* const* argv);

/// Test-friendly overload; `args` excludes the program name.
int run(const std::vector<std::string>& args);

}  // namespace spantag::cli
