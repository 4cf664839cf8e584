#pragma once

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "spantag/corpus.hpp"
#include "spantag/random.hpp"

namespace testsupport {

// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<unsigned> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("spantag-" + tag + "-" + std::to_string(::getpid()) + "-" +
             std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path file(const std::string& name) const { return path_ / name; }

  std::filesystem::path write(const std::string& name, const std::string& content) const {
    const std::filesystem::path p = path_ / name;
    std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    return p;
  }

 private:
  std::filesystem::path path_;
};

inline std::string read_all(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return content;
}

// Random lowercase word of length 1..8.
inline std::string random_word(spantag::SeededRng& rng) {
  const std::size_t len = 1 + rng.below(8);
  std::string word;
  for (std::size_t i = 0; i < len; ++i)
    word += static_cast<char>('a' + static_cast<char>(rng.below(26)));
  return word;
}

// Random multi-line article text made of word sentences.
inline std::string random_article_text(spantag::SeededRng& rng, std::size_t max_lines = 6,
                                       std::size_t max_words = 12) {
  const std::size_t lines = 1 + rng.below(max_lines);
  std::string text;
  for (std::size_t l = 0; l < lines; ++l) {
    const std::size_t words = 1 + rng.below(max_words);
    for (std::size_t w = 0; w < words; ++w) {
      if (w > 0) text += ' ';
      text += random_word(rng);
    }
    text += '\n';
  }
  return text;
}

// Up to max_spans random non-degenerate spans within [0, length).
inline std::vector<spantag::CharSpan> random_spans(spantag::SeededRng& rng, std::size_t length,
                                                   std::size_t max_spans) {
  std::vector<spantag::CharSpan> spans;
  if (length < 2) return spans;
  const std::size_t n = rng.below(max_spans + 1);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t begin = rng.below(length - 1);
    const std::size_t end = begin + 1 + rng.below(length - begin - 1 ? length - begin - 1 : 1);
    spans.push_back({begin, std::min(end, length)});
  }
  return spans;
}

}  // namespace testsupport
