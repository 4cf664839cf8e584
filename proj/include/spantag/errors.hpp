#pragma once

#include <stdexcept>
#include <string>

namespace spantag {

// Malformed or inconsistent input data: unreadable files, bad TSV rows,
// offsets outside an article, misaligned instance sets. The CLI maps this
// to exit code 2. Programmer errors (contract violations) use
// std::invalid_argument instead.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& message) : std::runtime_error(message) {}
};

}  // namespace spantag
