#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "mabt/linalg.hpp"

namespace mabt {

// Response vector plus full regressor pool. Column 0 is the intercept when
// the dataset came through the CSV loader; nothing below assumes it.
struct Dataset {
  Vector y;
  Matrix x;  // n x p
  std::vector<std::string> column_names;  // empty or size p

  std::size_t n() const { return y.size(); }
  std::size_t p() const { return x.cols(); }

  // n >= 1, p >= 1, everything finite.
  void validate() const;
};

// Ordered list of column-index subsets, one per candidate model. Indices are
// 0-based internally; the CLI surface speaks 1-based.
struct CandidateModelSet {
  std::vector<std::vector<std::size_t>> models;
  bool nested = false;

  std::size_t count() const { return models.size(); }
  std::vector<std::size_t> dims() const;
  std::size_t largest_index() const;

  // Checks subset bounds, k_q <= min(n-1, p), and for nested sets the strict
  // subset chain; nested subsets are reordered in place so that every model
  // is a prefix of the largest one (the order used by all fast paths and by
  // the inference selection matrices).
  void validate(const Dataset& data);

  // Prefix chain over columns `order[0..size-1]` for each size in `sizes`.
  static CandidateModelSet nested_prefixes(const std::vector<std::size_t>& order,
                                           const std::vector<std::size_t>& sizes);
  // Prefix chain over columns 0..size-1 for sizes 1..m_count.
  static CandidateModelSet nested_first_columns(std::size_t m_count);
};

}  // namespace mabt
