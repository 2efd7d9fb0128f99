#pragma once

#include <string>

#include "mabt/dataset.hpp"

namespace mabt {

// Reads a UTF-8, comma-separated, header-first file. The named response
// column becomes y; the remaining columns become regressors in file order,
// behind a prepended intercept column named "(intercept)".
Dataset load_csv(const std::string& path, const std::string& response_column);

// Same parse from an in-memory string (test seam).
Dataset load_csv_text(const std::string& text, const std::string& response_column,
                      const std::string& origin = "<memory>");

// Column/response centering and scaling recorded for later application to
// held-out data. The intercept column (all ones) is left untouched.
struct StandardizeTransform {
  std::vector<bool> is_intercept;  // per column
  Vector col_mean, col_sd;
  double y_mean = 0.0, y_sd = 1.0;

  Dataset apply(const Dataset& data) const;
};

struct Standardized {
  Dataset data;
  StandardizeTransform transform;
};

// Centers non-intercept columns and the response to mean 0, sd 1
// (denominator n-1). Throws ZeroVariance for a constant non-intercept column.
Standardized standardize(const Dataset& data);

}  // namespace mabt
