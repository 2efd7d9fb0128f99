#include "mabt/dataset.hpp"

#include <algorithm>
#include <set>

namespace mabt {

void Dataset::validate() const {
  if (y.empty() || x.cols() == 0) fail(errc::invalid_size, "dataset: n >= 1 and p >= 1 required");
  if (x.rows() != y.size()) fail(errc::dimension_mismatch, "dataset: y length != design rows");
  if (!column_names.empty() && column_names.size() != x.cols())
    fail(errc::dimension_mismatch, "dataset: column_names size != p");
  if (!all_finite(y) || !x.all_finite()) fail(errc::non_finite, "dataset: non-finite entries");
}

std::vector<std::size_t> CandidateModelSet::dims() const {
  std::vector<std::size_t> k(models.size());
  for (std::size_t q = 0; q < models.size(); ++q) k[q] = models[q].size();
  return k;
}

std::size_t CandidateModelSet::largest_index() const {
  std::size_t best = 0;
  for (std::size_t q = 1; q < models.size(); ++q)
    if (models[q].size() > models[best].size()) best = q;
  return best;
}

void CandidateModelSet::validate(const Dataset& data) {
  if (models.empty()) fail(errc::invalid_size, "candidate set: no models");
  const std::size_t cap = std::min(data.n() - 1, data.p());
  for (std::size_t q = 0; q < models.size(); ++q) {
    const auto& sub = models[q];
    if (sub.empty()) fail(errc::invalid_size, "candidate set: model " + std::to_string(q + 1) + " empty");
    if (sub.size() > cap)
      fail(errc::invalid_size, "candidate set: model " + std::to_string(q + 1) +
                                   " has k > min(n-1, p)");
    std::set<std::size_t> seen;
    for (std::size_t c : sub) {
      if (c >= data.p())
        fail(errc::dimension_mismatch,
             "candidate set: model " + std::to_string(q + 1) + " indexes column out of range");
      if (!seen.insert(c).second)
        fail(errc::invalid_size, "candidate set: model " + std::to_string(q + 1) + " repeats a column");
    }
  }
  if (!nested) return;

  // Strict subset chain, then canonicalize every model to a prefix of the
  // order induced by first appearance.
  std::vector<std::size_t> order;
  std::set<std::size_t> in_order;
  for (std::size_t q = 0; q < models.size(); ++q) {
    const std::set<std::size_t> cur(models[q].begin(), models[q].end());
    if (q > 0) {
      const std::set<std::size_t> prev(models[q - 1].begin(), models[q - 1].end());
      if (prev.size() >= cur.size() ||
          !std::includes(cur.begin(), cur.end(), prev.begin(), prev.end()))
        fail(errc::invalid_size, "candidate set: nested flag requires a strict subset chain");
    }
    for (std::size_t c : models[q])
      if (in_order.insert(c).second) order.push_back(c);
  }
  for (std::size_t q = 0; q < models.size(); ++q)
    models[q].assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(models[q].size()));
}

CandidateModelSet CandidateModelSet::nested_prefixes(const std::vector<std::size_t>& order,
                                                     const std::vector<std::size_t>& sizes) {
  CandidateModelSet set;
  set.nested = true;
  for (std::size_t k : sizes) {
    if (k == 0 || k > order.size()) fail(errc::invalid_size, "nested_prefixes: bad size");
    set.models.emplace_back(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
  }
  return set;
}

CandidateModelSet CandidateModelSet::nested_first_columns(std::size_t m_count) {
  std::vector<std::size_t> order(m_count);
  std::vector<std::size_t> sizes(m_count);
  for (std::size_t i = 0; i < m_count; ++i) {
    order[i] = i;
    sizes[i] = i + 1;
  }
  return nested_prefixes(order, sizes);
}

}  // namespace mabt
