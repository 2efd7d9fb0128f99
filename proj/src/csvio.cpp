#include "mabt/csvio.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace mabt {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t')) --e;
  return s.substr(b, e - b);
}

double parse_number(const std::string& token, std::size_t row, std::size_t col) {
  const std::string t = trim(token);
  if (t.empty())
    fail(errc::parse_error,
         "csv: empty cell at row " + std::to_string(row) + ", column " + std::to_string(col));
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size() || !std::isfinite(v))
    fail(errc::non_numeric, "csv: non-numeric value '" + t + "' at row " + std::to_string(row) +
                                ", column " + std::to_string(col));
  return v;
}

}  // namespace

Dataset load_csv_text(const std::string& text, const std::string& response_column,
                      const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) fail(errc::parse_error, "csv: " + origin + " is empty");

  const std::vector<std::string> raw_header = split_line(line);
  std::vector<std::string> header;
  header.reserve(raw_header.size());
  for (const auto& h : raw_header) header.push_back(trim(h));

  std::size_t response_idx = header.size();
  for (std::size_t c = 0; c < header.size(); ++c)
    if (header[c] == response_column) response_idx = c;
  if (response_idx == header.size())
    fail(errc::missing_column, "csv: response column '" + response_column + "' not found");

  std::vector<std::vector<double>> rows;
  std::size_t row_no = 1;
  while (std::getline(in, line)) {
    ++row_no;
    if (trim(line).empty()) continue;
    const std::vector<std::string> cells = split_line(line);
    if (cells.size() != header.size())
      fail(errc::parse_error, "csv: row " + std::to_string(row_no) + " has " +
                                  std::to_string(cells.size()) + " cells, expected " +
                                  std::to_string(header.size()));
    std::vector<double> row(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) row[c] = parse_number(cells[c], row_no, c + 1);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) fail(errc::parse_error, "csv: " + origin + " has a header but no data rows");

  Dataset data;
  const std::size_t n = rows.size();
  const std::size_t p = header.size();  // intercept replaces the response slot
  data.y.resize(n);
  data.x = Matrix(n, p);
  data.column_names.resize(p);
  data.column_names[0] = "(intercept)";
  for (std::size_t i = 0; i < n; ++i) {
    data.x(i, 0) = 1.0;
    data.y[i] = rows[i][response_idx];
  }
  std::size_t out_col = 1;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c == response_idx) continue;
    data.column_names[out_col] = header[c];
    for (std::size_t i = 0; i < n; ++i) data.x(i, out_col) = rows[i][c];
    ++out_col;
  }
  data.validate();
  return data;
}

Dataset load_csv(const std::string& path, const std::string& response_column) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(errc::parse_error, "csv: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_csv_text(buf.str(), response_column, path);
}

namespace {

bool column_is_intercept(const Matrix& x, std::size_t j) {
  for (std::size_t i = 0; i < x.rows(); ++i)
    if (x(i, j) != 1.0) return false;
  return true;
}

void moments(std::span<const double> v, double& mean, double& sd) {
  double s = 0.0;
  for (double x : v) s += x;
  mean = s / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
}

}  // namespace

Dataset StandardizeTransform::apply(const Dataset& data) const {
  if (data.p() != is_intercept.size())
    fail(errc::dimension_mismatch, "standardize: transform built for a different width");
  Dataset out = data;
  for (std::size_t j = 0; j < data.p(); ++j) {
    if (is_intercept[j]) continue;
    auto col = out.x.col(j);
    for (double& v : col) v = (v - col_mean[j]) / col_sd[j];
  }
  for (double& v : out.y) v = (v - y_mean) / y_sd;
  return out;
}

Standardized standardize(const Dataset& data) {
  data.validate();
  StandardizeTransform t;
  t.is_intercept.resize(data.p());
  t.col_mean.assign(data.p(), 0.0);
  t.col_sd.assign(data.p(), 1.0);
  for (std::size_t j = 0; j < data.p(); ++j) {
    t.is_intercept[j] = column_is_intercept(data.x, j);
    if (t.is_intercept[j]) continue;
    double mean, sd;
    moments(data.x.col(j), mean, sd);
    if (!(sd > 0.0))
      fail(errc::zero_variance, "standardize: column " + std::to_string(j + 1) +
                                    (data.column_names.empty()
                                         ? std::string()
                                         : " (" + data.column_names[j] + ")") +
                                    " has zero variance");
    t.col_mean[j] = mean;
    t.col_sd[j] = sd;
  }
  moments(data.y, t.y_mean, t.y_sd);
  if (!(t.y_sd > 0.0)) fail(errc::zero_variance, "standardize: response has zero variance");

  return {t.apply(data), std::move(t)};
}

}  // namespace mabt
