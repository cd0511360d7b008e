#include "hevdp/grid.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>

#include <fmt/core.h>

#include "text_util.hpp"

namespace hevdp {

Axis::Axis(std::vector<double> points) : points_(std::move(points)) {
  if (points_.size() < 2) throw std::invalid_argument("axis needs at least 2 breakpoints");
  for (std::size_t i = 1; i < points_.size(); ++i) {
    if (!(points_[i] > points_[i - 1])) {
      throw std::invalid_argument(fmt::format("axis breakpoints not strictly ascending at index {}", i));
    }
  }
  const double span = back() - front();
  const double step = span / static_cast<double>(size() - 1);
  bool even = true;
  for (std::size_t i = 1; i < points_.size() && even; ++i) {
    even = std::abs((points_[i] - points_[i - 1]) - step) <= 1e-9 * step;
  }
  if (even) inv_step_ = 1.0 / step;
}

Axis Axis::uniform(double lo, double hi, std::size_t n) {
  if (n < 2) throw std::invalid_argument("axis resolution must be at least 2");
  if (!(hi > lo)) throw std::invalid_argument(fmt::format("inverted axis bounds [{}, {}]", lo, hi));
  std::vector<double> p(n);
  const double last = static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    const double fi = static_cast<double>(i);
    p[i] = ((last - fi) * lo + fi * hi) / last;
  }
  p.front() = lo;
  p.back() = hi;
  return Axis(std::move(p));
}

Axis::Bracket Axis::bracket(double x) const {
  const std::size_t last_cell = size() - 2;
  if (!(x > front())) return {0, 0.0};
  if (!(x < back())) return {last_cell, 1.0};

  std::size_t i = 0;
  if (inv_step_ > 0.0) {
    const double guess = std::floor((x - front()) * inv_step_);
    i = guess <= 0.0 ? 0 : std::min(static_cast<std::size_t>(guess), last_cell);
    while (i > 0 && x < points_[i]) --i;
    while (i < last_cell && x >= points_[i + 1]) ++i;
  } else {
    // upper_bound over interior breakpoints
    std::size_t lo = 0, hi = last_cell;
    while (lo < hi) {
      const std::size_t mid = (lo + hi + 1) / 2;
      if (points_[mid] <= x) lo = mid; else hi = mid - 1;
    }
    i = lo;
  }
  return {i, (x - points_[i]) / (points_[i + 1] - points_[i])};
}

std::size_t Axis::nearest(double x) const {
  const auto b = bracket(x);
  if (b.weight > 0.5) return b.index + 1;
  return b.index;
}

Table1D::Table1D(Axis x, std::vector<double> values) : x_(std::move(x)), values_(std::move(values)) {
  if (values_.size() != x_.size()) throw std::invalid_argument("curve value count does not match breakpoints");
}

double Table1D::operator()(double x) const {
  const auto [i, w] = x_.bracket(x);
  return (1.0 - w) * values_[i] + w * values_[i + 1];
}

Table2D::Table2D(Axis rows, Axis cols, std::vector<double> values)
    : rows_(std::move(rows)), cols_(std::move(cols)), values_(std::move(values)) {
  if (values_.size() != rows_.size() * cols_.size()) {
    throw std::invalid_argument("map body size does not match its breakpoints");
  }
}

double Table2D::operator()(double row, double col) const {
  if (!rows_.contains(row) || !cols_.contains(col)) {
    throw std::domain_error(fmt::format("map query ({}, {}) outside [{}, {}] x [{}, {}]", row, col, rows_.front(),
                                        rows_.back(), cols_.front(), cols_.back()));
  }
  const auto [r, wr] = rows_.bracket(row);
  const auto [c, wc] = cols_.bracket(col);
  const double lo = (1.0 - wc) * at(r, c) + wc * at(r, c + 1);
  const double hi = (1.0 - wc) * at(r + 1, c) + wc * at(r + 1, c + 1);
  return (1.0 - wr) * lo + wr * hi;
}

namespace {

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(fmt::format("cannot open {}", path.string()));
  return in;
}

double field_or_throw(std::string_view field, const std::filesystem::path& path, std::size_t line) {
  if (auto v = detail::parse_double(field)) return *v;
  throw std::runtime_error(fmt::format("{}:{}: cannot parse '{}' as a number", path.string(), line, field));
}

}  // namespace

Table1D load_curve_csv(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  std::vector<double> xs, ys;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = detail::trim(line);
    if (text.empty()) continue;
    const auto fields = detail::split(text, ',');
    if (fields.size() != 2) {
      throw std::runtime_error(fmt::format("{}:{}: expected 2 columns, got {}", path.string(), line_no, fields.size()));
    }
    if (line_no == 1 && !detail::parse_double(fields[0])) continue;  // header
    xs.push_back(field_or_throw(fields[0], path, line_no));
    ys.push_back(field_or_throw(fields[1], path, line_no));
  }
  try {
    return Table1D(Axis(std::move(xs)), std::move(ys));
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(fmt::format("{}: {}", path.string(), e.what()));
  }
}

Table2D load_map_csv(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  std::vector<double> cols, rows, body;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = detail::trim(line);
    if (text.empty()) continue;
    const auto fields = detail::split(text, ',');
    if (cols.empty()) {
      for (std::size_t i = 1; i < fields.size(); ++i) cols.push_back(field_or_throw(fields[i], path, line_no));
      if (cols.empty()) throw std::runtime_error(fmt::format("{}:{}: empty breakpoint row", path.string(), line_no));
      continue;
    }
    if (fields.size() != cols.size() + 1) {
      throw std::runtime_error(fmt::format("{}:{}: expected {} columns, got {}", path.string(), line_no,
                                           cols.size() + 1, fields.size()));
    }
    rows.push_back(field_or_throw(fields[0], path, line_no));
    for (std::size_t i = 1; i < fields.size(); ++i) body.push_back(field_or_throw(fields[i], path, line_no));
  }
  try {
    return Table2D(Axis(std::move(rows)), Axis(std::move(cols)), std::move(body));
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(fmt::format("{}: {}", path.string(), e.what()));
  }
}

}  // namespace hevdp
