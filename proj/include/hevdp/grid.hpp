#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace hevdp {

/// Strictly ascending breakpoints with exact-at-node bracketing.
///
/// `bracket(x)` returns the cell index `i` and weight `w` such that
/// x = (1 - w) * p[i] + w * p[i + 1]. Queries that land on a breakpoint get
/// w == 0 (or w == 1 at the last breakpoint), so blending with `(1 - w) * a +
/// w * b` reproduces node values bit-for-bit. Queries outside the axis are
/// clamped to the end cells.
class Axis {
 public:
  struct Bracket {
    std::size_t index;
    double weight;
  };

  explicit Axis(std::vector<double> points);

  /// n points from lo to hi with both endpoints stored exactly.
  static Axis uniform(double lo, double hi, std::size_t n);

  std::size_t size() const { return points_.size(); }
  double front() const { return points_.front(); }
  double back() const { return points_.back(); }
  double operator[](std::size_t i) const { return points_[i]; }
  std::span<const double> points() const { return points_; }

  bool contains(double x) const { return x >= front() && x <= back(); }
  Bracket bracket(double x) const;
  /// Index of the breakpoint closest to x (ties go to the lower index).
  std::size_t nearest(double x) const;

 private:
  std::vector<double> points_;
  double inv_step_ = 0.0;  // nonzero only for evenly spaced axes
};

/// Piecewise-linear y(x); clamps outside the breakpoint range.
class Table1D {
 public:
  Table1D(Axis x, std::vector<double> values);

  double operator()(double x) const;
  const Axis& axis() const { return x_; }
  std::span<const double> values() const { return values_; }

 private:
  Axis x_;
  std::vector<double> values_;
};

/// Bilinear z(row, col) on a rectangular grid. Queries outside the grid are
/// rejected with std::domain_error.
class Table2D {
 public:
  /// values are row-major: values[r * cols.size() + c].
  Table2D(Axis rows, Axis cols, std::vector<double> values);

  double operator()(double row, double col) const;
  const Axis& rows() const { return rows_; }
  const Axis& cols() const { return cols_; }
  std::span<const double> values() const { return values_; }
  double at(std::size_t r, std::size_t c) const { return values_[r * cols_.size() + c]; }

 private:
  Axis rows_;
  Axis cols_;
  std::vector<double> values_;
};

/// Two-column CSV `x,value` (optional header) with x strictly ascending.
Table1D load_curve_csv(const std::filesystem::path& path);

/// Map CSV: first row holds column breakpoints (its first cell is ignored),
/// the first column holds row breakpoints, the body holds values.
Table2D load_map_csv(const std::filesystem::path& path);

}  // namespace hevdp
