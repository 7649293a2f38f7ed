#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace qsx {

using Point = std::vector<double>;
using ConstPointView = std::span<const double>;

/// Row-major set of points sharing one ambient dimension.
class PointSet {
 public:
  PointSet() = default;
  explicit PointSet(std::size_t dim) : dim_(dim) {}
  PointSet(std::size_t dim, std::vector<double> coords);

  static PointSet from_rows(const std::vector<Point>& rows);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return dim_ == 0 ? 0 : coords_.size() / dim_; }
  bool empty() const noexcept { return size() == 0; }

  ConstPointView operator[](std::size_t i) const {
    return {coords_.data() + i * dim_, dim_};
  }
  std::span<double> mutable_row(std::size_t i) { return {coords_.data() + i * dim_, dim_}; }

  void push_back(ConstPointView p);
  Point row(std::size_t i) const;
  const std::vector<double>& coords() const noexcept { return coords_; }

  /// Copy with every point zero-padded to `new_dim` coordinates.
  PointSet padded(std::size_t new_dim) const;

 private:
  std::size_t dim_ = 0;
  std::vector<double> coords_;
};

double distance(ConstPointView a, ConstPointView b);
double norm(ConstPointView a);
double dot(ConstPointView a, ConstPointView b);

Point padded(ConstPointView p, std::size_t dim);

/// Exact Euclidean distance between segments [p0,p1] and [q0,q1].
double segment_distance(ConstPointView p0, ConstPointView p1, ConstPointView q0,
                        ConstPointView q1);

/// Distance from `x` to the segment [a,b].
double point_segment_distance(ConstPointView x, ConstPointView a, ConstPointView b);

/// Largest pairwise distance (brute force).
double diameter(const PointSet& pts);

}  // namespace qsx
