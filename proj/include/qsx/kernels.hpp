#pragma once

// Hot loops of the toolkit. Every kernel has a serial reference version kept
// for testing and an OpenMP version; both return bit-identical results
// (max-reductions with a lexicographic tie-break on the arg-max).

#include <array>
#include <cstddef>
#include <limits>
#include <span>

#include <omp.h>

#include "qsx/geometry.hpp"

namespace qsx::kernels {

struct TripleArgmax {
  double value = -std::numeric_limits<double>::infinity();
  std::array<std::size_t, 3> indices{};
  bool found = false;
};

/// max over ordered triples (x, y, z) of distinct sites with |x-y| <= |x-z|
/// of |f(x)-f(y)| / |f(x)-f(z)|. Exhaustive O(m^3) triple loop.
TripleArgmax weak_qs_scan_reference(std::span<const double> sites, const PointSet& images);

/// Same result via per-x sorting and suffix minima, O(m^2 log m), parallel over x.
TripleArgmax weak_qs_scan(std::span<const double> sites, const PointSet& images);

/// max of f(i, j) over 0 <= i < j < n; -inf when n < 2.
template <class F>
double pair_max_reference(std::size_t n, F&& f) {
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = f(i, j);
      if (v > best) best = v;
    }
  }
  return best;
}

template <class F>
double pair_max(std::size_t n, F&& f) {
  double best = -std::numeric_limits<double>::infinity();
  const auto rows = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic, 16) reduction(max : best)
  for (std::ptrdiff_t ii = 0; ii < rows; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = f(i, j);
      if (v > best) best = v;
    }
  }
  return best;
}

/// max of f(i) over 0 <= i < n; -inf when n == 0.
template <class F>
double index_max(std::size_t n, F&& f) {
  double best = -std::numeric_limits<double>::infinity();
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic, 8) reduction(max : best)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    const double v = f(static_cast<std::size_t>(i));
    if (v > best) best = v;
  }
  return best;
}

template <class F>
double index_min(std::size_t n, F&& f) {
  double best = std::numeric_limits<double>::infinity();
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic, 8) reduction(min : best)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    const double v = f(static_cast<std::size_t>(i));
    if (v < best) best = v;
  }
  return best;
}

/// Caps the OpenMP team size; 0 leaves the runtime default.
void set_thread_cap(int threads);

}  // namespace qsx::kernels
