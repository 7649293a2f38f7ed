#include "qsx/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace qsx::kernels {

namespace {

inline bool lex_less(const std::array<std::size_t, 3>& a, const std::array<std::size_t, 3>& b) {
  return a < b;
}

struct RowEntry {
  double dom;
  double img;
  std::size_t idx;
};

// Sorted view of the other sites as seen from site i, with suffix minima of the
// image distance (two smallest, so that y itself can be excluded).
struct Row {
  std::vector<RowEntry> entries;
  std::vector<std::size_t> group_start;  // first position with the same dom distance
  std::vector<std::size_t> min1, min2;   // positions of the two smallest img in suffix
};

void build_row(std::span<const double> sites, const PointSet& images, std::size_t i, Row& row) {
  const std::size_t m = sites.size();
  row.entries.clear();
  for (std::size_t j = 0; j < m; ++j) {
    if (j == i) continue;
    row.entries.push_back({std::abs(sites[i] - sites[j]), distance(images[i], images[j]), j});
  }
  std::sort(row.entries.begin(), row.entries.end(), [](const RowEntry& a, const RowEntry& b) {
    return a.dom < b.dom || (a.dom == b.dom && a.idx < b.idx);
  });
  const std::size_t k = row.entries.size();
  row.group_start.assign(k, 0);
  for (std::size_t p = 1; p < k; ++p) {
    row.group_start[p] = row.entries[p].dom == row.entries[p - 1].dom ? row.group_start[p - 1] : p;
  }
  constexpr std::size_t none = static_cast<std::size_t>(-1);
  row.min1.assign(k + 1, none);
  row.min2.assign(k + 1, none);
  auto better = [&](std::size_t a, std::size_t b) {
    if (b == none) return true;
    const auto& ea = row.entries[a];
    const auto& eb = row.entries[b];
    return ea.img < eb.img || (ea.img == eb.img && ea.idx < eb.idx);
  };
  for (std::size_t p = k; p-- > 0;) {
    std::size_t m1 = row.min1[p + 1], m2 = row.min2[p + 1];
    if (better(p, m1)) {
      m2 = m1;
      m1 = p;
    } else if (better(p, m2)) {
      m2 = p;
    }
    row.min1[p] = m1;
    row.min2[p] = m2;
  }
}

// Best ratio for x = i with y at sorted position p; negative when no z exists.
inline double row_ratio(const Row& row, std::size_t p) {
  constexpr std::size_t none = static_cast<std::size_t>(-1);
  const std::size_t g = row.group_start[p];
  std::size_t z = row.min1[g];
  if (z == p) z = row.min2[g];
  if (z == none) return -1.0;
  return row.entries[p].img / row.entries[z].img;
}

}  // namespace

TripleArgmax weak_qs_scan_reference(std::span<const double> sites, const PointSet& images) {
  TripleArgmax best;
  const std::size_t m = sites.size();
  for (std::size_t x = 0; x < m; ++x) {
    for (std::size_t y = 0; y < m; ++y) {
      if (y == x) continue;
      const double dxy = std::abs(sites[x] - sites[y]);
      const double gxy = distance(images[x], images[y]);
      for (std::size_t z = 0; z < m; ++z) {
        if (z == x || z == y) continue;
        if (!(dxy <= std::abs(sites[x] - sites[z]))) continue;
        const double r = gxy / distance(images[x], images[z]);
        if (!best.found || r > best.value) {
          best.value = r;
          best.indices = {x, y, z};
          best.found = true;
        }
      }
    }
  }
  return best;
}

TripleArgmax weak_qs_scan(std::span<const double> sites, const PointSet& images) {
  const std::size_t m = sites.size();
  TripleArgmax best;
  if (m < 3) return best;

  std::vector<double> row_best(m, -1.0);
  const auto count = static_cast<std::ptrdiff_t>(m);
#pragma omp parallel
  {
    Row row;
#pragma omp for schedule(dynamic, 4)
    for (std::ptrdiff_t ii = 0; ii < count; ++ii) {
      const auto i = static_cast<std::size_t>(ii);
      build_row(sites, images, i, row);
      double b = -1.0;
      for (std::size_t p = 0; p < row.entries.size(); ++p) b = std::max(b, row_ratio(row, p));
      row_best[i] = b;
    }
  }
  const double top = *std::max_element(row_best.begin(), row_best.end());
  if (top < 0.0) return best;

  // Tie-break pass: first x, then first y, then first z attaining the maximum.
  Row row;
  for (std::size_t i = 0; i < m; ++i) {
    if (row_best[i] != top) continue;
    build_row(sites, images, i, row);
    std::array<std::size_t, 3> chosen{};
    bool have = false;
    for (std::size_t p = 0; p < row.entries.size(); ++p) {
      if (row_ratio(row, p) != top) continue;
      const std::size_t y = row.entries[p].idx;
      const double dxy = row.entries[p].dom;
      const double gxy = row.entries[p].img;
      for (std::size_t z = 0; z < m; ++z) {
        if (z == i || z == y) continue;
        if (!(dxy <= std::abs(sites[i] - sites[z]))) continue;
        if (gxy / distance(images[i], images[z]) == top) {
          const std::array<std::size_t, 3> cand{i, y, z};
          if (!have || lex_less(cand, chosen)) {
            chosen = cand;
            have = true;
          }
          break;
        }
      }
    }
    if (have) {
      best.value = top;
      best.indices = chosen;
      best.found = true;
      return best;
    }
  }
  return best;
}

void set_thread_cap(int threads) {
  if (threads > 0) omp_set_num_threads(threads);
}

}  // namespace qsx::kernels
