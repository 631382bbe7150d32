#include "gscan/scan.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "gscan/error.hpp"

namespace gscan {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

Index resolve_max(Index requested, Index extent) {
  return requested == kLatticeExtent ? extent : requested;
}

// Calls fn(sides) for every side vector of the family, lexicographically
// (axis 0 most significant). fn returns false to stop.
template <class Fn>
void for_each_side(const ResolvedSides& r, Fn&& fn) {
  const std::size_t d = r.side_min.size();
  if (r.cube) {
    Extents sides(d);
    for (Index s = r.side_min[0]; s <= r.side_max[0]; ++s) {
      std::fill(sides.begin(), sides.end(), s);
      if (!fn(sides)) return;
    }
    return;
  }
  Extents cur = r.side_min;
  while (true) {
    if (!fn(cur)) return;
    std::size_t axis = d;
    while (axis-- > 0) {
      if (cur[axis] < r.side_max[axis]) {
        ++cur[axis];
        break;
      }
      cur[axis] = r.side_min[axis];
      if (axis == 0) return;
    }
  }
}

// Admissible origins for a side vector; false if there are none.
bool origin_ranges(const Extents& dims, const Extents& sides,
                   const OriginBox& box, Extents& lo, Extents& hi) {
  const std::size_t d = dims.size();
  lo.resize(d);
  hi.resize(d);
  for (std::size_t i = 0; i < d; ++i) {
    lo[i] = std::max<Index>(box.lo[i], 0);
    hi[i] = std::min<Index>(box.hi[i], dims[i] - sides[i]);
    if (lo[i] > hi[i]) return false;
  }
  return true;
}

// Calls fn(outer_origin, base_offset) for each row of origins: every
// combination of axes 0..d-2 in lexicographic order, with the last axis at
// lo[d-1]. fn returns false to stop.
template <class Fn>
void for_each_row(const Extents& lo, const Extents& hi, const Extents& strides,
                  Fn&& fn) {
  const std::size_t d = lo.size();
  Extents origin = lo;
  while (true) {
    Index base = 0;
    for (std::size_t i = 0; i < d; ++i) base += origin[i] * strides[i];
    if (!fn(static_cast<const Extents&>(origin), base)) return;
    if (d == 1) return;
    std::size_t axis = d - 1;
    while (axis-- > 0) {
      if (origin[axis] < hi[axis]) {
        ++origin[axis];
        break;
      }
      origin[axis] = lo[axis];
      if (axis == 0) return;
    }
  }
}

struct CornerPlan {
  std::vector<Index> offset;
  std::vector<double> sign;
};

// Corner c has axis i at its upper face iff bit i of c is set; the sign is
// + when the number of lower faces is even. Same order as window_sum().
CornerPlan corner_plan(const Extents& sides, const Extents& strides) {
  const std::size_t d = sides.size();
  CornerPlan p;
  p.offset.resize(std::size_t{1} << d);
  p.sign.resize(std::size_t{1} << d);
  for (unsigned c = 0; c < (1u << d); ++c) {
    Index off = 0;
    int upper = 0;
    for (std::size_t i = 0; i < d; ++i) {
      if (c & (1u << i)) {
        off += sides[i] * strides[i];
        ++upper;
      }
    }
    p.offset[c] = off;
    p.sign[c] = ((static_cast<int>(d) - upper) % 2 == 0) ? 1.0 : -1.0;
  }
  return p;
}

// Corner sums with the accumulation order of window_sum(), so fast and
// single-window evaluations agree bit for bit.
template <int D>
inline double corner_sum(const double* const* p, const double* sign,
                         std::size_t corners, Index x) {
  if constexpr (D == 1) {
    return -p[0][x] + p[1][x];
  } else if constexpr (D == 2) {
    return ((p[0][x] - p[1][x]) - p[2][x]) + p[3][x];
  } else if constexpr (D == 3) {
    return ((((((-p[0][x] + p[1][x]) + p[2][x]) - p[3][x]) + p[4][x]) -
             p[5][x]) -
            p[6][x]) +
           p[7][x];
  } else {
    double s = 0.0;
    for (std::size_t c = 0; c < corners; ++c) s += sign[c] * p[c][x];
    return s;
  }
}

template <int D>
double row_max(const double* const* p, const double* sign, std::size_t corners,
               Index count, double inv) {
  double m = kNegInf;
  for (Index x = 0; x < count; ++x) {
    const double v = corner_sum<D>(p, sign, corners, x) * inv;
    m = v > m ? v : m;
  }
  return m;
}

template <int D>
Index row_find(const double* const* p, const double* sign, std::size_t corners,
               Index count, double inv, double target) {
  for (Index x = 0; x < count; ++x)
    if (corner_sum<D>(p, sign, corners, x) * inv == target) return x;
  return -1;
}

struct RowPointers {
  std::vector<const double*> ptr;
  void set(const double* data, Index base, const CornerPlan& plan) {
    ptr.resize(plan.offset.size());
    for (std::size_t c = 0; c < ptr.size(); ++c) ptr[c] = data + base + plan.offset[c];
  }
};

OriginBox full_box(const Extents& dims) {
  OriginBox b;
  b.lo.assign(dims.size(), 0);
  b.hi = dims;
  return b;
}

void check_box(const Extents& dims, const OriginBox& box) {
  if (box.lo.size() != dims.size() || box.hi.size() != dims.size())
    throw InvalidFamily("origin box rank does not match lattice rank");
}

template <int D>
ScanResult scan_impl(const PrefixSumTable& t, const ResolvedSides& r,
                     const OriginBox& box) {
  ScanResult res;
  const auto data = t.table().data();
  const auto& strides = t.table_strides();
  Extents lo, hi;
  RowPointers rp;
  for_each_side(r, [&](const Extents& sides) {
    if (!origin_ranges(t.dims(), sides, box, lo, hi)) return true;
    const CornerPlan plan = corner_plan(sides, strides);
    const double inv = 1.0 / std::sqrt(static_cast<double>(
                                 Window{Extents{}, sides}.cardinality()));
    const Index count = hi.back() - lo.back() + 1;
    double side_best = kNegInf;
    for_each_row(lo, hi, strides, [&](const Extents&, Index base) {
      rp.set(data, base, plan);
      side_best = std::max(side_best, row_max<D>(rp.ptr.data(), plan.sign.data(),
                                                 plan.sign.size(), count, inv));
      res.windows_scanned += static_cast<std::uint64_t>(count);
      return true;
    });
    if (side_best > res.max_value) {
      res.max_value = side_best;
      for_each_row(lo, hi, strides, [&](const Extents& origin, Index base) {
        rp.set(data, base, plan);
        const Index x = row_find<D>(rp.ptr.data(), plan.sign.data(),
                                    plan.sign.size(), count, inv, side_best);
        if (x < 0) return true;
        res.argmax.origin = origin;
        res.argmax.origin.back() += x;
        res.argmax.sides = sides;
        return false;
      });
    }
    return true;
  });
  return res;
}

ScanResult dispatch_scan(const PrefixSumTable& t, const ResolvedSides& r,
                         const OriginBox& box) {
  switch (t.rank()) {
    case 1:
      return scan_impl<1>(t, r, box);
    case 2:
      return scan_impl<2>(t, r, box);
    case 3:
      return scan_impl<3>(t, r, box);
    default:
      return scan_impl<0>(t, r, box);
  }
}

}  // namespace

WindowFamily WindowFamily::cubes(std::size_t d, Index side_min, Index side_max) {
  return {FamilyKind::DiscreteCube, Extents(d, side_min), Extents(d, side_max),
          1.0};
}

WindowFamily WindowFamily::rects(Extents side_min, Extents side_max) {
  return {FamilyKind::DiscreteRect, std::move(side_min), std::move(side_max),
          1.0};
}

namespace {

WindowFamily grid_family(FamilyKind kind, std::size_t d, double q, double a,
                         double b) {
  if (!(q > 0.0) || !std::isfinite(q))
    throw InvalidFamily("grid step must be positive");
  if (!(a > 0.0) || !(b >= a)) throw InvalidFamily("need 0 < a <= b");
  constexpr double kSlack = 1e-9;
  const Index smin = static_cast<Index>(std::ceil(a / q - kSlack));
  const Index smax = std::isinf(b)
                         ? kLatticeExtent
                         : static_cast<Index>(std::floor(b / q + kSlack));
  return {kind, Extents(d, std::max<Index>(smin, 1)), Extents(d, smax), q};
}

}  // namespace

WindowFamily WindowFamily::grid_cubes(std::size_t d, double q, double a,
                                      double b) {
  return grid_family(FamilyKind::GridCube, d, q, a, b);
}

WindowFamily WindowFamily::grid_rects(std::size_t d, double q, double a,
                                      double b) {
  return grid_family(FamilyKind::GridRect, d, q, a, b);
}

ResolvedSides resolve_sides(const Extents& dims, const WindowFamily& family) {
  const std::size_t d = dims.size();
  if (family.side_min.size() != d || family.side_max.size() != d)
    throw InvalidFamily("family rank does not match lattice rank");
  if (family.is_grid() && !(family.grid_step > 0.0))
    throw InvalidFamily("grid step must be positive");
  ResolvedSides r;
  r.cube = family.is_cube();
  r.side_min = family.side_min;
  r.side_max.resize(d);
  const Index min_extent = *std::min_element(dims.begin(), dims.end());
  for (std::size_t i = 0; i < d; ++i) {
    const Index extent = r.cube ? min_extent : dims[i];
    r.side_max[i] = resolve_max(family.side_max[i], extent);
    if (r.side_min[i] < 1)
      throw InvalidFamily("side_min must be at least 1");
    if (r.side_min[i] > r.side_max[i])
      throw InvalidFamily("side_min exceeds side_max on axis " +
                          std::to_string(i));
    if (r.side_max[i] > extent)
      throw InvalidFamily("side_max exceeds the lattice extent on axis " +
                          std::to_string(i));
  }
  if (r.cube) {
    for (std::size_t i = 1; i < d; ++i)
      if (r.side_min[i] != r.side_min[0] || r.side_max[i] != r.side_max[0])
        throw InvalidFamily("cube families need equal bounds on every axis");
  }
  return r;
}

ScanResult scan_family(const PrefixSumTable& table, const WindowFamily& family,
                       const std::optional<OriginBox>& box) {
  const ResolvedSides r = resolve_sides(table.dims(), family);
  const OriginBox b = box ? *box : full_box(table.dims());
  check_box(table.dims(), b);
  return dispatch_scan(table, r, b);
}

ScanResult scan_cubes(const PrefixSumTable& table, Index side_min,
                      Index side_max) {
  return scan_family(table, WindowFamily::cubes(table.rank(), side_min, side_max));
}

ScanResult scan_rects(const PrefixSumTable& table, const Extents& side_min,
                      const Extents& side_max) {
  return scan_family(table, WindowFamily::rects(side_min, side_max));
}

ScanResult scan_grid(const PrefixSumTable& table, const WindowFamily& family) {
  if (!family.is_grid()) throw InvalidFamily("scan_grid needs a grid family");
  if (!(family.grid_step > 0.0)) throw InvalidFamily("grid step must be positive");
  return scan_family(table, family);
}

std::uint64_t count_windows(const Extents& dims, const WindowFamily& family,
                            const std::optional<OriginBox>& box) {
  const ResolvedSides r = resolve_sides(dims, family);
  const OriginBox b = box ? *box : full_box(dims);
  check_box(dims, b);
  std::uint64_t total = 0;
  Extents lo, hi;
  for_each_side(r, [&](const Extents& sides) {
    if (!origin_ranges(dims, sides, b, lo, hi)) return true;
    std::uint64_t n = 1;
    for (std::size_t i = 0; i < dims.size(); ++i)
      n *= static_cast<std::uint64_t>(hi[i] - lo[i] + 1);
    total += n;
    return true;
  });
  return total;
}

ScanResult scan_naive(const GaussianLatticeField& field,
                      const WindowFamily& family,
                      const std::optional<OriginBox>& box) {
  const Extents& dims = field.dims();
  if (cell_count(dims) > 10000)
    throw OversizeError("naive scan is limited to 10^4 lattice cells");
  const ResolvedSides r = resolve_sides(dims, family);
  const OriginBox b = box ? *box : full_box(dims);
  check_box(dims, b);
  const std::size_t d = dims.size();
  const Extents strides = row_major_strides(dims);
  const auto values = field.values();

  ScanResult res;
  Extents lo, hi;
  for_each_side(r, [&](const Extents& sides) {
    if (!origin_ranges(dims, sides, b, lo, hi)) return true;
    const Window shape{Extents{}, sides};
    const double inv = 1.0 / std::sqrt(static_cast<double>(shape.cardinality()));
    Extents origin = lo;
    while (true) {
      double sum = 0.0;
      Extents z = origin;
      while (true) {
        Index off = 0;
        for (std::size_t i = 0; i < d; ++i) off += z[i] * strides[i];
        sum += values[static_cast<std::size_t>(off)];
        std::size_t axis = d;
        bool done = true;
        while (axis-- > 0) {
          if (z[axis] + 1 < origin[axis] + sides[axis]) {
            ++z[axis];
            done = false;
            break;
          }
          z[axis] = origin[axis];
        }
        if (done) break;
      }
      const double v = sum * inv;
      ++res.windows_scanned;
      if (v > res.max_value) {
        res.max_value = v;
        res.argmax = Window{origin, sides};
      }
      std::size_t axis = d;
      bool done = true;
      while (axis-- > 0) {
        if (origin[axis] < hi[axis]) {
          ++origin[axis];
          done = false;
          break;
        }
        origin[axis] = lo[axis];
      }
      if (done) break;
    }
    return true;
  });
  return res;
}

bool precedes(const Window& a, const Window& b) {
  if (a.sides != b.sides)
    return std::lexicographical_compare(a.sides.begin(), a.sides.end(),
                                        b.sides.begin(), b.sides.end());
  return std::lexicographical_compare(a.origin.begin(), a.origin.end(),
                                      b.origin.begin(), b.origin.end());
}

ScanResult merge_results(const ScanResult& a, const ScanResult& b) {
  ScanResult out;
  out.windows_scanned = a.windows_scanned + b.windows_scanned;
  bool take_a;
  if (a.argmax.sides.empty() || b.argmax.sides.empty())
    take_a = b.argmax.sides.empty();
  else if (a.max_value != b.max_value)
    take_a = a.max_value > b.max_value;
  else
    take_a = precedes(a.argmax, b.argmax);
  const ScanResult& w = take_a ? a : b;
  out.max_value = w.max_value;
  out.argmax = w.argmax;
  return out;
}

std::vector<double> block_maxima(const PrefixSumTable& table,
                                 const WindowFamily& family, Index block_side,
                                 Extents* block_grid) {
  if (block_side < 1) throw InvalidFamily("block side must be positive");
  const ResolvedSides r = resolve_sides(table.dims(), family);
  const Extents& dims = table.dims();
  const std::size_t d = dims.size();
  Extents grid(d);
  for (std::size_t i = 0; i < d; ++i) grid[i] = (dims[i] + block_side - 1) / block_side;
  const Extents bstrides = row_major_strides(grid);
  std::vector<double> best(static_cast<std::size_t>(cell_count(grid)), kNegInf);

  const OriginBox box = full_box(dims);
  const auto data = table.table().data();
  const auto& strides = table.table_strides();
  Extents lo, hi;
  RowPointers rp;
  for_each_side(r, [&](const Extents& sides) {
    if (!origin_ranges(dims, sides, box, lo, hi)) return true;
    const CornerPlan plan = corner_plan(sides, strides);
    const double inv = 1.0 / std::sqrt(static_cast<double>(
                                 Window{Extents{}, sides}.cardinality()));
    const Index count = hi.back() - lo.back() + 1;
    for_each_row(lo, hi, strides, [&](const Extents& origin, Index base) {
      rp.set(data, base, plan);
      Index row_block = 0;
      for (std::size_t i = 0; i + 1 < d; ++i)
        row_block += (origin[i] / block_side) * bstrides[i];
      // Walk the row one block segment at a time.
      Index x = 0;
      while (x < count) {
        const Index abs = lo.back() + x;
        const Index blk = abs / block_side;
        const Index seg_end = std::min(count, (blk + 1) * block_side - lo.back());
        double m = kNegInf;
        for (Index k = x; k < seg_end; ++k) {
          double v;
          switch (d) {
            case 1:
              v = corner_sum<1>(rp.ptr.data(), nullptr, 2, k) * inv;
              break;
            case 2:
              v = corner_sum<2>(rp.ptr.data(), nullptr, 4, k) * inv;
              break;
            case 3:
              v = corner_sum<3>(rp.ptr.data(), nullptr, 8, k) * inv;
              break;
            default:
              v = corner_sum<0>(rp.ptr.data(), plan.sign.data(), plan.sign.size(), k) *
                  inv;
          }
          m = v > m ? v : m;
        }
        double& slot = best[static_cast<std::size_t>(row_block + blk * bstrides.back())];
        slot = std::max(slot, m);
        x = seg_end;
      }
      return true;
    });
    return true;
  });
  if (block_grid != nullptr) *block_grid = grid;
  return best;
}

}  // namespace gscan
