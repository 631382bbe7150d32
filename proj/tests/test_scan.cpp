#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "gscan/error.hpp"
#include "gscan/scan.hpp"

using namespace gscan;

namespace {

void check_same(const ScanResult& fast, const ScanResult& naive) {
  CHECK(std::abs(fast.max_value - naive.max_value) <= 1e-9);
  CHECK(fast.argmax == naive.argmax);
  CHECK(fast.windows_scanned == naive.windows_scanned);
}

GaussianLatticeField negate(const GaussianLatticeField& f) {
  std::vector<double> v(f.values().begin(), f.values().end());
  for (double& x : v) x = -x;
  return GaussianLatticeField::from_values(f.dims(), v);
}

}  // namespace

TEST_CASE("zero field scans to zero") {
  auto f = GaussianLatticeField::from_values({4, 4}, std::vector<double>(16, 0.0));
  auto t = build_prefix_table(f);
  CHECK(scan_cubes(t, 1, 4).max_value == 0.0);
  CHECK(scan_rects(t, {1, 1}, {4, 4}).max_value == 0.0);
  CHECK(scan_grid(t, WindowFamily::grid_cubes(2, 0.25, 0.25, 1.0)).max_value == 0.0);
  CHECK(scan_naive(f, WindowFamily::cubes(2, 1, 4)).max_value == 0.0);
}

TEST_CASE("one-dimensional brute force example") {
  auto f = GaussianLatticeField::from_values({3}, {3, -1, 2});
  auto r = scan_cubes(build_prefix_table(f), 1, 3);
  CHECK(r.max_value == 3.0);
  CHECK(r.argmax == Window{{0}, {1}});
  CHECK(r.windows_scanned == 6);
}

TEST_CASE("rectangle example picks the full window") {
  auto f = GaussianLatticeField::from_values({2, 2}, {1, 2, 3, 4});
  auto r = scan_rects(build_prefix_table(f), {1, 1}, {2, 2});
  CHECK(r.max_value == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(r.argmax == Window{{0, 0}, {2, 2}});
  CHECK(r.windows_scanned == 9);
}

TEST_CASE("single cell lattice") {
  auto f = GaussianLatticeField::from_values({1}, {-0.75});
  CHECK(scan_naive(f, WindowFamily::cubes(1, 1, 1)).max_value == -0.75);
  CHECK(scan_cubes(build_prefix_table(f), 1, 1).max_value == -0.75);
}

TEST_CASE("ties go to the smallest sides then origin") {
  auto f = GaussianLatticeField::from_values({4}, {1, -5, 1, -5});
  auto r = scan_cubes(build_prefix_table(f), 1, 4);
  CHECK(r.argmax == Window{{0}, {1}});
  auto n = scan_naive(f, WindowFamily::cubes(1, 1, 4));
  CHECK(n.argmax == r.argmax);
}

TEST_CASE("fast cube scan matches naive on 10x10") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto f = generate_lattice({10, 10}, seed, 0);
    check_same(scan_cubes(build_prefix_table(f), 1, 10),
               scan_naive(f, WindowFamily::cubes(2, 1, 10)));
  }
}

TEST_CASE("fast rect scan matches naive on 8x8x4") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto f = generate_lattice({8, 8, 4}, seed, 1);
    check_same(scan_rects(build_prefix_table(f), {1, 1, 1}, {8, 8, 4}),
               scan_naive(f, WindowFamily::rects({1, 1, 1}, {8, 8, 4})));
  }
}

TEST_CASE("oracle equivalence across ranks and side bounds") {
  std::uint64_t seed = 0;
  for (const Extents& dims : {Extents{10}, Extents{7, 9}, Extents{5, 6, 4}, Extents{3, 4, 3, 2}}) {
    const std::size_t d = dims.size();
    const Index m = *std::min_element(dims.begin(), dims.end());
    for (Index lo = 1; lo <= m; ++lo) {
      for (Index hi = lo; hi <= m; ++hi) {
        auto f = generate_lattice(dims, 5, seed++);
        auto t = build_prefix_table(f);
        check_same(scan_family(t, WindowFamily::cubes(d, lo, hi)),
                   scan_naive(f, WindowFamily::cubes(d, lo, hi)));
        Extents rlo(d, lo), rhi = dims;
        rhi[0] = hi;
        check_same(scan_family(t, WindowFamily::rects(rlo, rhi)),
                   scan_naive(f, WindowFamily::rects(rlo, rhi)));
      }
    }
  }
}

TEST_CASE("100 random 6x6 cases agree") {
  for (std::uint64_t s = 0; s < 100; ++s) {
    auto f = generate_lattice({6, 6}, 77, s);
    check_same(scan_cubes(build_prefix_table(f), 1, 6),
               scan_naive(f, WindowFamily::cubes(2, 1, 6)));
  }
}

TEST_CASE("origin boxes restrict the scan") {
  auto f = generate_lattice({9, 9}, 4, 0);
  auto t = build_prefix_table(f);
  const OriginBox box{{2, 3}, {5, 8}};
  const auto fam = WindowFamily::rects({1, 2}, {4, 5});
  check_same(scan_family(t, fam, box), scan_naive(f, fam, box));
  CHECK(scan_family(t, fam, box).windows_scanned == count_windows(f.dims(), fam, box));
}

TEST_CASE("grid scan bookkeeping") {
  auto f = generate_lattice({64}, 12, 0);
  auto t = build_prefix_table(f);
  auto fam = WindowFamily::grid_cubes(1, 0.1, 0.5, std::numeric_limits<double>::infinity());
  CHECK(fam.side_min[0] == 5);
  check_same(scan_grid(t, fam), scan_naive(f, fam));

  auto unit = WindowFamily::grid_cubes(2, 1.0, 2.0, 5.0);
  auto g = generate_lattice({8, 8}, 3, 0);
  auto tg = build_prefix_table(g);
  check_same(scan_grid(tg, unit), scan_cubes(tg, 2, 5));
  auto unit_r = WindowFamily::grid_rects(2, 1.0, 1.0, 8.0);
  check_same(scan_grid(tg, unit_r), scan_rects(tg, {1, 1}, {8, 8}));

  CHECK_THROWS_AS(WindowFamily::grid_cubes(1, 0.0, 1.0, 2.0), InvalidFamily);
  CHECK_THROWS_AS(WindowFamily::grid_cubes(1, -1.0, 1.0, 2.0), InvalidFamily);
  CHECK_THROWS_AS(scan_grid(t, WindowFamily::cubes(1, 1, 2)), InvalidFamily);
}

TEST_CASE("side bounds are validated") {
  auto t = build_prefix_table(generate_lattice({5, 5}, 1, 0));
  CHECK_THROWS_AS(scan_cubes(t, 0, 3), InvalidFamily);
  CHECK_THROWS_AS(scan_cubes(t, 4, 3), InvalidFamily);
  CHECK_THROWS_AS(scan_cubes(t, 1, 6), InvalidFamily);
  CHECK_THROWS_AS(scan_rects(t, {1, 1}, {5, 6}), InvalidFamily);
  CHECK_THROWS_AS(scan_rects(t, {1}, {5}), InvalidFamily);
}

TEST_CASE("naive scan guards lattice size") {
  auto f = generate_lattice({101, 100}, 1, 0);
  CHECK_THROWS_AS(scan_naive(f, WindowFamily::cubes(2, 1, 2)), OversizeError);
}

TEST_CASE("enlarging the side range never lowers the maximum") {
  for (std::uint64_t s = 0; s < 20; ++s) {
    auto t = build_prefix_table(generate_lattice({12, 12}, 8, s));
    double prev = -std::numeric_limits<double>::infinity();
    for (Index hi = 3; hi <= 12; ++hi) {
      const double v = scan_cubes(t, 3, hi).max_value;
      CHECK(v >= prev);
      prev = v;
    }
    CHECK(scan_rects(t, {1, 1}, {12, 12}).max_value >= scan_cubes(t, 1, 12).max_value);
  }
}

TEST_CASE("negated field gives the minimum standardized sum") {
  for (std::uint64_t s = 0; s < 10; ++s) {
    auto f = generate_lattice({5, 4}, 21, s);
    auto t = build_prefix_table(f);
    double lowest = std::numeric_limits<double>::infinity();
    for (Index sx = 1; sx <= 5; ++sx)
      for (Index sy = 1; sy <= 4; ++sy)
        for (Index x = 0; x + sx <= 5; ++x)
          for (Index y = 0; y + sy <= 4; ++y)
            lowest = std::min(lowest, standardized_sum(t, {{x, y}, {sx, sy}}));
    auto neg = scan_rects(build_prefix_table(negate(f)), {1, 1}, {5, 4});
    CHECK(std::abs(neg.max_value + lowest) <= 1e-12);
  }
}

TEST_CASE("argmax reproduces max_value and counts are closed form") {
  auto f = generate_lattice({9, 7, 5}, 2, 0);
  auto t = build_prefix_table(f);
  auto r = scan_cubes(t, 2, 5);
  CHECK(std::abs(standardized_sum(t, r.argmax) - r.max_value) <= 1e-9);
  std::uint64_t expected = 0;
  for (Index s = 2; s <= 5; ++s) expected += (9 - s + 1) * (7 - s + 1) * (5 - s + 1);
  CHECK(r.windows_scanned == expected);
  auto rr = scan_rects(t, {1, 2, 3}, {9, 7, 5});
  std::uint64_t er = 0;
  for (Index a = 1; a <= 9; ++a)
    for (Index b = 2; b <= 7; ++b)
      for (Index c = 3; c <= 5; ++c) er += (9 - a + 1) * (7 - b + 1) * (5 - c + 1);
  CHECK(rr.windows_scanned == er);
}

TEST_CASE("merging partial scans is partition independent") {
  auto f = generate_lattice({10, 10}, 6, 0);
  auto t = build_prefix_table(f);
  auto whole = scan_cubes(t, 1, 10);
  for (Index cut = 1; cut < 10; ++cut) {
    auto m = merge_results(scan_cubes(t, 1, cut), scan_cubes(t, cut + 1, 10));
    CHECK(m.max_value == whole.max_value);
    CHECK(m.argmax == whole.argmax);
    CHECK(m.windows_scanned == whole.windows_scanned);
    auto m2 = merge_results(scan_cubes(t, cut + 1, 10), scan_cubes(t, 1, cut));
    CHECK(m2.argmax == whole.argmax);
  }
}

TEST_CASE("block maxima cover the global maximum") {
  auto f = generate_lattice({13, 11}, 9, 0);
  auto t = build_prefix_table(f);
  auto fam = WindowFamily::cubes(2, 2, 4);
  Extents grid;
  auto blocks = block_maxima(t, fam, 4, &grid);
  CHECK(grid == Extents{4, 3});
  REQUIRE(blocks.size() == 12);
  CHECK(*std::max_element(blocks.begin(), blocks.end()) == scan_family(t, fam).max_value);
  // Each block equals a scan restricted to its origins.
  for (Index bx = 0; bx < 4; ++bx)
    for (Index by = 0; by < 3; ++by) {
      OriginBox box{{bx * 4, by * 4}, {bx * 4 + 3, by * 4 + 3}};
      if (count_windows(f.dims(), fam, box) == 0) {
        CHECK(std::isinf(blocks[bx * 3 + by]));
        continue;
      }
      CHECK(blocks[bx * 3 + by] == scan_family(t, fam, box).max_value);
    }
}
