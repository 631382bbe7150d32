#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "gscan/field.hpp"

namespace gscan {

enum class FamilyKind { DiscreteCube, DiscreteRect, GridCube, GridRect };

// Stands for "as large as the lattice allows" in WindowFamily::side_max.
inline constexpr Index kLatticeExtent = std::numeric_limits<Index>::max();

// A family of axis-aligned windows described by side-count bounds.
//
// Grid kinds read the lattice as a q-spaced discretization of a continuous
// box: a window with s_i cells has continuous side length s_i * q. Scores are
// unchanged by the rescaling since q^{d/2} S(A) / sqrt(q^d |A|) = S(A) /
// sqrt(|A|).
struct WindowFamily {
  FamilyKind kind = FamilyKind::DiscreteCube;
  Extents side_min;  // per axis; all equal for cube kinds
  Extents side_max;  // per axis; kLatticeExtent resolves against the lattice
  double grid_step = 1.0;

  bool is_cube() const noexcept {
    return kind == FamilyKind::DiscreteCube || kind == FamilyKind::GridCube;
  }
  bool is_grid() const noexcept {
    return kind == FamilyKind::GridCube || kind == FamilyKind::GridRect;
  }

  static WindowFamily cubes(std::size_t d, Index side_min, Index side_max);
  static WindowFamily rects(Extents side_min, Extents side_max);
  // Windows whose continuous side lengths lie in [a, b] on a q-grid:
  // cells from ceil(a/q) to floor(b/q). b = +inf means the lattice extent.
  static WindowFamily grid_cubes(std::size_t d, double q, double a, double b);
  static WindowFamily grid_rects(std::size_t d, double q, double a, double b);
};

// Inclusive bounds on window origins. Windows must still fit the lattice.
struct OriginBox {
  Extents lo;
  Extents hi;
};

struct ScanResult {
  double max_value = -std::numeric_limits<double>::infinity();
  Window argmax;
  std::uint64_t windows_scanned = 0;
};

// Side bounds after resolving kLatticeExtent and validating against dims.
struct ResolvedSides {
  bool cube = true;
  Extents side_min;
  Extents side_max;
};

// Throws InvalidFamily on rank mismatch, side_min < 1, side_min > side_max,
// side_max beyond the lattice, or a non-positive grid step.
ResolvedSides resolve_sides(const Extents& dims, const WindowFamily& family);

// Exact maximum of S(A)/sqrt(|A|) over cubes with side in [side_min,
// side_max]. Ties go to the lexicographically smallest (sides, origin).
ScanResult scan_cubes(const PrefixSumTable& table, Index side_min,
                      Index side_max);

ScanResult scan_rects(const PrefixSumTable& table, const Extents& side_min,
                      const Extents& side_max);

// Grid kinds only; same algorithm with length bookkeeping.
ScanResult scan_grid(const PrefixSumTable& table, const WindowFamily& family);

// Any family, optionally restricted to origins inside `box`.
ScanResult scan_family(const PrefixSumTable& table, const WindowFamily& family,
                       const std::optional<OriginBox>& box = std::nullopt);

// Direct summation per window. Test oracle; rejects lattices above 10^4
// cells with OversizeError.
ScanResult scan_naive(const GaussianLatticeField& field,
                      const WindowFamily& family,
                      const std::optional<OriginBox>& box = std::nullopt);

// Number of windows a scan of `family` over `dims` visits.
std::uint64_t count_windows(const Extents& dims, const WindowFamily& family,
                            const std::optional<OriginBox>& box = std::nullopt);

// Combines partial scans (e.g. over disjoint side ranges) under the tie rule.
ScanResult merge_results(const ScanResult& a, const ScanResult& b);

// True if window a precedes window b in (sides, origin) lexicographic order.
bool precedes(const Window& a, const Window& b);

// Maximum standardized sum per block of origins. Origins are grouped into
// blocks of `block_side` per axis (the last block on an axis may be short);
// each window belongs to the block containing its origin. Blocks with no
// admissible window hold -inf. `block_grid` receives the block counts.
std::vector<double> block_maxima(const PrefixSumTable& table,
                                 const WindowFamily& family, Index block_side,
                                 Extents* block_grid = nullptr);

}  // namespace gscan
