#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace gscan {

using Index = std::int64_t;
using Extents = std::vector<Index>;

// Lattices larger than this are rejected; keeps prefix-sum cancellation
// error far below the 1e-9 relative tolerance used for window sums.
inline constexpr Index kMaxLatticeCells = Index{1} << 31;

// Row-major strides (last axis contiguous).
Extents row_major_strides(const Extents& dims);

Index cell_count(const Extents& dims);

// d-dimensional array of i.i.d. N(0,1) values. Immutable once built.
class GaussianLatticeField {
 public:
  // Throws InvalidDimension for d = 0, a non-positive extent or an oversize
  // lattice.
  static GaussianLatticeField generate(Extents dims, std::uint64_t seed,
                                       std::uint64_t stream_id);

  // Wraps caller-supplied values (tests, zero fields, replay).
  static GaussianLatticeField from_values(Extents dims,
                                          std::vector<double> values);

  const Extents& dims() const noexcept { return dims_; }
  std::size_t rank() const noexcept { return dims_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  double at(std::span<const Index> index) const;

 private:
  GaussianLatticeField(Extents dims, std::vector<double> values,
                       std::uint64_t seed, std::uint64_t stream_id)
      : dims_(std::move(dims)),
        values_(std::move(values)),
        seed_(seed),
        stream_id_(stream_id) {}

  Extents dims_;
  std::vector<double> values_;
  std::uint64_t seed_ = 0;
  std::uint64_t stream_id_ = 0;
};

inline GaussianLatticeField generate_lattice(const Extents& dims,
                                             std::uint64_t seed,
                                             std::uint64_t stream_id) {
  return GaussianLatticeField::generate(dims, seed, stream_id);
}

// Half-open index box {z : origin_i <= z_i < origin_i + sides_i}.
struct Window {
  Extents origin;
  Extents sides;

  Index cardinality() const noexcept;
  bool is_cube() const noexcept;
  bool operator==(const Window&) const = default;
};

// Cumulative sums with extent dims_i + 1 per axis:
// table[x] = sum of values[z] over 0 <= z < x. Zero on every lower face.
class PrefixSumTable {
 public:
  const Extents& dims() const noexcept { return dims_; }
  const Extents& table_strides() const noexcept { return strides_; }
  std::span<const double> table() const noexcept { return table_; }
  std::size_t rank() const noexcept { return dims_.size(); }

  double at(std::span<const Index> index) const;

 private:
  friend PrefixSumTable build_prefix_table(const GaussianLatticeField&,
                                           std::uint64_t*);
  Extents dims_;
  Extents strides_;
  std::vector<double> table_;
};

// One cumulative pass per axis. If `additions` is non-null it receives the
// number of floating-point additions performed.
PrefixSumTable build_prefix_table(const GaussianLatticeField& field,
                                  std::uint64_t* additions = nullptr);

// Sum over the window by inclusion-exclusion on its 2^d corners.
// Throws BoundsError if the window leaves the lattice.
double window_sum(const PrefixSumTable& table, const Window& w);

// window_sum / sqrt(|w|).
double standardized_sum(const PrefixSumTable& table, const Window& w);

// Throws BoundsError unless `w` has the table's rank, positive sides and lies
// inside the lattice.
void check_window(const Extents& dims, const Window& w);

}  // namespace gscan
