#include "gscan/field.hpp"

#include <cmath>
#include <string>

#include "gscan/error.hpp"
#include "gscan/random.hpp"

namespace gscan {

namespace {

void validate_dims(const Extents& dims) {
  if (dims.empty()) throw InvalidDimension("lattice rank must be at least 1");
  Index cells = 1;
  for (Index n : dims) {
    if (n < 1)
      throw InvalidDimension("lattice extent must be positive, got " +
                             std::to_string(n));
    if (cells > kMaxLatticeCells / n)
      throw InvalidDimension("lattice exceeds 2^31 cells");
    cells *= n;
  }
}

Index offset_of(const Extents& strides, std::span<const Index> index) {
  Index off = 0;
  for (std::size_t i = 0; i < strides.size(); ++i) off += index[i] * strides[i];
  return off;
}

}  // namespace

Extents row_major_strides(const Extents& dims) {
  Extents strides(dims.size(), 1);
  for (std::size_t i = dims.size(); i-- > 1;) strides[i - 1] = strides[i] * dims[i];
  return strides;
}

Index cell_count(const Extents& dims) {
  Index cells = 1;
  for (Index n : dims) cells *= n;
  return cells;
}

GaussianLatticeField GaussianLatticeField::generate(Extents dims,
                                                    std::uint64_t seed,
                                                    std::uint64_t stream_id) {
  validate_dims(dims);
  std::vector<double> values(static_cast<std::size_t>(cell_count(dims)));
  NormalStream(seed, stream_id).fill(values);
  return GaussianLatticeField(std::move(dims), std::move(values), seed,
                              stream_id);
}

GaussianLatticeField GaussianLatticeField::from_values(
    Extents dims, std::vector<double> values) {
  validate_dims(dims);
  if (static_cast<Index>(values.size()) != cell_count(dims))
    throw InvalidDimension("value count does not match lattice extents");
  for (double v : values)
    if (!std::isfinite(v)) throw DomainError("lattice values must be finite");
  return GaussianLatticeField(std::move(dims), std::move(values), 0, 0);
}

double GaussianLatticeField::at(std::span<const Index> index) const {
  if (index.size() != dims_.size()) throw BoundsError("index rank mismatch");
  for (std::size_t i = 0; i < dims_.size(); ++i)
    if (index[i] < 0 || index[i] >= dims_[i])
      throw BoundsError("lattice index out of range");
  return values_[static_cast<std::size_t>(
      offset_of(row_major_strides(dims_), index))];
}

Index Window::cardinality() const noexcept {
  Index c = 1;
  for (Index s : sides) c *= s;
  return c;
}

bool Window::is_cube() const noexcept {
  for (Index s : sides)
    if (s != sides.front()) return false;
  return true;
}

double PrefixSumTable::at(std::span<const Index> index) const {
  if (index.size() != dims_.size()) throw BoundsError("index rank mismatch");
  for (std::size_t i = 0; i < dims_.size(); ++i)
    if (index[i] < 0 || index[i] > dims_[i])
      throw BoundsError("table index out of range");
  return table_[static_cast<std::size_t>(offset_of(strides_, index))];
}

PrefixSumTable build_prefix_table(const GaussianLatticeField& field,
                                  std::uint64_t* additions) {
  PrefixSumTable t;
  t.dims_ = field.dims();
  const std::size_t d = t.dims_.size();
  Extents ext(d);
  for (std::size_t i = 0; i < d; ++i) ext[i] = t.dims_[i] + 1;
  t.strides_ = row_major_strides(ext);
  t.table_.assign(static_cast<std::size_t>(cell_count(ext)), 0.0);

  // Scatter values into the interior (every index shifted by one).
  const auto values = field.values();
  const Extents src_strides = row_major_strides(t.dims_);
  Index shift = 0;
  for (std::size_t i = 0; i < d; ++i) shift += t.strides_[i];
  std::vector<Index> idx(d, 0);
  for (std::size_t flat = 0; flat < values.size(); ++flat) {
    Index dst = shift;
    Index rem = static_cast<Index>(flat);
    for (std::size_t i = 0; i < d; ++i) {
      dst += (rem / src_strides[i]) * t.strides_[i];
      rem %= src_strides[i];
    }
    t.table_[static_cast<std::size_t>(dst)] = values[flat];
  }

  // One running-sum sweep per axis. Along axis a, element x accumulates
  // element x - stride_a whenever its a-coordinate is >= 1.
  std::uint64_t adds = 0;
  const Index total = static_cast<Index>(t.table_.size());
  for (std::size_t a = 0; a < d; ++a) {
    const Index stride = t.strides_[a];
    const Index period = stride * ext[a];
    for (Index block = 0; block < total; block += period) {
      for (Index x = block + stride; x < block + period; ++x) {
        t.table_[static_cast<std::size_t>(x)] +=
            t.table_[static_cast<std::size_t>(x - stride)];
        ++adds;
      }
    }
  }
  if (additions != nullptr) *additions = adds;
  return t;
}

void check_window(const Extents& dims, const Window& w) {
  if (w.origin.size() != dims.size() || w.sides.size() != dims.size())
    throw BoundsError("window rank does not match lattice rank");
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (w.sides[i] < 1) throw BoundsError("window sides must be positive");
    if (w.origin[i] < 0 || w.origin[i] + w.sides[i] > dims[i])
      throw BoundsError("window leaves the lattice");
  }
}

double window_sum(const PrefixSumTable& table, const Window& w) {
  check_window(table.dims(), w);
  const std::size_t d = table.rank();
  const auto& strides = table.table_strides();
  const auto data = table.table();
  Index base = 0;
  for (std::size_t i = 0; i < d; ++i) base += w.origin[i] * strides[i];
  double sum = 0.0;
  for (unsigned corner = 0; corner < (1u << d); ++corner) {
    Index off = base;
    int upper = 0;
    for (std::size_t i = 0; i < d; ++i) {
      if (corner & (1u << i)) {
        off += w.sides[i] * strides[i];
        ++upper;
      }
    }
    const double v = data[static_cast<std::size_t>(off)];
    sum += ((static_cast<int>(d) - upper) % 2 == 0) ? v : -v;
  }
  return sum;
}

double standardized_sum(const PrefixSumTable& table, const Window& w) {
  return window_sum(table, w) *
         (1.0 / std::sqrt(static_cast<double>(w.cardinality())));
}

}  // namespace gscan
