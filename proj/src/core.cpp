#include "helmfft/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace helmfft
{

const char *to_string(BoundaryKind kind)
{
  switch (kind)
  {
    case BoundaryKind::Absorbing:
      return "absorbing";
    case BoundaryKind::Neumann:
      return "neumann";
    case BoundaryKind::Periodic:
      return "periodic";
    case BoundaryKind::SkewPeriodic:
      return "skew-periodic";
  }
  return "unknown";
}

Grid::Grid(std::vector<int> points) : n_(std::move(points))
{
  if (n_.empty() || n_.size() > 3)
  {
    throw DimensionError("grid dimension must be 1, 2 or 3, got " + std::to_string(n_.size()));
  }
  size_ = 1;
  h_.reserve(n_.size());
  for (int nj : n_)
  {
    if (nj < 3)
    {
      throw DimensionError("every grid direction needs at least 3 points, got " +
                           std::to_string(nj));
    }
    h_.push_back(1.0 / (nj - 1));
    size_ *= static_cast<std::size_t>(nj);
  }
}

std::size_t Grid::stride(int axis) const
{
  std::size_t s = 1;
  for (int j = axis + 1; j < dims(); ++j)
  {
    s *= static_cast<std::size_t>(n_[j]);
  }
  return s;
}

Grid Grid::trailing(int first) const
{
  return Grid(std::vector<int>(n_.begin() + first, n_.end()));
}

std::size_t lex_index(const Grid &grid, std::span<const int> multi_index)
{
  if (static_cast<int>(multi_index.size()) != grid.dims())
  {
    throw DimensionError("multi-index has " + std::to_string(multi_index.size()) +
                         " entries, grid has " + std::to_string(grid.dims()) + " dimensions");
  }
  std::size_t flat = 0;
  for (int j = 0; j < grid.dims(); ++j)
  {
    const int i = multi_index[j];
    if (i < 1 || i > grid.n(j))
    {
      throw DimensionError("index " + std::to_string(i) + " out of range [1, " +
                           std::to_string(grid.n(j)) + "] on axis " + std::to_string(j + 1));
    }
    flat = flat * static_cast<std::size_t>(grid.n(j)) + static_cast<std::size_t>(i - 1);
  }
  return flat;
}

std::vector<int> lex_multi_index(const Grid &grid, std::size_t flat)
{
  if (flat >= grid.size())
  {
    throw DimensionError("flat index " + std::to_string(flat) + " out of range");
  }
  std::vector<int> idx(grid.dims());
  for (int j = grid.dims() - 1; j >= 0; --j)
  {
    const auto nj = static_cast<std::size_t>(grid.n(j));
    idx[j] = static_cast<int>(flat % nj) + 1;
    flat /= nj;
  }
  return idx;
}

TriCornerMatrix::TriCornerMatrix(std::vector<Complex> diag, std::vector<Complex> off,
                                 Complex corner)
  : diag_(std::move(diag)), off_(std::move(off)), corner_(corner)
{
  if (diag_.size() < 2 || off_.size() + 1 != diag_.size())
  {
    throw DimensionError("tridiagonal matrix needs n >= 2 diagonal and n - 1 off-diagonal "
                         "entries");
  }
}

TriCornerMatrix TriCornerMatrix::identity(int n)
{
  return TriCornerMatrix(std::vector<Complex>(n, 1.0), std::vector<Complex>(n - 1, 0.0));
}

Complex TriCornerMatrix::operator()(int i, int j) const
{
  const int n = size();
  if (i < 0 || j < 0 || i >= n || j >= n)
  {
    throw DimensionError("matrix index out of range");
  }
  if (i == j)
  {
    return diag_[i];
  }
  if (std::abs(i - j) == 1)
  {
    return off_[std::min(i, j)];
  }
  if ((i == 0 && j == n - 1) || (i == n - 1 && j == 0))
  {
    return corner_;
  }
  return 0.0;
}

void TriCornerMatrix::apply_line(const Complex *x, Complex *y, std::size_t stride) const
{
  const int n = size();
  const auto at = [&](int i) { return x[static_cast<std::size_t>(i) * stride]; };
  y[0] = diag_[0] * at(0) + off_[0] * at(1) + corner_ * at(n - 1);
  for (int i = 1; i < n - 1; ++i)
  {
    y[static_cast<std::size_t>(i) * stride] =
        off_[i - 1] * at(i - 1) + diag_[i] * at(i) + off_[i] * at(i + 1);
  }
  y[static_cast<std::size_t>(n - 1) * stride] =
      corner_ * at(0) + off_[n - 2] * at(n - 2) + diag_[n - 1] * at(n - 1);
}

TriCornerMatrix TriCornerMatrix::operator-(const TriCornerMatrix &other) const
{
  if (size() != other.size())
  {
    throw DimensionError("matrix size mismatch in subtraction");
  }
  std::vector<Complex> d(diag_), o(off_);
  for (std::size_t i = 0; i < d.size(); ++i)
  {
    d[i] -= other.diag_[i];
  }
  for (std::size_t i = 0; i < o.size(); ++i)
  {
    o[i] -= other.off_[i];
  }
  return TriCornerMatrix(std::move(d), std::move(o), corner_ - other.corner_);
}

void KroneckerOperator::add_term(Complex coeff, std::vector<TriCornerMatrix> factors)
{
  if (factors.size() != shape_.size())
  {
    throw DimensionError("Kronecker term has " + std::to_string(factors.size()) +
                         " factors, operator has " + std::to_string(shape_.size()) +
                         " directions");
  }
  for (std::size_t j = 0; j < factors.size(); ++j)
  {
    if (factors[j].size() != shape_[j])
    {
      throw DimensionError("Kronecker factor " + std::to_string(j) + " has size " +
                           std::to_string(factors[j].size()) + ", expected " +
                           std::to_string(shape_[j]));
    }
  }
  terms_.push_back({coeff, std::move(factors)});
}

std::size_t KroneckerOperator::size() const
{
  return std::accumulate(shape_.begin(), shape_.end(), std::size_t{1},
                         [](std::size_t a, int b) { return a * static_cast<std::size_t>(b); });
}

namespace
{

// out = (I ⊗ F ⊗ I) in, F acting on `axis`.
void apply_axis(const TriCornerMatrix &f, const std::vector<int> &shape, int axis,
                const Complex *in, Complex *out)
{
  std::size_t inner = 1;
  for (std::size_t j = axis + 1; j < shape.size(); ++j)
  {
    inner *= static_cast<std::size_t>(shape[j]);
  }
  std::size_t outer = 1;
  for (int j = 0; j < axis; ++j)
  {
    outer *= static_cast<std::size_t>(shape[j]);
  }
  const auto n = static_cast<std::size_t>(shape[axis]);
  const auto &d = f.diag();
  const auto &o = f.off();
  const Complex c = f.corner();
  for (std::size_t a = 0; a < outer; ++a)
  {
    const Complex *x = in + a * n * inner;
    Complex *y = out + a * n * inner;
    // Row-wise over contiguous inner lines keeps the innermost loop unit-stride.
    for (std::size_t i = 0; i < n; ++i)
    {
      Complex *yi = y + i * inner;
      const Complex *xi = x + i * inner;
      const Complex di = d[i];
      for (std::size_t k = 0; k < inner; ++k)
      {
        yi[k] = di * xi[k];
      }
      if (i > 0)
      {
        const Complex *xm = x + (i - 1) * inner;
        const Complex oi = o[i - 1];
        for (std::size_t k = 0; k < inner; ++k)
        {
          yi[k] += oi * xm[k];
        }
      }
      if (i + 1 < n)
      {
        const Complex *xp = x + (i + 1) * inner;
        const Complex oi = o[i];
        for (std::size_t k = 0; k < inner; ++k)
        {
          yi[k] += oi * xp[k];
        }
      }
      if (c != 0.0 && (i == 0 || i == n - 1))
      {
        const Complex *xw = x + (i == 0 ? n - 1 : 0) * inner;
        for (std::size_t k = 0; k < inner; ++k)
        {
          yi[k] += c * xw[k];
        }
      }
    }
  }
}

} // namespace

void KroneckerOperator::apply(std::span<const Complex> x, std::span<Complex> y,
                              std::span<Complex> scratch) const
{
  const std::size_t n = size();
  if (x.size() != n || y.size() != n || scratch.size() < 2 * n)
  {
    throw DimensionError("Kronecker apply: vector length " + std::to_string(x.size()) +
                         " does not match operator size " + std::to_string(n));
  }
  std::fill(y.begin(), y.end(), Complex(0.0));
  Complex *a = scratch.data();
  Complex *b = scratch.data() + n;
  const int d = static_cast<int>(shape_.size());
  for (const auto &term : terms_)
  {
    const Complex *src = x.data();
    for (int axis = 0; axis < d; ++axis)
    {
      Complex *dst = (axis % 2 == 0) ? a : b;
      apply_axis(term.factors[axis], shape_, axis, src, dst);
      src = dst;
    }
    for (std::size_t i = 0; i < n; ++i)
    {
      y[i] += term.coeff * src[i];
    }
  }
}

FieldVector kron_apply(const KroneckerOperator &op, std::span<const Complex> x)
{
  FieldVector y(op.size());
  FieldVector scratch(2 * op.size());
  op.apply(x, y, scratch);
  return y;
}

double norm2(std::span<const Complex> x)
{
  double s = 0.0;
  for (const Complex &v : x)
  {
    s += std::norm(v);
  }
  return std::sqrt(s);
}

double relative_residual(const KroneckerOperator &op, std::span<const Complex> u,
                         std::span<const Complex> f)
{
  FieldVector r(op.size());
  FieldVector scratch(2 * op.size());
  return residual_into(op, u, f, r, scratch);
}

double residual_into(const KroneckerOperator &op, std::span<const Complex> u,
                     std::span<const Complex> f, std::span<Complex> r, std::span<Complex> scratch)
{
  if (f.size() != op.size() || r.size() < op.size())
  {
    throw DimensionError("residual: length mismatch");
  }
  r = r.first(op.size());
  op.apply(u, r, scratch);
  for (std::size_t i = 0; i < r.size(); ++i)
  {
    r[i] = f[i] - r[i];
  }
  const double nf = norm2(f);
  return nf > 0.0 ? norm2(r) / nf : norm2(r);
}

} // namespace helmfft
