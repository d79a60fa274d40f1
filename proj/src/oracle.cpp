#include "helmfft/oracle.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>

namespace helmfft::oracle
{

namespace
{

lapack_complex_double *lp(Complex *p) { return reinterpret_cast<lapack_complex_double *>(p); }

void check_cap(std::size_t n)
{
  if (n > kMaxUnknowns)
  {
    throw SizeLimit("dense oracle is capped at " + std::to_string(kMaxUnknowns) +
                    " unknowns, requested " + std::to_string(n));
  }
}

// out += coeff * (f_1 ⊗ ... ⊗ f_d), written entry by entry with no intermediate products.
void add_kron(DenseMatrix &out, Complex coeff, const std::vector<const DenseMatrix *> &factors)
{
  const std::size_t d = factors.size();
  std::vector<int> ri(d, 0), ci(d, 0);
  const auto rows = out.rows;
  for (int col = 0; col < out.cols; ++col)
  {
    // Split col into per-factor column indices, x_1 slowest.
    int rest = col;
    for (std::size_t k = d; k-- > 0;)
    {
      ci[k] = rest % factors[k]->cols;
      rest /= factors[k]->cols;
    }
    for (int row = 0; row < rows; ++row)
    {
      int r = row;
      Complex v = coeff;
      for (std::size_t k = d; k-- > 0;)
      {
        ri[k] = r % factors[k]->rows;
        r /= factors[k]->rows;
        v *= (*factors[k])(ri[k], ci[k]);
        if (v == 0.0)
        {
          break;
        }
      }
      if (v != 0.0)
      {
        out(row, col) += v;
      }
    }
  }
}

void check_same_shape(const DenseMatrix &a, const DenseMatrix &b)
{
  if (a.rows != b.rows || a.cols != b.cols)
  {
    throw DimensionError("dense matrix shape mismatch");
  }
}

} // namespace

FieldVector DenseMatrix::multiply(std::span<const Complex> x) const
{
  if (static_cast<int>(x.size()) != cols)
  {
    throw DimensionError("dense multiply: length mismatch");
  }
  FieldVector y(rows, 0.0);
  for (int j = 0; j < cols; ++j)
  {
    const Complex xj = x[j];
    if (xj == 0.0)
    {
      continue;
    }
    const Complex *col = data.data() + static_cast<std::size_t>(j) * rows;
    for (int i = 0; i < rows; ++i)
    {
      y[i] += col[i] * xj;
    }
  }
  return y;
}

DenseMatrix DenseMatrix::transpose() const
{
  DenseMatrix t(cols, rows);
  for (int j = 0; j < cols; ++j)
  {
    for (int i = 0; i < rows; ++i)
    {
      t(j, i) = (*this)(i, j);
    }
  }
  return t;
}

DenseMatrix operator+(const DenseMatrix &a, const DenseMatrix &b)
{
  check_same_shape(a, b);
  DenseMatrix c = a;
  for (std::size_t k = 0; k < c.data.size(); ++k)
  {
    c.data[k] += b.data[k];
  }
  return c;
}

DenseMatrix operator-(const DenseMatrix &a, const DenseMatrix &b)
{
  check_same_shape(a, b);
  DenseMatrix c = a;
  for (std::size_t k = 0; k < c.data.size(); ++k)
  {
    c.data[k] -= b.data[k];
  }
  return c;
}

DenseMatrix operator*(Complex s, const DenseMatrix &a)
{
  DenseMatrix c = a;
  for (auto &v : c.data)
  {
    v *= s;
  }
  return c;
}

DenseMatrix operator*(const DenseMatrix &a, const DenseMatrix &b)
{
  if (a.cols != b.rows)
  {
    throw DimensionError("dense product: inner dimension mismatch");
  }
  DenseMatrix c(a.rows, b.cols);
  for (int j = 0; j < b.cols; ++j)
  {
    for (int k = 0; k < a.cols; ++k)
    {
      const Complex bkj = b(k, j);
      if (bkj == 0.0)
      {
        continue;
      }
      for (int i = 0; i < a.rows; ++i)
      {
        c(i, j) += a(i, k) * bkj;
      }
    }
  }
  return c;
}

DenseMatrix kron(const DenseMatrix &a, const DenseMatrix &b)
{
  check_cap(static_cast<std::size_t>(a.rows) * b.rows);
  DenseMatrix c(a.rows * b.rows, a.cols * b.cols);
  for (int ja = 0; ja < a.cols; ++ja)
  {
    for (int ia = 0; ia < a.rows; ++ia)
    {
      const Complex s = a(ia, ja);
      if (s == 0.0)
      {
        continue;
      }
      for (int jb = 0; jb < b.cols; ++jb)
      {
        for (int ib = 0; ib < b.rows; ++ib)
        {
          c(ia * b.rows + ib, ja * b.cols + jb) = s * b(ib, jb);
        }
      }
    }
  }
  return c;
}

DenseMatrix identity(int n)
{
  DenseMatrix c(n, n);
  for (int i = 0; i < n; ++i)
  {
    c(i, i) = 1.0;
  }
  return c;
}

DenseMatrix stiffness_1d(int n, double h, double omega, BoundaryKind bc)
{
  DenseMatrix k(n, n);
  for (int i = 0; i < n; ++i)
  {
    k(i, i) = 2.0 / h;
    if (i > 0)
    {
      k(i, i - 1) = -1.0 / h;
    }
    if (i + 1 < n)
    {
      k(i, i + 1) = -1.0 / h;
    }
  }
  switch (bc)
  {
    case BoundaryKind::Absorbing:
      k(0, 0) = k(n - 1, n - 1) = Complex(1.0, -omega * h) / h;
      break;
    case BoundaryKind::Neumann:
      k(0, 0) = k(n - 1, n - 1) = 1.0 / h;
      break;
    case BoundaryKind::Periodic:
      k(0, n - 1) += -1.0 / h;
      k(n - 1, 0) += -1.0 / h;
      break;
    case BoundaryKind::SkewPeriodic:
      k(0, n - 1) += 1.0 / h;
      k(n - 1, 0) += 1.0 / h;
      break;
  }
  return k;
}

DenseMatrix mass_1d(int n, double h, BoundaryKind bc)
{
  DenseMatrix m(n, n);
  for (int i = 0; i < n; ++i)
  {
    m(i, i) = 4.0 * h / 6.0;
    if (i > 0)
    {
      m(i, i - 1) = h / 6.0;
    }
    if (i + 1 < n)
    {
      m(i, i + 1) = h / 6.0;
    }
  }
  if (bc == BoundaryKind::Periodic || bc == BoundaryKind::SkewPeriodic)
  {
    const double wrap = (bc == BoundaryKind::Periodic) ? 1.0 : -1.0;
    m(0, n - 1) += wrap * h / 6.0;
    m(n - 1, 0) += wrap * h / 6.0;
  }
  else
  {
    m(0, 0) = m(n - 1, n - 1) = 2.0 * h / 6.0;
  }
  return m;
}

DenseMatrix densify(const KroneckerOperator &op)
{
  check_cap(op.size());
  const int n = static_cast<int>(op.size());
  DenseMatrix out(n, n);
  for (const auto &term : op.terms())
  {
    std::vector<DenseMatrix> dense;
    for (const auto &f : term.factors)
    {
      DenseMatrix &d = dense.emplace_back(f.size(), f.size());
      for (int i = 0; i < f.size(); ++i)
      {
        for (int j = 0; j < f.size(); ++j)
        {
          d(i, j) = f(i, j);
        }
      }
    }
    std::vector<const DenseMatrix *> ptrs;
    for (const auto &d : dense)
    {
      ptrs.push_back(&d);
    }
    add_kron(out, term.coeff, ptrs);
  }
  return out;
}

DenseMatrix dense_operator(const Grid &grid, double omega, Which which, BoundaryKind bc_x1,
                           std::optional<Complex> shift, BoundaryKind auxiliary)
{
  check_cap(grid.size());
  if (grid.dims() < 2)
  {
    throw DimensionError("dense operator needs a 2D or 3D grid");
  }
  const Complex s = shift.value_or(omega * omega);
  if (auxiliary != BoundaryKind::Periodic && auxiliary != BoundaryKind::SkewPeriodic)
  {
    throw DimensionError("auxiliary x_1 pencil must be periodic or skew-periodic");
  }
  const BoundaryKind bc1 = (which == Which::B) ? auxiliary : bc_x1;
  const DenseMatrix k1 = stiffness_1d(grid.n(0), grid.h(0), omega, bc1);
  const DenseMatrix m1 = mass_1d(grid.n(0), grid.h(0), bc1);
  const DenseMatrix k1s = k1 - s * m1;
  const DenseMatrix k2 = stiffness_1d(grid.n(1), grid.h(1), omega, BoundaryKind::Neumann);
  const DenseMatrix m2 = mass_1d(grid.n(1), grid.h(1), BoundaryKind::Neumann);
  const int n = static_cast<int>(grid.size());
  DenseMatrix a(n, n);
  if (grid.dims() == 2)
  {
    add_kron(a, 1.0, {&k1s, &m2});
    add_kron(a, 1.0, {&m1, &k2});
    return a;
  }
  const DenseMatrix k3 = stiffness_1d(grid.n(2), grid.h(2), omega, BoundaryKind::Neumann);
  const DenseMatrix m3 = mass_1d(grid.n(2), grid.h(2), BoundaryKind::Neumann);
  add_kron(a, 1.0, {&k1s, &m2, &m3});
  add_kron(a, 1.0, {&m1, &k2, &m3});
  add_kron(a, 1.0, {&m1, &m2, &k3});
  return a;
}

DenseProblem assemble_dense_problem(const Grid &grid, double omega, BoundaryKind bc_x1,
                                    std::optional<Complex> shift)
{
  DenseProblem p;
  p.grid = grid;
  p.omega = omega;
  p.shift = shift.value_or(omega * omega);
  p.bc_x1 = bc_x1;
  p.a = dense_operator(grid, omega, Which::A, bc_x1, shift);
  p.b = dense_operator(grid, omega, Which::B, bc_x1, shift);
  return p;
}

DenseLU::DenseLU(DenseMatrix a) : lu_(std::move(a)), pivots_(lu_.rows)
{
  if (lu_.rows != lu_.cols)
  {
    throw DimensionError("dense LU needs a square matrix");
  }
  check_cap(static_cast<std::size_t>(lu_.rows));
  const int n = lu_.rows;
  double anorm = 0.0;
  for (int j = 0; j < n; ++j)
  {
    double col = 0.0;
    for (int i = 0; i < n; ++i)
    {
      col += std::abs(lu_(i, j));
    }
    anorm = std::max(anorm, col);
  }
  const lapack_int info = LAPACKE_zgetrf(LAPACK_COL_MAJOR, n, n, lp(lu_.data.data()), n,
                                         pivots_.data());
  if (info < 0)
  {
    throw Error("zgetrf: illegal argument " + std::to_string(-info));
  }
  if (info > 0)
  {
    rcond_ = 0.0;
  }
  else
  {
    LAPACKE_zgecon(LAPACK_COL_MAJOR, '1', n, lp(lu_.data.data()), n, anorm, &rcond_);
  }
  if (rcond_ < 1e-13)
  {
    throw SingularBlock("dense matrix is numerically singular (rcond " + std::to_string(rcond_) +
                        ")");
  }
}

FieldVector DenseLU::solve(std::span<const Complex> f) const
{
  if (static_cast<int>(f.size()) != lu_.rows)
  {
    throw DimensionError("dense solve: length mismatch");
  }
  FieldVector u(f.begin(), f.end());
  const lapack_int info =
      LAPACKE_zgetrs(LAPACK_COL_MAJOR, 'N', lu_.rows, 1,
                     reinterpret_cast<const lapack_complex_double *>(lu_.data.data()), lu_.rows,
                     pivots_.data(), lp(u.data()), lu_.rows);
  if (info != 0)
  {
    throw Error("zgetrs failed with info " + std::to_string(info));
  }
  return u;
}

DenseSolution dense_solve(const DenseMatrix &m, std::span<const Complex> f)
{
  const DenseLU lu(m);
  DenseSolution s{lu.solve(f), 0.0};
  FieldVector r = m.multiply(s.u);
  for (std::size_t i = 0; i < r.size(); ++i)
  {
    r[i] -= f[i];
  }
  const double nf = norm2(f);
  s.residual = nf > 0.0 ? norm2(r) / nf : norm2(r);
  return s;
}

DenseSolution dense_solve(const DenseProblem &p, Which which, std::span<const Complex> f)
{
  return dense_solve(which == Which::A ? p.a : p.b, f);
}

std::vector<Complex> restrict_to_x1_boundary(const Grid &grid, std::span<const Complex> u)
{
  const std::size_t block = grid.stride(0);
  std::vector<Complex> out(2 * block);
  std::copy_n(u.begin(), block, out.begin());
  std::copy_n(u.begin() + static_cast<std::ptrdiff_t>((grid.n(0) - 1) * block), block,
              out.begin() + static_cast<std::ptrdiff_t>(block));
  return out;
}

std::vector<Complex> dense_partial_solution(const DenseProblem &p, Which which,
                                            std::span<const Complex> f)
{
  return restrict_to_x1_boundary(p.grid, dense_solve(p, which, f).u);
}

DenseEigen dense_eigensolve_pencil(const DenseMatrix &k, const DenseMatrix &m)
{
  check_same_shape(k, m);
  const int n = k.rows;
  if (n > 512)
  {
    throw SizeLimit("dense pencil eigensolve is capped at n = 512");
  }
  DenseMatrix a = k, b = m;
  std::vector<Complex> alpha(n), beta(n);
  DenseEigen out{std::vector<Complex>(n), DenseMatrix(n, n)};
  const lapack_int info = LAPACKE_zggev(
      LAPACK_COL_MAJOR, 'N', 'V', n, lp(a.data.data()), n, lp(b.data.data()), n,
      lp(alpha.data()), lp(beta.data()), nullptr, 1, lp(out.vectors.data.data()), n);
  if (info != 0)
  {
    throw EigensolverFailure("zggev failed with info " + std::to_string(info));
  }
  for (int l = 0; l < n; ++l)
  {
    if (std::abs(beta[l]) == 0.0)
    {
      throw EigensolverFailure("infinite generalized eigenvalue");
    }
    out.lambdas[l] = alpha[l] / beta[l];
  }
  return out;
}

} // namespace helmfft::oracle
