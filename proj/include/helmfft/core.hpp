#pragma once

// Grid, boundary and structured-matrix primitives shared by the whole library.
//
// Field vectors use lexicographic ordering with x_1 slowest and x_d fastest, so a
// factor of the form (F ⊗ I) acts on contiguous slabs of size N / n_1.

#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace helmfft
{

using Complex = std::complex<double>;
using FieldVector = std::vector<Complex>;

class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error
{
public:
  using Error::Error;
};

class SingularBlock : public Error
{
public:
  // block == -1 when the failing factorization is not part of an indexed family.
  SingularBlock(const std::string &what, long block = -1) : Error(what), block_(block) {}
  long block() const { return block_; }

private:
  long block_;
};

class EigensolverFailure : public Error
{
public:
  using Error::Error;
};

class NormalizationFailure : public Error
{
public:
  using Error::Error;
};

class SizeLimit : public Error
{
public:
  using Error::Error;
};

enum class BoundaryKind
{
  Absorbing,
  Neumann,
  Periodic,
  SkewPeriodic // anti-periodic wrap: corner couplings negated
};

const char *to_string(BoundaryKind kind);

inline bool is_circulant(BoundaryKind kind)
{
  return kind == BoundaryKind::Periodic || kind == BoundaryKind::SkewPeriodic;
}

// Uniform mesh of the unit d-box; h_j = 1 / (n_j - 1).
class Grid
{
public:
  Grid() = default;
  explicit Grid(std::vector<int> points);

  int dims() const { return static_cast<int>(n_.size()); }
  int n(int axis) const { return n_.at(axis); }
  double h(int axis) const { return h_.at(axis); }
  const std::vector<int> &points() const { return n_; }
  std::size_t size() const { return size_; }

  // Product of n_j for j > axis, i.e. the stride of axis in lexicographic order.
  std::size_t stride(int axis) const;

  // Grid over axes [first, dims).
  Grid trailing(int first) const;

  bool operator==(const Grid &other) const { return n_ == other.n_; }

private:
  std::vector<int> n_;
  std::vector<double> h_;
  std::size_t size_ = 0;
};

// Flat position of a 1-based multi-index (i_1, ..., i_d).
std::size_t lex_index(const Grid &grid, std::span<const int> multi_index);

// Inverse of lex_index; returns 1-based indices.
std::vector<int> lex_multi_index(const Grid &grid, std::size_t flat);

// Symmetric tridiagonal matrix with optional wrap-around corners (1,n) = (n,1).
class TriCornerMatrix
{
public:
  TriCornerMatrix() = default;
  TriCornerMatrix(std::vector<Complex> diag, std::vector<Complex> off, Complex corner = 0.0);

  static TriCornerMatrix identity(int n);

  int size() const { return static_cast<int>(diag_.size()); }
  const std::vector<Complex> &diag() const { return diag_; }
  // off()[i] couples rows i and i+1 (0-based); sub and super are the same array.
  const std::vector<Complex> &off() const { return off_; }
  Complex corner() const { return corner_; }

  // 0-based entry access.
  Complex operator()(int i, int j) const;

  // y[i*stride] = sum_j A(i,j) x[j*stride] for one line.
  void apply_line(const Complex *x, Complex *y, std::size_t stride) const;

  TriCornerMatrix operator-(const TriCornerMatrix &other) const;

private:
  std::vector<Complex> diag_;
  std::vector<Complex> off_;
  Complex corner_ = 0.0;
};

// Sum of Kronecker products of per-direction TriCornerMatrix factors.
class KroneckerOperator
{
public:
  struct Term
  {
    Complex coeff;
    std::vector<TriCornerMatrix> factors;
  };

  KroneckerOperator() = default;
  explicit KroneckerOperator(std::vector<int> shape) : shape_(std::move(shape)) {}

  void add_term(Complex coeff, std::vector<TriCornerMatrix> factors);

  const std::vector<int> &shape() const { return shape_; }
  const std::vector<Term> &terms() const { return terms_; }
  std::size_t size() const;

  // y = op * x. scratch must hold 2 * size() entries; x and y must not alias.
  void apply(std::span<const Complex> x, std::span<Complex> y, std::span<Complex> scratch) const;

private:
  std::vector<int> shape_;
  std::vector<Term> terms_;
};

FieldVector kron_apply(const KroneckerOperator &op, std::span<const Complex> x);

double norm2(std::span<const Complex> x);

// ||op * u - f||_2 / ||f||_2 evaluated matrix-free.
double relative_residual(const KroneckerOperator &op, std::span<const Complex> u,
                         std::span<const Complex> f);

// r = f - op * u without allocating; scratch holds 2 * op.size() entries. Returns
// ||r|| / ||f|| (||r|| when f = 0).
double residual_into(const KroneckerOperator &op, std::span<const Complex> u,
                     std::span<const Complex> f, std::span<Complex> r, std::span<Complex> scratch);

// Iterative refinement after a direct solve: while the relative residual exceeds target,
// solve for the correction and add it, at most max_steps times. Stops early once a step
// fails to halve the residual.
struct RefinementPolicy
{
  double target = 1e-9;
  int max_steps = 2;
};

struct SolveReport
{
  double residual = 0.0;
  int refinements = 0;
};

} // namespace helmfft
