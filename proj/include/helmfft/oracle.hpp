#pragma once

// Brute-force reference: dense matrices assembled from explicit Kronecker expansion of the
// element formulas, dense LU with partial pivoting, dense QZ for pencils. Shares only core
// types with the fast path.

#include <optional>
#include <span>
#include <vector>

#include "helmfft/core.hpp"

namespace helmfft::oracle
{

inline constexpr std::size_t kMaxUnknowns = 20000;

// Column-major dense complex matrix.
struct DenseMatrix
{
  int rows = 0;
  int cols = 0;
  std::vector<Complex> data;

  DenseMatrix() = default;
  DenseMatrix(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c) {}

  Complex &operator()(int i, int j) { return data[static_cast<std::size_t>(j) * rows + i]; }
  Complex operator()(int i, int j) const { return data[static_cast<std::size_t>(j) * rows + i]; }

  FieldVector multiply(std::span<const Complex> x) const;
  DenseMatrix transpose() const;
};

DenseMatrix operator+(const DenseMatrix &a, const DenseMatrix &b);
DenseMatrix operator-(const DenseMatrix &a, const DenseMatrix &b);
DenseMatrix operator*(Complex s, const DenseMatrix &a);
DenseMatrix operator*(const DenseMatrix &a, const DenseMatrix &b);
DenseMatrix kron(const DenseMatrix &a, const DenseMatrix &b);
DenseMatrix identity(int n);

// 1D element matrices written out entry by entry.
DenseMatrix stiffness_1d(int n, double h, double omega, BoundaryKind bc);
DenseMatrix mass_1d(int n, double h, BoundaryKind bc);

// Dense form of an arbitrary Kronecker operator (size-capped).
DenseMatrix densify(const KroneckerOperator &op);

enum class Which
{
  A,
  B
};

struct DenseProblem
{
  Grid grid;
  double omega = 0.0;
  Complex shift = 0.0;
  BoundaryKind bc_x1 = BoundaryKind::Absorbing;
  DenseMatrix a;
  DenseMatrix b;
};

// A = (K_1 - s M_1) ⊗ M_2 (⊗ M_3) + M_1 ⊗ (...), s = omega^2 unless a shift is given.
// B replaces the x_1 pencil with its periodic (or skew-periodic) version. SizeLimit when
// N > kMaxUnknowns.
DenseMatrix dense_operator(const Grid &grid, double omega, Which which,
                           BoundaryKind bc_x1 = BoundaryKind::Absorbing,
                           std::optional<Complex> shift = std::nullopt,
                           BoundaryKind auxiliary = BoundaryKind::Periodic);
DenseProblem assemble_dense_problem(const Grid &grid, double omega,
                                    BoundaryKind bc_x1 = BoundaryKind::Absorbing,
                                    std::optional<Complex> shift = std::nullopt);

class DenseLU
{
public:
  // Throws SingularBlock when the reciprocal condition estimate falls below 1e-13.
  explicit DenseLU(DenseMatrix a);
  FieldVector solve(std::span<const Complex> f) const;
  double rcond() const { return rcond_; }

private:
  DenseMatrix lu_;
  std::vector<int> pivots_;
  double rcond_ = 0.0;
};

struct DenseSolution
{
  FieldVector u;
  double residual = 0.0; // ||M u - f|| / ||f||
};

DenseSolution dense_solve(const DenseMatrix &m, std::span<const Complex> f);
DenseSolution dense_solve(const DenseProblem &p, Which which, std::span<const Complex> f);

// Full dense solve restricted to the x_1 = first and x_1 = last planes.
std::vector<Complex> dense_partial_solution(const DenseProblem &p, Which which,
                                            std::span<const Complex> f);
std::vector<Complex> restrict_to_x1_boundary(const Grid &grid, std::span<const Complex> u);

struct DenseEigen
{
  std::vector<Complex> lambdas;
  DenseMatrix vectors; // columns unnormalized
};

// Generalized eigenpairs of K v = lambda M v by QZ; n <= 512.
DenseEigen dense_eigensolve_pencil(const DenseMatrix &k, const DenseMatrix &m);

} // namespace helmfft::oracle
