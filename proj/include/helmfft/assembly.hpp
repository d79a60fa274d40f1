#pragma once

// One-dimensional FEM pencils, their periodic counterparts, and the separable operators
//
//   A = (K_1 - s M_1) ⊗ M_2 + M_1 ⊗ K_2                       (2D)
//   A = (K_1 - s M_1) ⊗ M_2 ⊗ M_3 + M_1 ⊗ (K_2 ⊗ M_3 + M_2 ⊗ K_3)   (3D)
//
// with s = omega^2 for the Helmholtz problem. B is A with the x_1 pencil replaced by its
// periodic (circulant) version; B - A is supported on the two x_1 boundary planes only.

#include <array>
#include <span>

#include "helmfft/core.hpp"

namespace helmfft
{

struct Pencil1D
{
  TriCornerMatrix stiffness; // K, units 1/h
  TriCornerMatrix mass;      // M, units h
  BoundaryKind bc = BoundaryKind::Neumann;
  int n = 0;
  double h = 0.0;
};

// Linear stiffness/mass element matrices on a uniform 1D mesh. omega only enters the two
// boundary diagonal entries of K for the absorbing condition: (1 - i omega h) / h.
Pencil1D assemble_pencil(int n, double h, double omega, BoundaryKind bc);

// Circulant K^B, M^B with first rows (2, -1, 0, ..., 0, -1) / h and (4, 1, 0, ..., 0, 1) h / 6.
Pencil1D assemble_periodic_pencil(int n, double h);

// Periodic or SkewPeriodic; the skew version flips the sign of both corner entries, which
// removes the constant mode and shifts the spectrum by half a DFT step.
Pencil1D assemble_auxiliary_pencil(int n, double h, BoundaryKind kind);

// D_K = K^B - K and D_M = M^B - M, restricted to the index set {first, last}.
// Blocks are row-major 2x2: [0] = (first, first), [1] = (first, last), ...
struct PencilDifference
{
  int n = 0;
  std::array<Complex, 4> dk{};
  std::array<Complex, 4> dm{};
};

PencilDifference pencil_difference(const Pencil1D &auxiliary, const Pencil1D &original);

// Mass and stiffness cross-terms over the directions following x_1:
//   2D: mass = M_2, stiffness = K_2
//   3D: mass = M_2 ⊗ M_3, stiffness = K_2 ⊗ M_3 + M_2 ⊗ K_3
struct CrossTerms
{
  KroneckerOperator mass;
  KroneckerOperator stiffness;
};

CrossTerms build_cross_terms(std::span<const Pencil1D> trailing);

// Boundary correction C_bb(s) = (D_K - s D_M)|bb ⊗ mass_cross + D_M|bb ⊗ stiffness_cross, acting
// on the two x_1 boundary planes. Stored factored; apply costs O(block).
class CorrectionMatrix
{
public:
  CorrectionMatrix() = default;
  CorrectionMatrix(const PencilDifference &diff, CrossTerms cross, Complex shift);

  std::size_t block() const { return block_; }
  Complex shift() const { return shift_; }
  const std::array<Complex, 4> &shifted_stiffness_block() const { return shifted_dk_; }
  const std::array<Complex, 4> &mass_block() const { return dm_; }

  // y holds the first-plane values followed by the last-plane values (2 * block entries).
  void apply(std::span<const Complex> y, std::span<Complex> out,
             std::span<Complex> scratch) const;
  std::size_t scratch_size() const { return 6 * block_; }

private:
  std::array<Complex, 4> shifted_dk_{};
  std::array<Complex, 4> dm_{};
  CrossTerms cross_;
  Complex shift_ = 0.0;
  std::size_t block_ = 0;
};

CorrectionMatrix build_correction(const PencilDifference &diff, CrossTerms cross, Complex shift);

// bcs[j] is the condition on both faces normal to x_j. x_1 may be Absorbing or Neumann; all
// other directions must be Neumann.
KroneckerOperator build_operator_A(const Grid &grid, double omega,
                                   std::span<const BoundaryKind> bcs);

// Same layout with the x_1 pencil made periodic; x_1 factors are real.
KroneckerOperator build_operator_B(const Grid &grid, double omega);

// Shift-parameterized forms used by the generic solvers: x_1 pencil given explicitly and
// the zeroth-order coefficient s in place of omega^2.
KroneckerOperator build_shifted_operator(const Pencil1D &x1, std::span<const Pencil1D> trailing,
                                         Complex shift);

// Pencils of the standard Helmholtz layout: x_1 with bc_x1, remaining directions Neumann.
std::vector<Pencil1D> problem_pencils(const Grid &grid, double omega, BoundaryKind bc_x1);

} // namespace helmfft
