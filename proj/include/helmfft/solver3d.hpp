#pragma once

// Fast direct solver for the 3D Helmholtz system
//
//   A = (K_1 - w^2 M_1) ⊗ M_2 ⊗ M_3 + M_1 ⊗ (K_2 ⊗ M_3 + M_2 ⊗ K_3)
//
// with absorbing x_1 faces. After diagonalizing x_1, each block l of H_A / H_B is a 2D
// Neumann problem in (x_2, x_3) with shift p = w^2 - Lambda_{1,l}; those are solved by the
// same three-step kernel as the 2D solver, with a periodic (or, near resonance,
// skew-periodic) auxiliary pencil in x_2 chosen per block.
// Inner tridiagonal factorizations are rebuilt per block during each solve, so the plan
// stays O(n_1^2 + n_2^2 + n_3) in memory.

#include <array>
#include <optional>
#include <span>

#include "helmfft/assembly.hpp"
#include "helmfft/spectral.hpp"

namespace helmfft
{

enum class BlockSystem
{
  HA,
  HB
};

class SolverPlan3D
{
public:
  SolverPlan3D(const Grid &grid, double omega,
               std::optional<BoundaryKind> auxiliary = std::nullopt);

  const Grid &grid() const { return grid_; }
  double omega() const { return omega_; }

  const Pencil1D &x1_pencil() const { return x1_; }
  const Pencil1D &x1_periodic_pencil() const { return x1_aux_; }
  BoundaryKind auxiliary_kind() const { return x1_aux_.bc; }
  const Pencil1D &x2_pencil() const { return x2_; }
  const Pencil1D &x3_pencil() const { return x3_; }

  const EigenBasis &basis_a1() const { return basis_a1_; }
  const EigenBasis &basis_b1() const { return basis_b1_; }
  const EigenBasis &basis_a2() const { return basis_a2_; }

  // Inner auxiliary data in x_2, for kind Periodic or SkewPeriodic.
  const Pencil1D &x2_periodic_pencil(BoundaryKind kind = BoundaryKind::Periodic) const;
  const EigenBasis &basis_b2(BoundaryKind kind = BoundaryKind::Periodic) const;
  const PencilDifference &x2_difference(BoundaryKind kind = BoundaryKind::Periodic) const;
  const LineTransformPlan &inner_transform(BoundaryKind kind = BoundaryKind::Periodic) const;

  const CorrectionMatrix &correction() const { return correction_; }
  const LineTransformPlan &outer_transform() const { return outer_transform_; }

  // Shift of inner block l (0-based): w^2 - Lambda^X_{1,l}.
  Complex inner_shift(BlockSystem which, int l) const;

  // x_2 auxiliary used by inner block l.
  BoundaryKind inner_auxiliary(BlockSystem which, int l) const;

  const KroneckerOperator &operator_a() const { return op_a_; }
  KroneckerOperator operator_b() const;

  const RefinementPolicy &refinement() const { return refinement_; }
  void set_refinement(RefinementPolicy policy) { refinement_ = policy; }

  // Bytes held by the plan; independent of N.
  std::size_t footprint_bytes() const;

  // Scratch per concurrent solve3d call: outer f_hat, refinement residual and operator
  // scratch (4 N in total) plus one inner slab set per thread.
  std::size_t workspace_size(int threads = 1) const;
  std::size_t inner_scratch_size() const;

private:
  Grid grid_;
  double omega_;
  Pencil1D x1_, x1_aux_, x2_, x3_;
  std::array<Pencil1D, 2> x2_aux_; // periodic, skew-periodic
  EigenBasis basis_a1_, basis_b1_, basis_a2_;
  std::array<EigenBasis, 2> basis_b2_;
  CorrectionMatrix correction_;
  std::array<PencilDifference, 2> x2_diff_;
  LineTransformPlan outer_transform_;
  std::array<LineTransformPlan, 2> inner_transform_;
  std::vector<double> mu3_;
  KroneckerOperator op_a_;
  RefinementPolicy refinement_;
};

SolverPlan3D plan3d(const Grid &grid, double omega,
                    std::optional<BoundaryKind> auxiliary = std::nullopt);

// Solves H_X z = rhs in place, rhs already in x_1 spectral space. inner_scratch holds
// threads * plan.inner_scratch_size() entries.
void solve_block_system(const SolverPlan3D &plan, BlockSystem which, std::span<Complex> rhs,
                        std::span<Complex> inner_scratch);
FieldVector solve_block_system(const SolverPlan3D &plan, BlockSystem which,
                               std::span<const Complex> rhs);

FieldVector solve3d(const SolverPlan3D &plan, std::span<const Complex> f);

// u must not alias f. workspace.size() >= plan.workspace_size(threads) where threads is the
// OpenMP team size used for the block loop.
SolveReport solve3d(const SolverPlan3D &plan, std::span<const Complex> f, std::span<Complex> u,
                    std::span<Complex> workspace);

} // namespace helmfft
