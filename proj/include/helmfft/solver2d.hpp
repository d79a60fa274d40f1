#pragma once

// Fast direct solver for the 2D shifted separable system
//
//   A = (K_1 - s M_1) ⊗ M_2 + M_1 ⊗ K_2,
//
// K_1 carrying absorbing (or Neumann) x_1 faces and K_2 Neumann faces. With s = omega^2 this
// is the Helmholtz operator; other shifts serve the inner blocks of the 3D solver.
// Cost per solve is O(N log N), dominated by two batched FFTs along x_1.

#include <optional>
#include <span>

#include "helmfft/assembly.hpp"
#include "helmfft/block_factors.hpp"
#include "helmfft/spectral.hpp"

namespace helmfft
{

struct PartialSolution
{
  std::vector<Complex> values; // first x_1 plane, then last x_1 plane; 2 * n_2 entries
};

class SolverPlan2D
{
public:
  // SingularBlock if a transformed block is singular. The auxiliary x_1 pencil is periodic
  // unless that makes B nearly singular (see choose_auxiliary); pass one to override.
  SolverPlan2D(const Grid &grid, Complex shift, BoundaryKind bc_x1, double omega,
               std::optional<BoundaryKind> auxiliary = std::nullopt);

  const Grid &grid() const { return grid_; }
  Complex shift() const { return shift_; }
  double omega() const { return omega_; }
  const Pencil1D &x1_pencil() const { return x1_; }
  const Pencil1D &x1_periodic_pencil() const { return x1_aux_; }
  BoundaryKind auxiliary_kind() const { return x1_aux_.bc; }
  const Pencil1D &x2_pencil() const { return x2_; }
  const EigenBasis &basis_a() const { return basis_a_; }
  const EigenBasis &basis_b() const { return basis_b_; }
  const CorrectionMatrix &correction() const { return correction_; }
  const BlockFactors &factors_a() const { return factors_a_; }
  const BlockFactors &factors_b() const { return factors_b_; }
  const LineTransformPlan &transform() const { return transform_; }

  // The operator this plan inverts, for matrix-free residuals.
  const KroneckerOperator &operator_a() const { return op_a_; }
  KroneckerOperator operator_b() const;

  const RefinementPolicy &refinement() const { return refinement_; }
  void set_refinement(RefinementPolicy policy) { refinement_ = policy; }

  // Caller-owned scratch for solve(); one per concurrent call.
  std::size_t workspace_size() const;

private:
  Grid grid_;
  Complex shift_;
  double omega_;
  Pencil1D x1_, x1_aux_, x2_;
  EigenBasis basis_a_, basis_b_;
  CorrectionMatrix correction_;
  BlockFactors factors_a_, factors_b_;
  LineTransformPlan transform_;
  KroneckerOperator op_a_;
  RefinementPolicy refinement_;
};

// Helmholtz problem with absorbing x_1 faces and shift omega^2.
SolverPlan2D plan2d(const Grid &grid, double omega);

// General shift; omega only enters the absorbing boundary entries of K_1.
SolverPlan2D plan2d(const Grid &grid, Complex shift, BoundaryKind bc_x1, double omega = 0.0,
                    std::optional<BoundaryKind> auxiliary = std::nullopt);

// Step 1: v_b = (B^{-1} f)|b and the scaled transform f_hat (kept for step 3).
std::pair<PartialSolution, FieldVector> solve_aux_partial(const SolverPlan2D &plan,
                                                          std::span<const Complex> f);

// Step 2: w_b = (A^{-1} (B - A) v)|b.
PartialSolution solve_correction(const SolverPlan2D &plan, const PartialSolution &v_b);

// Step 3: u from B u = f + (B - A)(v + w).
FieldVector solve_final(const SolverPlan2D &plan, std::span<const Complex> f_hat,
                        const PartialSolution &v_b, const PartialSolution &w_b);

FieldVector solve2d(const SolverPlan2D &plan, std::span<const Complex> f);

// Three-step solve followed by refinement per plan.refinement(). u must not alias f.
// workspace.size() >= plan.workspace_size().
SolveReport solve2d(const SolverPlan2D &plan, std::span<const Complex> f, std::span<Complex> u,
                    std::span<Complex> workspace);

} // namespace helmfft
