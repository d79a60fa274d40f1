#pragma once

// The three-step partial-solution kernel shared by the 2D solver and the inner solves of
// the 3D solver. A system A u = f whose x_1 factor carries the original pencil is solved
// through an auxiliary system B with a periodic x_1 pencil:
//
//   1. v_b = (B^{-1} f)|b, computed through the transformed block system H_B
//   2. w_b = (A^{-1} C_bb v_b)|b, computed through H_A with boundary-restricted products
//   3. u = B^{-1} (f + pad(C_bb (v_b + w_b)))
//
// The block solvers are callables acting in place on a spectral vector of length n * block.

#include <algorithm>
#include <span>

#include "helmfft/assembly.hpp"
#include "helmfft/spectral.hpp"

namespace helmfft::detail
{

struct ThreeStepBases
{
  const EigenBasis &original;  // numeric basis of the x_1 pencil of A
  const EigenBasis &auxiliary; // circulant basis of the x_1 pencil of B
  const LineTransformPlan &transform;
  const CorrectionMatrix &correction;
};

// Boundary-plane buffers plus correction scratch; 4 * 2 * block + 6 * block entries.
struct BoundaryScratch
{
  std::span<Complex> v_b;
  std::span<Complex> w_b;
  std::span<Complex> sum;
  std::span<Complex> corrected;
  std::span<Complex> correction_work;

  static std::size_t size(std::size_t block) { return 14 * block; }

  static BoundaryScratch carve(std::span<Complex> buffer, std::size_t block)
  {
    return {buffer.subspan(0, 2 * block), buffer.subspan(2 * block, 2 * block),
            buffer.subspan(4 * block, 2 * block), buffer.subspan(6 * block, 2 * block),
            buffer.subspan(8 * block, 6 * block)};
  }
};

// f_hat <- scaled forward transform of f; spectral <- H_B^{-1} f_hat; v_b <- rows {1, n} of S_B.
template <class SolveB>
void aux_partial_step(const ThreeStepBases &ops, const SolveB &solve_b, std::span<const Complex> f,
                      std::span<Complex> f_hat, std::span<Complex> spectral,
                      std::span<Complex> v_b)
{
  std::copy(f.begin(), f.end(), f_hat.begin());
  ops.transform.forward(f_hat, ops.auxiliary.scales());
  std::copy(f_hat.begin(), f_hat.end(), spectral.begin());
  solve_b(spectral);
  boundary_restricted_product(ops.auxiliary, spectral, v_b, ProductDirection::Forward,
                              ops.transform.block());
}

// w_b <- rows {1, n} of V H_A^{-1} V^T pad(C_bb v_b). spectral is overwritten.
template <class SolveA>
void correction_step(const ThreeStepBases &ops, const SolveA &solve_a,
                     std::span<const Complex> v_b, std::span<Complex> spectral,
                     std::span<Complex> w_b, std::span<Complex> corrected,
                     std::span<Complex> correction_work)
{
  ops.correction.apply(v_b, corrected, correction_work);
  boundary_restricted_product(ops.original, corrected, spectral, ProductDirection::Adjoint,
                              ops.transform.block());
  solve_a(spectral);
  boundary_restricted_product(ops.original, spectral, w_b, ProductDirection::Forward,
                              ops.transform.block());
}

// u <- S_B H_B^{-1} (f_hat + T_B pad(C_bb (v_b + w_b))).
template <class SolveB>
void final_step(const ThreeStepBases &ops, const SolveB &solve_b, std::span<const Complex> f_hat,
                std::span<const Complex> v_b, std::span<const Complex> w_b, std::span<Complex> u,
                std::span<Complex> sum, std::span<Complex> corrected,
                std::span<Complex> correction_work)
{
  for (std::size_t k = 0; k < sum.size(); ++k)
  {
    sum[k] = v_b[k] + w_b[k];
  }
  ops.correction.apply(sum, corrected, correction_work);
  boundary_restricted_product(ops.auxiliary, corrected, u, ProductDirection::Adjoint,
                              ops.transform.block());
  for (std::size_t k = 0; k < u.size(); ++k)
  {
    u[k] += f_hat[k];
  }
  solve_b(u);
  ops.transform.inverse(u, ops.auxiliary.scales());
}

// Full solve. u may alias f; f_hat must not alias either.
template <class SolveA, class SolveB>
void three_step_solve(const ThreeStepBases &ops, const SolveA &solve_a, const SolveB &solve_b,
                      std::span<const Complex> f, std::span<Complex> u,
                      std::span<Complex> f_hat, const BoundaryScratch &bs)
{
  aux_partial_step(ops, solve_b, f, f_hat, u, bs.v_b);
  correction_step(ops, solve_a, bs.v_b, u, bs.w_b, bs.corrected, bs.correction_work);
  final_step(ops, solve_b, f_hat, bs.v_b, bs.w_b, u, bs.sum, bs.corrected, bs.correction_work);
}

// Refines u against op using the direct solve as preconditioner. work holds 3 * N entries;
// solve(x) must overwrite x with A^{-1} x.
template <class Solve>
SolveReport refine(const KroneckerOperator &op, const RefinementPolicy &policy,
                   const Solve &solve, std::span<const Complex> f, std::span<Complex> u,
                   std::span<Complex> work)
{
  const std::size_t n = u.size();
  std::span<Complex> r = work.subspan(0, n);
  std::span<Complex> scratch = work.subspan(n, 2 * n);
  SolveReport report;
  report.residual = residual_into(op, u, f, r, scratch);
  while (report.residual > policy.target && report.refinements < policy.max_steps)
  {
    solve(r);
    for (std::size_t i = 0; i < n; ++i)
    {
      u[i] += r[i];
    }
    ++report.refinements;
    const double previous = report.residual;
    report.residual = residual_into(op, u, f, r, scratch);
    if (report.residual > 0.5 * previous)
    {
      break;
    }
  }
  return report;
}

} // namespace helmfft::detail
