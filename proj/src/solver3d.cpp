#include "helmfft/solver3d.hpp"

#include <algorithm>
#include <exception>

#include "helmfft/block_factors.hpp"
#include "helmfft/three_step.hpp"
#include "parallel.hpp"

namespace helmfft
{

namespace
{

const Grid &require_3d(const Grid &grid)
{
  if (grid.dims() != 3)
  {
    throw DimensionError("3D solver needs a 3D grid, got " + std::to_string(grid.dims()) + "D");
  }
  return grid;
}

std::size_t aux_slot(BoundaryKind kind)
{
  if (!is_circulant(kind))
  {
    throw DimensionError("auxiliary kind must be periodic or skew-periodic");
  }
  return kind == BoundaryKind::Periodic ? 0 : 1;
}

// Sorted spectrum of the Neumann operator on (x_2, x_3): all sums mu_2 + mu_3.
std::vector<double> trailing_spectrum(const Grid &grid)
{
  const auto mu2 = neumann_eigenvalues(grid.n(1), grid.h(1));
  const auto mu3 = neumann_eigenvalues(grid.n(2), grid.h(2));
  std::vector<double> mu;
  mu.reserve(mu2.size() * mu3.size());
  for (double a : mu2)
  {
    for (double b : mu3)
    {
      mu.push_back(a + b);
    }
  }
  std::sort(mu.begin(), mu.end());
  return mu;
}

} // namespace

SolverPlan3D::SolverPlan3D(const Grid &grid, double omega,
                           std::optional<BoundaryKind> auxiliary)
  : grid_(require_3d(grid)),
    omega_(omega),
    x1_(assemble_pencil(grid.n(0), grid.h(0), omega, BoundaryKind::Absorbing)),
    x1_aux_(assemble_auxiliary_pencil(
        grid.n(0), grid.h(0),
        auxiliary ? *auxiliary : choose_auxiliary(grid.n(0), grid.h(0), omega * omega,
                                                  trailing_spectrum(grid)))),
    x2_(assemble_pencil(grid.n(1), grid.h(1), omega, BoundaryKind::Neumann)),
    x3_(assemble_pencil(grid.n(2), grid.h(2), omega, BoundaryKind::Neumann)),
    x2_aux_{assemble_auxiliary_pencil(grid.n(1), grid.h(1), BoundaryKind::Periodic),
            assemble_auxiliary_pencil(grid.n(1), grid.h(1), BoundaryKind::SkewPeriodic)},
    basis_a1_(solve_pencil_eigen(x1_)),
    basis_b1_(circulant_basis(x1_aux_)),
    basis_a2_(solve_pencil_eigen(x2_)),
    basis_b2_{circulant_basis(x2_aux_[0]), circulant_basis(x2_aux_[1])},
    correction_(build_correction(pencil_difference(x1_aux_, x1_),
                                 build_cross_terms(std::vector<Pencil1D>{x2_, x3_}),
                                 omega * omega)),
    x2_diff_{pencil_difference(x2_aux_[0], x2_), pencil_difference(x2_aux_[1], x2_)},
    outer_transform_(grid.n(0), grid.stride(0), x1_aux_.bc == BoundaryKind::SkewPeriodic),
    inner_transform_{LineTransformPlan(grid.n(1), static_cast<std::size_t>(grid.n(2))),
                     LineTransformPlan(grid.n(1), static_cast<std::size_t>(grid.n(2)), true)},
    mu3_(neumann_eigenvalues(grid.n(2), grid.h(2))),
    op_a_(build_shifted_operator(x1_, std::vector<Pencil1D>{x2_, x3_}, omega * omega))
{
}

const Pencil1D &SolverPlan3D::x2_periodic_pencil(BoundaryKind kind) const
{
  return x2_aux_[aux_slot(kind)];
}

const EigenBasis &SolverPlan3D::basis_b2(BoundaryKind kind) const
{
  return basis_b2_[aux_slot(kind)];
}

const PencilDifference &SolverPlan3D::x2_difference(BoundaryKind kind) const
{
  return x2_diff_[aux_slot(kind)];
}

const LineTransformPlan &SolverPlan3D::inner_transform(BoundaryKind kind) const
{
  return inner_transform_[aux_slot(kind)];
}

BoundaryKind SolverPlan3D::inner_auxiliary(BlockSystem which, int l) const
{
  return choose_auxiliary(basis_b2_[0].lambdas(), basis_b2_[1].lambdas(), inner_shift(which, l),
                          mu3_);
}

Complex SolverPlan3D::inner_shift(BlockSystem which, int l) const
{
  const auto &lambdas = (which == BlockSystem::HA) ? basis_a1_.lambdas() : basis_b1_.lambdas();
  return omega_ * omega_ - lambdas.at(l);
}

KroneckerOperator SolverPlan3D::operator_b() const
{
  return build_shifted_operator(x1_aux_, std::vector<Pencil1D>{x2_, x3_}, omega_ * omega_);
}

std::size_t SolverPlan3D::footprint_bytes() const
{
  const auto n1 = static_cast<std::size_t>(grid_.n(0));
  const auto n2 = static_cast<std::size_t>(grid_.n(1));
  const auto n3 = static_cast<std::size_t>(grid_.n(2));
  // Dense numeric eigenvectors dominate; pencils, lambdas and scales are O(n_j).
  return sizeof(Complex) * (n1 * n1 + n2 * n2 + 8 * (n1 + n2 + n3));
}

std::size_t SolverPlan3D::inner_scratch_size() const
{
  const auto slab = grid_.stride(0);
  return slab + detail::BoundaryScratch::size(static_cast<std::size_t>(grid_.n(2)));
}

std::size_t SolverPlan3D::workspace_size(int threads) const
{
  return 4 * grid_.size() + static_cast<std::size_t>(threads) * inner_scratch_size();
}

SolverPlan3D plan3d(const Grid &grid, double omega, std::optional<BoundaryKind> auxiliary)
{
  return SolverPlan3D(grid, omega, auxiliary);
}

namespace
{

// H_X block l is the 2D problem (K_2 - p M_2) ⊗ M_3 + M_2 ⊗ K_3 with p = w^2 - Lambda^X_{1,l}.
void solve_inner_block(const SolverPlan3D &plan, Complex shift, BoundaryKind aux,
                       std::span<Complex> slab, std::span<Complex> scratch)
{
  const auto &m3 = plan.x3_pencil();
  const BlockFactors factors_a(plan.basis_a2().lambdas(), shift, m3.mass, m3.stiffness);
  const BlockFactors factors_b(plan.basis_b2(aux).lambdas(), shift, m3.mass, m3.stiffness);
  const CorrectionMatrix correction =
      build_correction(plan.x2_difference(aux), build_cross_terms(std::span(&m3, 1)), shift);
  const detail::ThreeStepBases ops{plan.basis_a2(), plan.basis_b2(aux), plan.inner_transform(aux),
                                   correction};
  const std::size_t n = slab.size();
  const auto bs = detail::BoundaryScratch::carve(scratch.subspan(n),
                                                 static_cast<std::size_t>(m3.n));
  // Inner block solves run serially; the outer block loop carries the parallelism.
  const auto serial = [](const BlockFactors &f) {
    return [&f](std::span<Complex> x) {
      const auto m = static_cast<std::size_t>(f.block_size());
      for (int k = 0; k < f.count(); ++k)
      {
        f.solve_block(k, x.data() + k * m);
      }
    };
  };
  detail::three_step_solve(ops, serial(factors_a), serial(factors_b), slab, slab,
                           scratch.subspan(0, n), bs);
}

} // namespace

void solve_block_system(const SolverPlan3D &plan, BlockSystem which, std::span<Complex> rhs,
                        std::span<Complex> inner_scratch)
{
  const Grid &g = plan.grid();
  if (rhs.size() != g.size())
  {
    throw DimensionError("block system: length " + std::to_string(rhs.size()) +
                         ", expected N = " + std::to_string(g.size()));
  }
  const int threads = detail::max_threads();
  const std::size_t per_thread = plan.inner_scratch_size();
  if (inner_scratch.size() < static_cast<std::size_t>(threads) * per_thread)
  {
    throw DimensionError("block system: inner scratch too small");
  }
  const std::size_t slab = g.stride(0);
  const int n1 = g.n(0);
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
  for (int l = 0; l < n1; ++l)
  {
    const auto scratch =
        inner_scratch.subspan(static_cast<std::size_t>(detail::thread_num()) * per_thread,
                              per_thread);
    try
    {
      solve_inner_block(plan, plan.inner_shift(which, l), plan.inner_auxiliary(which, l),
                        rhs.subspan(l * slab, slab), scratch);
    }
    catch (const SingularBlock &e)
    {
#pragma omp critical(helmfft_block_failure)
      if (!failure)
      {
        failure = std::make_exception_ptr(SingularBlock(
            std::string("outer block ") + std::to_string(l + 1) + " of " +
                (which == BlockSystem::HA ? "H_A" : "H_B") + ": " + e.what(),
            l));
      }
    }
    catch (...)
    {
#pragma omp critical(helmfft_block_failure)
      if (!failure)
      {
        failure = std::current_exception();
      }
    }
  }
  if (failure)
  {
    std::rethrow_exception(failure);
  }
}

FieldVector solve_block_system(const SolverPlan3D &plan, BlockSystem which,
                               std::span<const Complex> rhs)
{
  FieldVector z(rhs.begin(), rhs.end());
  FieldVector scratch(static_cast<std::size_t>(detail::max_threads()) *
                      plan.inner_scratch_size());
  solve_block_system(plan, which, z, scratch);
  return z;
}

SolveReport solve3d(const SolverPlan3D &plan, std::span<const Complex> f, std::span<Complex> u,
                    std::span<Complex> workspace)
{
  const std::size_t n = plan.grid().size();
  if (f.size() != n || u.size() != n)
  {
    throw DimensionError("solve3d: length mismatch, expected N = " + std::to_string(n));
  }
  const int threads = detail::max_threads();
  if (workspace.size() < plan.workspace_size(threads))
  {
    throw DimensionError("solve3d: workspace too small");
  }
  std::span<Complex> f_hat = workspace.subspan(0, n);
  std::span<Complex> refine_work = workspace.subspan(n, 3 * n);
  std::span<Complex> inner = workspace.subspan(4 * n);
  const std::size_t block = plan.grid().stride(0);
  std::vector<Complex> boundary(detail::BoundaryScratch::size(block));
  const auto bs = detail::BoundaryScratch::carve(boundary, block);
  const detail::ThreeStepBases ops{plan.basis_a1(), plan.basis_b1(), plan.outer_transform(),
                                   plan.correction()};
  const auto solve = [&](std::span<const Complex> rhs, std::span<Complex> x) {
    detail::three_step_solve(
        ops, [&](std::span<Complex> y) { solve_block_system(plan, BlockSystem::HA, y, inner); },
        [&](std::span<Complex> y) { solve_block_system(plan, BlockSystem::HB, y, inner); }, rhs,
        x, f_hat, bs);
  };
  solve(f, u);
  return detail::refine(plan.operator_a(), plan.refinement(),
                        [&](std::span<Complex> r) { solve(r, r); }, f, u, refine_work);
}

FieldVector solve3d(const SolverPlan3D &plan, std::span<const Complex> f)
{
  FieldVector u(f.size());
  FieldVector workspace(plan.workspace_size(detail::max_threads()));
  solve3d(plan, f, u, workspace);
  return u;
}

} // namespace helmfft
