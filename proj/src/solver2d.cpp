#include "helmfft/solver2d.hpp"

#include "helmfft/three_step.hpp"

namespace helmfft
{

namespace
{

const Grid &require_2d(const Grid &grid)
{
  if (grid.dims() != 2)
  {
    throw DimensionError("2D solver needs a 2D grid, got " + std::to_string(grid.dims()) + "D");
  }
  return grid;
}

Pencil1D x1_pencil_for(const Grid &grid, BoundaryKind bc, double omega)
{
  if (is_circulant(bc))
  {
    throw DimensionError("x_1 faces must be absorbing or Neumann");
  }
  return assemble_pencil(grid.n(0), grid.h(0), omega, bc);
}

} // namespace

SolverPlan2D::SolverPlan2D(const Grid &grid, Complex shift, BoundaryKind bc_x1, double omega,
                           std::optional<BoundaryKind> auxiliary)
  : grid_(require_2d(grid)),
    shift_(shift),
    omega_(omega),
    x1_(x1_pencil_for(grid, bc_x1, omega)),
    x1_aux_(assemble_auxiliary_pencil(
        grid.n(0), grid.h(0),
        auxiliary ? *auxiliary
                  : choose_auxiliary(grid.n(0), grid.h(0), shift,
                                     neumann_eigenvalues(grid.n(1), grid.h(1))))),
    x2_(assemble_pencil(grid.n(1), grid.h(1), omega, BoundaryKind::Neumann)),
    basis_a_(solve_pencil_eigen(x1_)),
    basis_b_(circulant_basis(x1_aux_)),
    correction_(build_correction(pencil_difference(x1_aux_, x1_),
                                 build_cross_terms(std::span(&x2_, 1)), shift)),
    factors_a_(basis_a_.lambdas(), shift, x2_.mass, x2_.stiffness),
    factors_b_(basis_b_.lambdas(), shift, x2_.mass, x2_.stiffness),
    transform_(grid.n(0), static_cast<std::size_t>(grid.n(1)),
               x1_aux_.bc == BoundaryKind::SkewPeriodic),
    op_a_(build_shifted_operator(x1_, std::span(&x2_, 1), shift))
{
}

KroneckerOperator SolverPlan2D::operator_b() const
{
  return build_shifted_operator(x1_aux_, std::span(&x2_, 1), shift_);
}

std::size_t SolverPlan2D::workspace_size() const
{
  // f_hat, boundary scratch, then residual and operator scratch for refinement.
  return 4 * grid_.size() + detail::BoundaryScratch::size(static_cast<std::size_t>(grid_.n(1)));
}

SolverPlan2D plan2d(const Grid &grid, double omega)
{
  return SolverPlan2D(grid, omega * omega, BoundaryKind::Absorbing, omega);
}

SolverPlan2D plan2d(const Grid &grid, Complex shift, BoundaryKind bc_x1, double omega,
                    std::optional<BoundaryKind> auxiliary)
{
  return SolverPlan2D(grid, shift, bc_x1, omega, auxiliary);
}

namespace
{

detail::ThreeStepBases bases_of(const SolverPlan2D &plan)
{
  return {plan.basis_a(), plan.basis_b(), plan.transform(), plan.correction()};
}

void check_length(const SolverPlan2D &plan, std::size_t len, const char *what)
{
  if (len != plan.grid().size())
  {
    throw DimensionError(std::string(what) + ": length " + std::to_string(len) +
                         ", expected N = " + std::to_string(plan.grid().size()));
  }
}

void check_boundary(const SolverPlan2D &plan, const PartialSolution &p)
{
  if (p.values.size() != 2 * static_cast<std::size_t>(plan.grid().n(1)))
  {
    throw DimensionError("partial solution has " + std::to_string(p.values.size()) +
                         " entries, expected 2 * n_2");
  }
}

} // namespace

std::pair<PartialSolution, FieldVector> solve_aux_partial(const SolverPlan2D &plan,
                                                          std::span<const Complex> f)
{
  check_length(plan, f.size(), "solve_aux_partial");
  const auto ops = bases_of(plan);
  FieldVector f_hat(f.size()), spectral(f.size());
  PartialSolution v_b{std::vector<Complex>(2 * static_cast<std::size_t>(plan.grid().n(1)))};
  detail::aux_partial_step(
      ops, [&](std::span<Complex> x) { plan.factors_b().solve(x); }, f, f_hat, spectral,
      v_b.values);
  return {std::move(v_b), std::move(f_hat)};
}

PartialSolution solve_correction(const SolverPlan2D &plan, const PartialSolution &v_b)
{
  check_boundary(plan, v_b);
  const auto ops = bases_of(plan);
  const std::size_t block = static_cast<std::size_t>(plan.grid().n(1));
  FieldVector spectral(plan.grid().size());
  std::vector<Complex> corrected(2 * block), work(plan.correction().scratch_size());
  PartialSolution w_b{std::vector<Complex>(2 * block)};
  detail::correction_step(
      ops, [&](std::span<Complex> x) { plan.factors_a().solve(x); }, v_b.values, spectral,
      w_b.values, corrected, work);
  return w_b;
}

FieldVector solve_final(const SolverPlan2D &plan, std::span<const Complex> f_hat,
                        const PartialSolution &v_b, const PartialSolution &w_b)
{
  check_length(plan, f_hat.size(), "solve_final");
  check_boundary(plan, v_b);
  check_boundary(plan, w_b);
  const auto ops = bases_of(plan);
  const std::size_t block = static_cast<std::size_t>(plan.grid().n(1));
  FieldVector u(plan.grid().size());
  std::vector<Complex> sum(2 * block), corrected(2 * block),
      work(plan.correction().scratch_size());
  detail::final_step(
      ops, [&](std::span<Complex> x) { plan.factors_b().solve(x); }, f_hat, v_b.values,
      w_b.values, u, sum, corrected, work);
  return u;
}

SolveReport solve2d(const SolverPlan2D &plan, std::span<const Complex> f, std::span<Complex> u,
                    std::span<Complex> workspace)
{
  check_length(plan, f.size(), "solve2d");
  check_length(plan, u.size(), "solve2d");
  if (workspace.size() < plan.workspace_size())
  {
    throw DimensionError("solve2d: workspace too small");
  }
  const std::size_t n = plan.grid().size();
  const std::size_t block = static_cast<std::size_t>(plan.grid().n(1));
  const auto f_hat = workspace.subspan(0, n);
  const auto bs = detail::BoundaryScratch::carve(workspace.subspan(n), block);
  const auto refine_work = workspace.subspan(n + detail::BoundaryScratch::size(block), 3 * n);
  const auto solve = [&](std::span<const Complex> rhs, std::span<Complex> x) {
    detail::three_step_solve(
        bases_of(plan), [&](std::span<Complex> y) { plan.factors_a().solve(y); },
        [&](std::span<Complex> y) { plan.factors_b().solve(y); }, rhs, x, f_hat, bs);
  };
  solve(f, u);
  return detail::refine(plan.operator_a(), plan.refinement(),
                        [&](std::span<Complex> r) { solve(r, r); }, f, u, refine_work);
}

FieldVector solve2d(const SolverPlan2D &plan, std::span<const Complex> f)
{
  FieldVector u(f.size());
  FieldVector workspace(plan.workspace_size());
  solve2d(plan, f, u, workspace);
  return u;
}

} // namespace helmfft
