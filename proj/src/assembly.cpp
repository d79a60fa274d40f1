#include "helmfft/assembly.hpp"

#include <algorithm>

namespace helmfft
{

namespace
{

constexpr Complex kI(0.0, 1.0);

void check_size(int n)
{
  if (n < 3)
  {
    throw DimensionError("1D pencil needs n >= 3, got " + std::to_string(n));
  }
}

} // namespace

Pencil1D assemble_pencil(int n, double h, double omega, BoundaryKind bc)
{
  check_size(n);
  if (!(h > 0.0))
  {
    throw DimensionError("mesh size must be positive");
  }
  if (is_circulant(bc))
  {
    return assemble_auxiliary_pencil(n, h, bc);
  }
  std::vector<Complex> kd(n, 2.0 / h), ko(n - 1, -1.0 / h);
  std::vector<Complex> md(n, 4.0 * h / 6.0), mo(n - 1, h / 6.0);
  const Complex k_end = (bc == BoundaryKind::Absorbing) ? (1.0 - kI * omega * h) / h
                                                        : Complex(1.0 / h);
  kd.front() = kd.back() = k_end;
  md.front() = md.back() = 2.0 * h / 6.0;
  return {TriCornerMatrix(std::move(kd), std::move(ko)),
          TriCornerMatrix(std::move(md), std::move(mo)), bc, n, h};
}

Pencil1D assemble_periodic_pencil(int n, double h)
{
  return assemble_auxiliary_pencil(n, h, BoundaryKind::Periodic);
}

Pencil1D assemble_auxiliary_pencil(int n, double h, BoundaryKind kind)
{
  check_size(n);
  if (!(h > 0.0))
  {
    throw DimensionError("mesh size must be positive");
  }
  if (!is_circulant(kind))
  {
    throw DimensionError("auxiliary pencil must be periodic or skew-periodic");
  }
  const double wrap = (kind == BoundaryKind::Periodic) ? 1.0 : -1.0;
  std::vector<Complex> kd(n, 2.0 / h), ko(n - 1, -1.0 / h);
  std::vector<Complex> md(n, 4.0 * h / 6.0), mo(n - 1, h / 6.0);
  return {TriCornerMatrix(std::move(kd), std::move(ko), -wrap / h),
          TriCornerMatrix(std::move(md), std::move(mo), wrap * h / 6.0), kind, n, h};
}

PencilDifference pencil_difference(const Pencil1D &periodic, const Pencil1D &original)
{
  if (!is_circulant(periodic.bc) || is_circulant(original.bc))
  {
    throw DimensionError("pencil difference needs an auxiliary and a non-periodic pencil");
  }
  if (periodic.n != original.n)
  {
    throw DimensionError("pencil difference: size mismatch");
  }
  const int last = original.n - 1;
  const TriCornerMatrix dk = periodic.stiffness - original.stiffness;
  const TriCornerMatrix dm = periodic.mass - original.mass;
  PencilDifference diff;
  diff.n = original.n;
  diff.dk = {dk(0, 0), dk(0, last), dk(last, 0), dk(last, last)};
  diff.dm = {dm(0, 0), dm(0, last), dm(last, 0), dm(last, last)};
  return diff;
}

CrossTerms build_cross_terms(std::span<const Pencil1D> trailing)
{
  if (trailing.empty() || trailing.size() > 2)
  {
    throw DimensionError("cross terms need one or two trailing directions");
  }
  std::vector<int> shape;
  for (const auto &p : trailing)
  {
    shape.push_back(p.n);
  }
  CrossTerms cross{KroneckerOperator(shape), KroneckerOperator(shape)};
  if (trailing.size() == 1)
  {
    cross.mass.add_term(1.0, {trailing[0].mass});
    cross.stiffness.add_term(1.0, {trailing[0].stiffness});
  }
  else
  {
    cross.mass.add_term(1.0, {trailing[0].mass, trailing[1].mass});
    cross.stiffness.add_term(1.0, {trailing[0].stiffness, trailing[1].mass});
    cross.stiffness.add_term(1.0, {trailing[0].mass, trailing[1].stiffness});
  }
  return cross;
}

CorrectionMatrix::CorrectionMatrix(const PencilDifference &diff, CrossTerms cross,
                                   Complex shift)
  : dm_(diff.dm), cross_(std::move(cross)), shift_(shift)
{
  if (cross_.mass.size() != cross_.stiffness.size())
  {
    throw DimensionError("correction cross terms disagree in size");
  }
  for (int k = 0; k < 4; ++k)
  {
    shifted_dk_[k] = diff.dk[k] - shift * diff.dm[k];
  }
  block_ = cross_.mass.size();
}

void CorrectionMatrix::apply(std::span<const Complex> y, std::span<Complex> out,
                             std::span<Complex> scratch) const
{
  const std::size_t b = block_;
  if (y.size() != 2 * b || out.size() != 2 * b || scratch.size() < scratch_size())
  {
    throw DimensionError("correction apply: expected boundary data of length " +
                         std::to_string(2 * b));
  }
  std::span<Complex> mass_first = scratch.subspan(0, b);
  std::span<Complex> mass_last = scratch.subspan(b, b);
  std::span<Complex> stiff_first = scratch.subspan(2 * b, b);
  std::span<Complex> stiff_last = scratch.subspan(3 * b, b);
  std::span<Complex> work = scratch.subspan(4 * b, 2 * b);
  cross_.mass.apply(y.subspan(0, b), mass_first, work);
  cross_.mass.apply(y.subspan(b, b), mass_last, work);
  cross_.stiffness.apply(y.subspan(0, b), stiff_first, work);
  cross_.stiffness.apply(y.subspan(b, b), stiff_last, work);
  const auto &dk = shifted_dk_;
  for (std::size_t k = 0; k < b; ++k)
  {
    out[k] = dk[0] * mass_first[k] + dk[1] * mass_last[k] + dm_[0] * stiff_first[k] +
             dm_[1] * stiff_last[k];
    out[b + k] = dk[2] * mass_first[k] + dk[3] * mass_last[k] + dm_[2] * stiff_first[k] +
                 dm_[3] * stiff_last[k];
  }
}

CorrectionMatrix build_correction(const PencilDifference &diff, CrossTerms cross, Complex shift)
{
  return CorrectionMatrix(diff, std::move(cross), shift);
}

KroneckerOperator build_shifted_operator(const Pencil1D &x1, std::span<const Pencil1D> trailing,
                                         Complex shift)
{
  std::vector<int> shape{x1.n};
  for (const auto &p : trailing)
  {
    shape.push_back(p.n);
  }
  KroneckerOperator op(shape);
  if (trailing.size() == 1)
  {
    op.add_term(1.0, {x1.stiffness, trailing[0].mass});
    op.add_term(-shift, {x1.mass, trailing[0].mass});
    op.add_term(1.0, {x1.mass, trailing[0].stiffness});
  }
  else if (trailing.size() == 2)
  {
    op.add_term(1.0, {x1.stiffness, trailing[0].mass, trailing[1].mass});
    op.add_term(-shift, {x1.mass, trailing[0].mass, trailing[1].mass});
    op.add_term(1.0, {x1.mass, trailing[0].stiffness, trailing[1].mass});
    op.add_term(1.0, {x1.mass, trailing[0].mass, trailing[1].stiffness});
  }
  else
  {
    throw DimensionError("separable operator needs 2 or 3 directions");
  }
  return op;
}

std::vector<Pencil1D> problem_pencils(const Grid &grid, double omega, BoundaryKind bc_x1)
{
  std::vector<Pencil1D> pencils;
  pencils.push_back(assemble_pencil(grid.n(0), grid.h(0), omega, bc_x1));
  for (int j = 1; j < grid.dims(); ++j)
  {
    pencils.push_back(assemble_pencil(grid.n(j), grid.h(j), omega, BoundaryKind::Neumann));
  }
  return pencils;
}

KroneckerOperator build_operator_A(const Grid &grid, double omega,
                                   std::span<const BoundaryKind> bcs)
{
  if (grid.dims() < 2)
  {
    throw DimensionError("operator A needs a 2D or 3D grid");
  }
  if (static_cast<int>(bcs.size()) != grid.dims())
  {
    throw DimensionError("one boundary kind per direction required");
  }
  if (is_circulant(bcs[0]))
  {
    throw DimensionError("unsupported boundary layout: periodic x_1 faces are auxiliary only");
  }
  for (int j = 1; j < grid.dims(); ++j)
  {
    if (bcs[j] != BoundaryKind::Neumann)
    {
      throw DimensionError(std::string("unsupported boundary layout: ") + to_string(bcs[j]) +
                           " on direction " + std::to_string(j + 1) +
                           " (absorbing faces are supported on x_1 only)");
    }
  }
  const auto pencils = problem_pencils(grid, omega, bcs[0]);
  return build_shifted_operator(pencils[0], std::span(pencils).subspan(1), omega * omega);
}

KroneckerOperator build_operator_B(const Grid &grid, double omega)
{
  if (grid.dims() < 2)
  {
    throw DimensionError("operator B needs a 2D or 3D grid");
  }
  auto pencils = problem_pencils(grid, omega, BoundaryKind::Neumann);
  pencils[0] = assemble_periodic_pencil(grid.n(0), grid.h(0));
  return build_shifted_operator(pencils[0], std::span(pencils).subspan(1), omega * omega);
}

} // namespace helmfft
