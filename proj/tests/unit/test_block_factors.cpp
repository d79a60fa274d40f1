#include <gtest/gtest.h>

#include "helmfft/assembly.hpp"
#include "helmfft/block_factors.hpp"
#include "helmfft/oracle.hpp"
#include "helmfft/spectral.hpp"
#include "support.hpp"

using namespace helmfft;

TEST(BlockFactors, EntriesAreShiftedPencil)
{
  const auto p = assemble_pencil(5, 0.25, 0.0, BoundaryKind::Neumann);
  const std::vector<Complex> lambdas{1.0, Complex(2.0, 3.0)};
  const Complex shift(0.5, -1.0);
  const BlockFactors f(lambdas, shift, p.mass, p.stiffness);
  EXPECT_EQ(f.count(), 2);
  EXPECT_EQ(f.block_size(), 5);
  for (int l = 0; l < 2; ++l)
  {
    for (int i = 0; i < 5; ++i)
    {
      EXPECT_EQ(f.diag(l, i), (lambdas[l] - shift) * p.mass(i, i) + p.stiffness(i, i));
    }
    for (int i = 0; i < 4; ++i)
    {
      EXPECT_EQ(f.off(l, i), (lambdas[l] - shift) * p.mass(i, i + 1) + p.stiffness(i, i + 1));
    }
  }
}

TEST(BlockFactors, SolveMatchesDenseLu)
{
  const int m = 7;
  const auto p = assemble_pencil(m, 1.0 / 6, 2.0, BoundaryKind::Absorbing);
  const std::vector<Complex> lambdas{Complex(-3.0, 1.0), 10.0, Complex(40.0, -5.0)};
  const Complex shift = 20.0;
  const BlockFactors f(lambdas, shift, p.mass, p.stiffness);
  auto x = test::random_vector(3 * m, 21);
  const auto rhs = x;
  f.solve(x);
  for (int l = 0; l < 3; ++l)
  {
    const auto block = test::to_dense(p.stiffness) +
                       (lambdas[l] - shift) * test::to_dense(p.mass);
    const auto sol = oracle::dense_solve(block, std::span(rhs).subspan(l * m, m));
    EXPECT_LT(test::rel_error(std::span(x).subspan(l * m, m), sol.u), 1e-13);
  }
}

TEST(BlockFactors, CoerciveShiftHasHealthyPivots)
{
  const auto p = assemble_pencil(33, 1.0 / 32, 0.0, BoundaryKind::Neumann);
  const auto mu = neumann_eigenvalues(33, 1.0 / 32);
  const std::vector<Complex> lambdas(mu.begin(), mu.end());
  EXPECT_NO_THROW(BlockFactors(lambdas, -1.0, p.mass, p.stiffness));
}

TEST(BlockFactors, SingularBlockReportsIndex)
{
  const auto p = assemble_pencil(9, 0.125, 0.0, BoundaryKind::Neumann);
  // lambda - shift = 0 leaves the singular Neumann stiffness.
  const std::vector<Complex> lambdas{5.0, 5.0, 3.0, 5.0};
  try
  {
    BlockFactors(lambdas, 3.0, p.mass, p.stiffness);
    FAIL() << "expected SingularBlock";
  }
  catch (const SingularBlock &e)
  {
    EXPECT_EQ(e.block(), 2);
  }
}

TEST(BlockFactors, RejectsWrappedMatrices)
{
  const auto p = assemble_periodic_pencil(5, 0.25);
  const std::vector<Complex> lambdas{1.0};
  EXPECT_THROW(BlockFactors(lambdas, 0.0, p.mass, p.stiffness), DimensionError);
}
