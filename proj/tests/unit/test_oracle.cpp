#include <gtest/gtest.h>

#include <array>

#include "helmfft/assembly.hpp"
#include "helmfft/oracle.hpp"
#include "helmfft/solver2d.hpp"
#include "support.hpp"

using namespace helmfft;
using namespace helmfft::oracle;
using test::kTwoPi;

TEST(DenseAlgebra, KronOfSmallMatrices)
{
  DenseMatrix a(2, 2), b(2, 1);
  a(0, 0) = 1.0;
  a(0, 1) = 2.0;
  a(1, 0) = 3.0;
  a(1, 1) = 4.0;
  b(0, 0) = 5.0;
  b(1, 0) = Complex(0.0, 1.0);
  const auto k = kron(a, b);
  ASSERT_EQ(k.rows, 4);
  ASSERT_EQ(k.cols, 2);
  EXPECT_EQ(k(0, 1), Complex(10.0));
  EXPECT_EQ(k(3, 0), Complex(0.0, 3.0));
  EXPECT_EQ(k(1, 1), Complex(0.0, 2.0));
}

TEST(DenseAlgebra, IdentityAndTranspose)
{
  const auto i3 = identity(3);
  const auto x = test::random_vector(3, 51);
  EXPECT_EQ(i3.multiply(x), x);
  DenseMatrix a(2, 3);
  a(0, 2) = 7.0;
  const auto t = a.transpose();
  EXPECT_EQ(t.rows, 3);
  EXPECT_EQ(t(2, 0), Complex(7.0));
  EXPECT_THROW(a + t, DimensionError);
  EXPECT_THROW(a * a, DimensionError);
}

TEST(DenseOperator, RespectsSizeCap)
{
  EXPECT_THROW(dense_operator(Grid({200, 200}), 1.0, Which::A), SizeLimit);
  EXPECT_THROW(dense_operator(Grid({5}), 1.0, Which::A), DimensionError);
}

TEST(DenseSolve, ZeroRhs)
{
  const auto p = assemble_dense_problem(Grid({5, 4}), kTwoPi);
  const auto sol = dense_solve(p, Which::A, FieldVector(20, 0.0));
  EXPECT_EQ(test::max_abs(sol.u), 0.0);
}

TEST(DenseSolve, ReproducedByKronApply)
{
  const Grid g({3, 3});
  const auto p = assemble_dense_problem(g, kTwoPi);
  const auto f = test::random_vector(g.size(), 52);
  const auto sol = dense_solve(p, Which::A, f);
  const std::array bcs{BoundaryKind::Absorbing, BoundaryKind::Neumann};
  const auto au = kron_apply(build_operator_A(g, kTwoPi, bcs), sol.u);
  EXPECT_LT(test::rel_error(au, f), 1e-12);
  EXPECT_LT(sol.residual, 1e-12);
}

TEST(DenseSolve, PureNeumannStaticIsSingular)
{
  const auto p = assemble_dense_problem(Grid({4, 4}), 0.0, BoundaryKind::Neumann);
  EXPECT_THROW(DenseLU{p.a}, SingularBlock);
}

TEST(DenseSolve, WellPosedHasHealthyRcond)
{
  const auto p = assemble_dense_problem(Grid({5, 5}), kTwoPi);
  EXPECT_GT(DenseLU(p.a).rcond(), 1e-6);
}

TEST(PartialSolution, AgreesWithFastStepOne)
{
  const Grid g({5, 4});
  const auto plan = plan2d(g, kTwoPi);
  const auto f = test::random_vector(g.size(), 53);
  const auto b = dense_operator(g, kTwoPi, Which::B, BoundaryKind::Absorbing, std::nullopt,
                                plan.auxiliary_kind());
  const auto dense = restrict_to_x1_boundary(g, dense_solve(b, f).u);
  EXPECT_LT(test::rel_error(solve_aux_partial(plan, f).first.values, dense), 1e-11);
}

TEST(PartialSolution, ReflectionSymmetry)
{
  const Grid g({7, 5});
  const auto p = assemble_dense_problem(g, kTwoPi);
  FieldVector f(g.size());
  for (int i = 0; i < 7; ++i)
  {
    for (int j = 0; j < 5; ++j)
    {
      const int mirror = std::min(i, 6 - i);
      f[i * 5 + j] = Complex(1.0 + mirror, 0.5 * j);
    }
  }
  const auto b = dense_partial_solution(p, Which::A, f);
  for (int j = 0; j < 5; ++j)
  {
    EXPECT_NEAR(std::abs(b[j] - b[5 + j]), 0.0, 1e-12);
  }
}

TEST(PartialSolution, InteriorSourceReachesBoundary)
{
  const Grid g({7, 5});
  const auto p = assemble_dense_problem(g, kTwoPi);
  FieldVector f(g.size(), 0.0);
  for (int j = 0; j < 5; ++j)
  {
    f[3 * 5 + j] = 1.0;
  }
  const auto b = dense_partial_solution(p, Which::A, f);
  for (auto v : b)
  {
    EXPECT_GT(std::abs(v), 1e-6);
  }
}

TEST(DenseEigen, CirculantMatchesClosedForm)
{
  const int n = 8;
  const double h = 1.0 / 7;
  const auto e = dense_eigensolve_pencil(stiffness_1d(n, h, 0.0, BoundaryKind::Periodic),
                                         mass_1d(n, h, BoundaryKind::Periodic));
  std::vector<Complex> closed;
  for (int l = 0; l < n; ++l)
  {
    const double c = std::cos(2 * 3.141592653589793 * l / n);
    closed.emplace_back(6.0 * (2 - 2 * c) / ((4 + 2 * c) * h * h));
  }
  for (auto lam : e.lambdas)
  {
    double best = 1e300;
    for (auto c : closed)
    {
      best = std::min(best, std::abs(lam - c));
    }
    EXPECT_LT(best, 1e-10 * std::max(1.0, std::abs(lam)));
  }
}

TEST(DenseEigen, NeumannContainsZero)
{
  const auto e = dense_eigensolve_pencil(stiffness_1d(6, 0.2, 0.0, BoundaryKind::Neumann),
                                         mass_1d(6, 0.2, BoundaryKind::Neumann));
  double smallest = 1e300;
  for (auto l : e.lambdas)
  {
    smallest = std::min(smallest, std::abs(l));
  }
  EXPECT_LT(smallest, 1e-10);
}

TEST(DenseEigen, AbsorbingVectorsAreMassOrthogonal)
{
  const int n = 8;
  const double h = 1.0 / 7;
  const auto k = stiffness_1d(n, h, kTwoPi, BoundaryKind::Absorbing);
  const auto m = mass_1d(n, h, BoundaryKind::Absorbing);
  const auto e = dense_eigensolve_pencil(k, m);
  const auto vmv = e.vectors.transpose() * m * e.vectors;
  for (int i = 0; i < n; ++i)
  {
    EXPECT_GT(std::abs(vmv(i, i)), 1e-8);
    for (int j = 0; j < n; ++j)
    {
      if (i != j)
      {
        EXPECT_LT(std::abs(vmv(i, j)), 1e-10 * std::abs(vmv(i, i)));
      }
    }
  }
  EXPECT_THROW(dense_eigensolve_pencil(identity(513), identity(513)), SizeLimit);
}
