#include <gtest/gtest.h>

#include <array>

#include "helmfft/assembly.hpp"
#include "helmfft/oracle.hpp"
#include "support.hpp"

using namespace helmfft;
using test::kTwoPi;

namespace
{

constexpr double kPi = 3.141592653589793;

void expect_entries(const TriCornerMatrix &t, const std::vector<std::vector<Complex>> &want,
                    double tol)
{
  for (int i = 0; i < t.size(); ++i)
  {
    for (int j = 0; j < t.size(); ++j)
    {
      EXPECT_NEAR(std::abs(t(i, j) - want[i][j]), 0.0, tol) << i << "," << j;
    }
  }
}

} // namespace

TEST(Pencil, NeumannThreePoints)
{
  const auto p = assemble_pencil(3, 0.5, 0.0, BoundaryKind::Neumann);
  expect_entries(p.stiffness, {{2, -2, 0}, {-2, 4, -2}, {0, -2, 2}}, 1e-15);
  expect_entries(p.mass,
                 {{1.0 / 6, 1.0 / 12, 0}, {1.0 / 12, 1.0 / 3, 1.0 / 12}, {0, 1.0 / 12, 1.0 / 6}},
                 1e-15);
}

TEST(Pencil, AbsorbingEndsCarryOmega)
{
  const auto p = assemble_pencil(3, 0.5, 2 * kPi, BoundaryKind::Absorbing);
  const Complex end(2.0, -2 * kPi);
  EXPECT_NEAR(std::abs(p.stiffness(0, 0) - end), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(p.stiffness(2, 2) - end), 0.0, 1e-14);
  const auto neumann = assemble_pencil(3, 0.5, 2 * kPi, BoundaryKind::Neumann);
  EXPECT_EQ(p.stiffness(1, 1), neumann.stiffness(1, 1));
  EXPECT_EQ(p.stiffness(0, 1), neumann.stiffness(0, 1));
  EXPECT_EQ(p.mass(0, 0), neumann.mass(0, 0));
}

TEST(Pencil, NeumannStiffnessRowsSumToZero)
{
  const auto p = assemble_pencil(4, 0.37, 0.0, BoundaryKind::Neumann);
  for (int i = 0; i < 4; ++i)
  {
    Complex s = 0.0;
    for (int j = 0; j < 4; ++j)
    {
      s += p.stiffness(i, j);
    }
    EXPECT_NEAR(std::abs(s), 0.0, 1e-13);
  }
}

TEST(Pencil, MatchesOracleElementFormulas)
{
  for (auto bc : {BoundaryKind::Absorbing, BoundaryKind::Neumann, BoundaryKind::Periodic,
                  BoundaryKind::SkewPeriodic})
  {
    const int n = 7;
    const double h = 1.0 / 6;
    const auto p = is_circulant(bc) ? assemble_auxiliary_pencil(n, h, bc)
                                    : assemble_pencil(n, h, 3.0, bc);
    EXPECT_LT(test::max_abs_diff(test::to_dense(p.stiffness), oracle::stiffness_1d(n, h, 3.0, bc)),
              1e-13)
        << to_string(bc);
    EXPECT_LT(test::max_abs_diff(test::to_dense(p.mass), oracle::mass_1d(n, h, bc)), 1e-15)
        << to_string(bc);
  }
}

TEST(PeriodicPencil, FourPointEntries)
{
  const auto p = assemble_periodic_pencil(4, 1.0 / 3);
  EXPECT_NEAR(p.stiffness(0, 0).real(), 6.0, 1e-14);
  EXPECT_NEAR(p.stiffness(0, 1).real(), -3.0, 1e-14);
  EXPECT_NEAR(p.stiffness(0, 3).real(), -3.0, 1e-14);
  EXPECT_NEAR(p.mass(0, 0).real(), 2.0 / 9, 1e-15);
  EXPECT_NEAR(p.mass(0, 1).real(), 1.0 / 18, 1e-15);
  EXPECT_NEAR(p.mass(3, 0).real(), 1.0 / 18, 1e-15);
}

TEST(PeriodicPencil, RowSumsAndTotalMass)
{
  for (int n : {3, 5, 10})
  {
    const double h = 1.0 / (n - 1);
    const auto p = assemble_periodic_pencil(n, h);
    Complex total = 0.0;
    for (int i = 0; i < n; ++i)
    {
      Complex row = 0.0;
      for (int j = 0; j < n; ++j)
      {
        row += p.stiffness(i, j);
        total += p.mass(i, j);
      }
      EXPECT_NEAR(std::abs(row), 0.0, 1e-12);
    }
    EXPECT_NEAR(std::abs(total - Complex(n * h)), 0.0, 1e-13);
  }
}

TEST(PeriodicPencil, SkewFlipsCorners)
{
  const double h = 0.25;
  const auto per = assemble_auxiliary_pencil(5, h, BoundaryKind::Periodic);
  const auto skew = assemble_auxiliary_pencil(5, h, BoundaryKind::SkewPeriodic);
  EXPECT_EQ(skew.bc, BoundaryKind::SkewPeriodic);
  EXPECT_EQ(skew.stiffness(0, 4), -per.stiffness(0, 4));
  EXPECT_EQ(skew.mass(4, 0), -per.mass(4, 0));
  EXPECT_EQ(skew.stiffness(1, 2), per.stiffness(1, 2));
  EXPECT_EQ(skew.mass(2, 2), per.mass(2, 2));
}

TEST(OperatorA, TwoByTwoGridMatchesOracle)
{
  const Grid g({3, 3});
  const std::array bcs{BoundaryKind::Absorbing, BoundaryKind::Neumann};
  const auto dense = oracle::densify(build_operator_A(g, kTwoPi, bcs));
  EXPECT_LT(test::max_abs_diff(dense, oracle::dense_operator(g, kTwoPi, oracle::Which::A)),
            1e-14);
}

TEST(OperatorA, NeumannLaplacianKillsConstants)
{
  const Grid g({4, 5});
  const std::array bcs{BoundaryKind::Neumann, BoundaryKind::Neumann};
  const auto y = kron_apply(build_operator_A(g, 0.0, bcs), FieldVector(g.size(), 1.0));
  EXPECT_LT(test::max_abs(y), 1e-13);
}

TEST(OperatorA, ComplexSymmetricNotHermitian)
{
  const Grid g({3, 3, 3});
  const std::array bcs{BoundaryKind::Absorbing, BoundaryKind::Neumann, BoundaryKind::Neumann};
  const auto a = oracle::densify(build_operator_A(g, kTwoPi, bcs));
  EXPECT_LT(test::max_abs_diff(a, a.transpose()), 1e-14);
  double herm = 0.0;
  for (int i = 0; i < a.rows; ++i)
  {
    for (int j = 0; j < a.cols; ++j)
    {
      herm = std::max(herm, std::abs(a(i, j) - std::conj(a(j, i))));
    }
  }
  EXPECT_GT(herm, 1.0);
}

TEST(OperatorA, RejectsAbsorbingOutsideX1)
{
  const Grid g({3, 3});
  const std::array bcs{BoundaryKind::Neumann, BoundaryKind::Absorbing};
  EXPECT_THROW(build_operator_A(g, 1.0, bcs), DimensionError);
}

TEST(OperatorB, MatchesOracle)
{
  const Grid g({4, 3});
  const auto b = oracle::densify(build_operator_B(g, kTwoPi));
  EXPECT_LT(test::max_abs_diff(b, oracle::dense_operator(g, kTwoPi, oracle::Which::B)), 1e-14);
}

TEST(OperatorB, DifferenceLivesOnX1BoundaryPlanes)
{
  const Grid g({5, 4});
  const auto diff = oracle::dense_operator(g, kTwoPi, oracle::Which::B) -
                    oracle::dense_operator(g, kTwoPi, oracle::Which::A);
  const int block = 4;
  for (int i = 0; i < diff.rows; ++i)
  {
    for (int j = 0; j < diff.cols; ++j)
    {
      const bool row_b = i < block || i >= diff.rows - block;
      const bool col_b = j < block || j >= diff.cols - block;
      if (!(row_b && col_b))
      {
        EXPECT_EQ(diff(i, j), Complex(0.0)) << i << "," << j;
      }
    }
  }
}

TEST(OperatorB, X1FactorsAreReal)
{
  const auto p = assemble_periodic_pencil(6, 0.2);
  for (int i = 0; i < 6; ++i)
  {
    for (int j = 0; j < 6; ++j)
    {
      EXPECT_EQ(p.stiffness(i, j).imag(), 0.0);
      EXPECT_EQ(p.mass(i, j).imag(), 0.0);
    }
  }
}

TEST(Correction, CornerEntryClosedForm)
{
  const Grid g({3, 3});
  const double h = g.h(0);
  const double w = kTwoPi;
  const auto pencils = problem_pencils(g, w, BoundaryKind::Absorbing);
  const auto aux = assemble_periodic_pencil(3, h);
  const auto diff = pencil_difference(aux, pencils[0]);
  EXPECT_NEAR(std::abs(diff.dk[0] - Complex(1.0, w * h) / h), 0.0, 1e-13);
  EXPECT_NEAR(std::abs(diff.dm[0] - Complex(h / 3)), 0.0, 1e-15);

  const auto c = build_correction(diff, build_cross_terms(std::span(&pencils[1], 1)), w * w);
  FieldVector y(6, 0.0), out(6);
  FieldVector scratch(c.scratch_size());
  y[0] = 1.0;
  c.apply(y, out, scratch);
  const Complex expect = (Complex(1.0, w * h) / h - w * w * h / 3) * pencils[1].mass(0, 0) +
                         (h / 3) * pencils[1].stiffness(0, 0);
  EXPECT_NEAR(std::abs(out[0] - expect), 0.0, 1e-12);
}

TEST(Correction, IndependentOfShiftWithoutMassDifference)
{
  PencilDifference diff;
  diff.n = 4;
  diff.dk = {1.0, 2.0, 2.0, 3.0};
  const auto p2 = assemble_pencil(3, 0.5, 0.0, BoundaryKind::Neumann);
  const auto c1 = build_correction(diff, build_cross_terms(std::span(&p2, 1)), 1.0);
  const auto c2 = build_correction(diff, build_cross_terms(std::span(&p2, 1)), Complex(7.0, 3.0));
  const auto y = test::random_vector(6, 7);
  FieldVector o1(6), o2(6), s(c1.scratch_size());
  c1.apply(y, o1, s);
  c2.apply(y, o2, s);
  EXPECT_EQ(o1, o2);
}

TEST(Correction, MatchesDenseDifferenceOnPaddedVector)
{
  for (auto aux : {BoundaryKind::Periodic, BoundaryKind::SkewPeriodic})
  {
    const Grid g({4, 3});
    const double w = 2.5;
    const auto pencils = problem_pencils(g, w, BoundaryKind::Absorbing);
    const auto c = build_correction(pencil_difference(assemble_auxiliary_pencil(4, g.h(0), aux),
                                                      pencils[0]),
                                    build_cross_terms(std::span(&pencils[1], 1)), w * w);
    const auto diff =
        oracle::dense_operator(g, w, oracle::Which::B, BoundaryKind::Absorbing, std::nullopt, aux) -
        oracle::dense_operator(g, w, oracle::Which::A);
    const auto y = test::random_vector(6, 8);
    FieldVector padded(g.size(), 0.0);
    std::copy(y.begin(), y.begin() + 3, padded.begin());
    std::copy(y.begin() + 3, y.end(), padded.end() - 3);
    const auto full = diff.multiply(padded);
    FieldVector expect(6);
    std::copy(full.begin(), full.begin() + 3, expect.begin());
    std::copy(full.end() - 3, full.end(), expect.begin() + 3);
    FieldVector out(6), s(c.scratch_size());
    c.apply(y, out, s);
    EXPECT_LT(test::rel_error(out, expect), 1e-13) << to_string(aux);
  }
}

TEST(CrossTerms, ThreeDimensionalLayout)
{
  const Grid g({3, 4, 5});
  const auto pencils = problem_pencils(g, 1.0, BoundaryKind::Absorbing);
  const auto cross = build_cross_terms(std::span(pencils).subspan(1));
  const auto x = test::random_vector(20, 9);
  const auto m = oracle::kron(test::to_dense(pencils[1].mass), test::to_dense(pencils[2].mass));
  const auto k = oracle::kron(test::to_dense(pencils[1].stiffness), test::to_dense(pencils[2].mass)) +
                 oracle::kron(test::to_dense(pencils[1].mass), test::to_dense(pencils[2].stiffness));
  EXPECT_LT(test::rel_error(kron_apply(cross.mass, x), m.multiply(x)), 1e-14);
  EXPECT_LT(test::rel_error(kron_apply(cross.stiffness, x), k.multiply(x)), 1e-14);
}
