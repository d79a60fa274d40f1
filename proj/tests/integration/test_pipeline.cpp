#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "helmfft/cli.hpp"
#include "helmfft/oracle.hpp"
#include "helmfft/solver2d.hpp"
#include "helmfft/solver3d.hpp"
#include "support.hpp"

using namespace helmfft;
using test::kTwoPi;

namespace
{

struct Process
{
  int code = -1;
  std::string out;
};

// Runs the installed command-line tool; stderr is folded into out.
Process run_tool(const std::string &args)
{
  const std::string cmd = std::string(HELMFFT_TOOL) + " " + args + " 2>&1";
  Process p;
  FILE *pipe = popen(cmd.c_str(), "r");
  if (!pipe)
  {
    return p;
  }
  std::array<char, 4096> buf{};
  while (std::fgets(buf.data(), buf.size(), pipe))
  {
    p.out += buf.data();
  }
  const int status = pclose(pipe);
  p.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return p;
}

} // namespace

TEST(Pipeline, MixedShapesAndBoundariesMatchOracle)
{
  for (const auto &pts : {std::vector<int>{3, 17}, std::vector<int>{17, 3}, std::vector<int>{10, 6},
                          std::vector<int>{33, 9}})
  {
    const Grid g(pts);
    for (auto bc : {BoundaryKind::Absorbing, BoundaryKind::Neumann})
    {
      const Complex shift = bc == BoundaryKind::Neumann ? Complex(20.0, 1.0) : Complex(kTwoPi * kTwoPi);
      const auto plan = plan2d(g, shift, bc, kTwoPi);
      const auto f = test::random_vector(g.size(), 71);
      const auto want =
          oracle::dense_solve(oracle::dense_operator(g, kTwoPi, oracle::Which::A, bc, shift), f).u;
      EXPECT_LE(test::rel_error(solve2d(plan, f), want), 1e-9)
          << pts[0] << "x" << pts[1] << " " << to_string(bc);
    }
  }
}

TEST(Pipeline, ResidualAtScale2D)
{
  for (int n : {257, 1025})
  {
    const Grid g({n, n});
    const auto plan = plan2d(g, kTwoPi);
    const auto f = cli::random_rhs(g, 72);
    FieldVector u(g.size()), work(plan.workspace_size());
    solve2d(plan, f, u, work);
    EXPECT_LE(relative_residual(plan.operator_a(), u, f), 1e-9) << n;
  }
}

TEST(Pipeline, ResidualAtScale3D)
{
  const Grid g({129, 129, 129});
  cli::RunConfig cfg;
  cfg.dims = 3;
  cfg.n1 = cfg.n2 = cfg.n3 = 129;
  cfg.repeats = 1;
  const auto rec = cli::run_single(cfg);
  EXPECT_LE(rec.residual, 1e-9);
  EXPECT_EQ(rec.unknowns(), g.size());
}

TEST(Pipeline, ThreadCountDoesNotChangeResult)
{
  cli::RunConfig cfg;
  cfg.dims = 3;
  cfg.n1 = 17;
  cfg.n2 = 9;
  cfg.n3 = 13;
  cfg.rhs = cli::RhsSpec::parse("random:9");
  cfg.repeats = 1;
  cfg.threads = 1;
  const auto one = cli::run_single(cfg);
  cfg.threads = 2;
  const auto two = cli::run_single(cfg);
  EXPECT_EQ(one.residual, two.residual);
}

TEST(Pipeline, SolveSurvivesRepeatedUseOfOnePlan)
{
  const Grid g({33, 17, 9});
  const auto plan = plan3d(g, kTwoPi);
  const auto f = cli::random_rhs(g, 73);
  const auto u1 = solve3d(plan, f);
  const auto u2 = solve3d(plan, f);
  EXPECT_EQ(u1, u2);
}

TEST(Tool, VerifyWritesJsonFile)
{
  const auto path = std::filesystem::temp_directory_path() / "helmfft_tool_verify.json";
  const auto p = run_tool("verify --n1 17 --n2 9 --rhs random:3 --format json --out " +
                          path.string());
  ASSERT_EQ(p.code, 0) << p.out;
  std::ifstream in(path);
  std::stringstream text;
  text << in.rdbuf();
  std::filesystem::remove(path);
  const auto recs = cli::parse_records(text.str(), cli::Format::Json);
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_LE(*recs[0].oracle_error, 1e-9);
}

TEST(Tool, ExitCodes)
{
  EXPECT_EQ(run_tool("solve --n1 9 --n2 9").code, 0);
  EXPECT_EQ(run_tool("solve --bc neumann --omega 0 --n1 9 --n2 9").code, 3);
  EXPECT_EQ(run_tool("solve --n1 1").code, 2);
  EXPECT_EQ(run_tool("explode").code, 2);
  EXPECT_EQ(run_tool("--help").code, 0);
}

TEST(Tool, CsvOutputIsParseable)
{
  const auto p = run_tool("solve --d 3 --n1 9 --n2 5 --n3 7");
  ASSERT_EQ(p.code, 0) << p.out;
  const auto recs = cli::parse_records(p.out, cli::Format::Csv);
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_EQ(recs[0].n3, 7);
  EXPECT_LE(recs[0].residual, 1e-9);
}
