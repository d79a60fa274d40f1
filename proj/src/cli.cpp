#include "helmfft/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "helmfft/oracle.hpp"
#include "helmfft/solver2d.hpp"
#include "helmfft/solver3d.hpp"
#include "parallel.hpp"

namespace helmfft::cli
{

namespace
{

constexpr char kRhsMagic[8] = {'H', 'H', 'F', 'F', 'T', 'R', 'H', 'S'};
constexpr const char *kCsvHeader =
    "mode,d,n1,n2,n3,omega,init_seconds,solve_seconds,residual,oracle_error";

std::string format_double(double v)
{
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> split(const std::string &text, char sep)
{
  std::vector<std::string> parts;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep))
  {
    parts.push_back(item);
  }
  if (!text.empty() && text.back() == sep)
  {
    parts.emplace_back();
  }
  return parts;
}

double parse_double(const std::string &s)
{
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size())
  {
    throw ConfigError("not a number: '" + s + "'");
  }
  return v;
}

int parse_int(const std::string &s)
{
  std::size_t used = 0;
  const int v = std::stoi(s, &used);
  if (used != s.size())
  {
    throw ConfigError("not an integer: '" + s + "'");
  }
  return v;
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double median(std::vector<double> v)
{
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

std::vector<int> default_sizes(int dims)
{
  return dims == 2 ? std::vector<int>{129, 257, 513, 1025} : std::vector<int>{17, 33, 65};
}

double relative_error(std::span<const Complex> u, std::span<const Complex> ref)
{
  double num = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i)
  {
    num += std::norm(u[i] - ref[i]);
  }
  const double den = norm2(ref);
  return den > 0.0 ? std::sqrt(num) / den : std::sqrt(num);
}

// Reuses the solver workspace so the residual check adds no volumetric allocation.
double residual_of(const KroneckerOperator &op, std::span<const Complex> u,
                   std::span<const Complex> f, std::span<Complex> workspace)
{
  const std::size_t n = f.size();
  return residual_into(op, u, f, workspace.subspan(0, n), workspace.subspan(n, 2 * n));
}

template <typename Solve>
void time_solves(int repeats, Solve &&solve, RunRecord &rec)
{
  std::vector<double> times;
  for (int r = 0; r < std::max(repeats, 1); ++r)
  {
    const auto t0 = Clock::now();
    solve();
    times.push_back(seconds_since(t0));
  }
  rec.solve_seconds = *std::min_element(times.begin(), times.end());
  rec.median_solve_seconds = median(times);
}

} // namespace

const char *to_string(Mode mode)
{
  switch (mode)
  {
    case Mode::Solve:
      return "solve";
    case Mode::Verify:
      return "verify";
    case Mode::Bench:
      return "bench";
  }
  return "?";
}

Mode parse_mode(const std::string &text)
{
  if (text == "solve")
  {
    return Mode::Solve;
  }
  if (text == "verify")
  {
    return Mode::Verify;
  }
  if (text == "bench")
  {
    return Mode::Bench;
  }
  throw ConfigError("unknown mode '" + text + "'");
}

Format parse_format(const std::string &text)
{
  if (text == "csv")
  {
    return Format::Csv;
  }
  if (text == "json")
  {
    return Format::Json;
  }
  throw ConfigError("unknown format '" + text + "' (expected csv or json)");
}

RhsSpec RhsSpec::parse(const std::string &text)
{
  RhsSpec spec;
  if (text == "paper")
  {
    return spec;
  }
  if (text.rfind("random:", 0) == 0)
  {
    const std::string seed = text.substr(7);
    if (seed.empty() || seed.find_first_not_of("0123456789") != std::string::npos)
    {
      throw ConfigError("bad random seed in rhs spec '" + text + "'");
    }
    spec.kind = Kind::Random;
    spec.seed = std::stoull(seed);
    return spec;
  }
  if (text.rfind("file:", 0) == 0 && text.size() > 5)
  {
    spec.kind = Kind::File;
    spec.path = text.substr(5);
    return spec;
  }
  throw ConfigError("bad rhs spec '" + text + "' (expected paper, random:<seed> or file:<path>)");
}

std::string RhsSpec::to_string() const
{
  switch (kind)
  {
    case Kind::Paper:
      return "paper";
    case Kind::Random:
      return "random:" + std::to_string(seed);
    case Kind::File:
      return "file:" + path;
  }
  return "?";
}

Grid RunConfig::grid() const
{
  if (dims == 2)
  {
    return Grid({n1, n2});
  }
  return Grid({n1, n2, n3});
}

void RunConfig::validate() const
{
  if (dims != 2 && dims != 3)
  {
    throw ConfigError("d must be 2 or 3");
  }
  const auto sweep = (mode == Mode::Bench) ? (sizes.empty() ? default_sizes(dims) : sizes)
                                           : std::vector<int>{};
  for (int n : sweep)
  {
    if (n < 3)
    {
      throw ConfigError("bench sizes must be >= 3");
    }
  }
  if (mode != Mode::Bench && (n1 < 3 || n2 < 3 || (dims == 3 && n3 < 3)))
  {
    throw ConfigError("every n_j must be >= 3");
  }
  if (repeats < 1)
  {
    throw ConfigError("repeats must be >= 1");
  }
  if (threads < 0)
  {
    throw ConfigError("threads must be >= 0");
  }
  if (!std::isfinite(omega))
  {
    throw ConfigError("omega must be finite");
  }
  if (is_circulant(bc_x1))
  {
    throw ConfigError("x_1 boundary must be abc or neumann");
  }
  if (dims == 3 && bc_x1 != BoundaryKind::Absorbing)
  {
    throw ConfigError("the 3D solver supports absorbing x_1 faces only");
  }
}

std::size_t RunRecord::unknowns() const
{
  return static_cast<std::size_t>(n1) * n2 * (n3 ? *n3 : 1);
}

bool RunRecord::operator==(const RunRecord &o) const
{
  return mode == o.mode && d == o.d && n1 == o.n1 && n2 == o.n2 && n3 == o.n3 &&
         omega == o.omega && init_seconds == o.init_seconds &&
         solve_seconds == o.solve_seconds && residual == o.residual &&
         oracle_error == o.oracle_error;
}

FieldVector paper_rhs(const Grid &grid)
{
  FieldVector f(grid.size(), 1.0);
  std::fill_n(f.begin(), grid.n(0), Complex(0.01));
  return f;
}

FieldVector random_rhs(const Grid &grid, std::uint64_t seed)
{
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  FieldVector f(grid.size());
  for (auto &v : f)
  {
    const double re = dist(gen);
    v = Complex(re, dist(gen));
  }
  return f;
}

FieldVector make_rhs(const RhsSpec &spec, const Grid &grid)
{
  switch (spec.kind)
  {
    case RhsSpec::Kind::Paper:
      return paper_rhs(grid);
    case RhsSpec::Kind::Random:
      return random_rhs(grid, spec.seed);
    case RhsSpec::Kind::File:
      return read_rhs_file(spec.path, grid.dims(), grid.size());
  }
  throw ConfigError("bad rhs kind");
}

void write_rhs_file(const std::string &path, int dims, std::span<const Complex> values)
{
  static_assert(std::endian::native == std::endian::little, "little-endian host expected");
  std::ofstream out(path, std::ios::binary);
  if (!out)
  {
    throw Error("cannot open '" + path + "' for writing");
  }
  const std::uint32_t header[2] = {static_cast<std::uint32_t>(dims), 0};
  out.write(kRhsMagic, sizeof(kRhsMagic));
  out.write(reinterpret_cast<const char *>(header), sizeof(header));
  out.write(reinterpret_cast<const char *>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(Complex)));
  if (!out)
  {
    throw Error("write to '" + path + "' failed");
  }
}

FieldVector read_rhs_file(const std::string &path, int dims, std::size_t expected)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
  {
    throw ConfigError("cannot open rhs file '" + path + "'");
  }
  char magic[8];
  std::uint32_t header[2];
  in.read(magic, sizeof(magic));
  in.read(reinterpret_cast<char *>(header), sizeof(header));
  if (!in || std::memcmp(magic, kRhsMagic, sizeof(magic)) != 0)
  {
    throw ConfigError("'" + path + "' is not an rhs file (bad header)");
  }
  if (static_cast<int>(header[0]) != dims)
  {
    throw ConfigError("rhs file is " + std::to_string(header[0]) + "D, config is " +
                      std::to_string(dims) + "D");
  }
  FieldVector f(expected);
  in.read(reinterpret_cast<char *>(f.data()),
          static_cast<std::streamsize>(expected * sizeof(Complex)));
  if (in.gcount() != static_cast<std::streamsize>(expected * sizeof(Complex)) ||
      in.peek() != std::char_traits<char>::eof())
  {
    throw ConfigError("rhs file length does not match N = " + std::to_string(expected));
  }
  return f;
}

RunRecord run_single(const RunConfig &config)
{
  const Grid grid = config.grid();
  if (config.mode == Mode::Verify && grid.size() > oracle::kMaxUnknowns)
  {
    throw SizeLimit("verify mode is limited to N <= " + std::to_string(oracle::kMaxUnknowns) +
                    ", got N = " + std::to_string(grid.size()));
  }
  detail::set_threads(config.threads);
  const FieldVector f = make_rhs(config.rhs, grid);
  FieldVector u(grid.size());

  RunRecord rec;
  rec.mode = config.mode;
  rec.d = config.dims;
  rec.n1 = grid.n(0);
  rec.n2 = grid.n(1);
  if (config.dims == 3)
  {
    rec.n3 = grid.n(2);
  }
  rec.omega = config.omega;

  if (config.dims == 2)
  {
    const auto t0 = Clock::now();
    const SolverPlan2D plan =
        config.bc_x1 == BoundaryKind::Absorbing
            ? plan2d(grid, config.omega)
            : plan2d(grid, config.omega * config.omega, config.bc_x1, config.omega);
    rec.init_seconds = seconds_since(t0);
    FieldVector workspace(plan.workspace_size());
    time_solves(config.repeats, [&] { solve2d(plan, f, u, workspace); }, rec);
    rec.peak_extra_memory_estimate = workspace.size() * sizeof(Complex);
    rec.residual = residual_of(plan.operator_a(), u, f, workspace);
  }
  else
  {
    const auto t0 = Clock::now();
    const SolverPlan3D plan = plan3d(grid, config.omega);
    rec.init_seconds = seconds_since(t0);
    FieldVector workspace(plan.workspace_size(detail::max_threads()));
    time_solves(config.repeats, [&] { solve3d(plan, f, u, workspace); }, rec);
    rec.peak_extra_memory_estimate = workspace.size() * sizeof(Complex);
    rec.residual = residual_of(plan.operator_a(), u, f, workspace);
  }

  if (config.mode == Mode::Verify)
  {
    const auto a = oracle::dense_operator(grid, config.omega, oracle::Which::A, config.bc_x1);
    rec.oracle_error = relative_error(u, oracle::dense_solve(a, f).u);
  }
  return rec;
}

std::vector<RunRecord> run(const RunConfig &config)
{
  config.validate();
  if (config.mode != Mode::Bench)
  {
    return {run_single(config)};
  }
  std::vector<RunRecord> records;
  for (int n : config.sizes.empty() ? default_sizes(config.dims) : config.sizes)
  {
    RunConfig c = config;
    c.n1 = c.n2 = c.n3 = n;
    records.push_back(run_single(c));
  }
  return records;
}

std::string emit(std::span<const RunRecord> records, Format format)
{
  std::ostringstream out;
  if (format == Format::Csv)
  {
    out << kCsvHeader << '\n';
    for (const auto &r : records)
    {
      out << to_string(r.mode) << ',' << r.d << ',' << r.n1 << ',' << r.n2 << ','
          << (r.n3 ? std::to_string(*r.n3) : "") << ',' << format_double(r.omega) << ','
          << format_double(r.init_seconds) << ',' << format_double(r.solve_seconds) << ','
          << format_double(r.residual) << ','
          << (r.oracle_error ? format_double(*r.oracle_error) : "") << '\n';
    }
    return out.str();
  }
  out << "[\n";
  for (std::size_t i = 0; i < records.size(); ++i)
  {
    const auto &r = records[i];
    out << "  {\"mode\": \"" << to_string(r.mode) << "\", \"d\": " << r.d
        << ", \"n1\": " << r.n1 << ", \"n2\": " << r.n2
        << ", \"n3\": " << (r.n3 ? std::to_string(*r.n3) : "null")
        << ", \"omega\": " << format_double(r.omega)
        << ", \"init_seconds\": " << format_double(r.init_seconds)
        << ", \"solve_seconds\": " << format_double(r.solve_seconds)
        << ", \"residual\": " << format_double(r.residual)
        << ", \"oracle_error\": " << (r.oracle_error ? format_double(*r.oracle_error) : "null")
        << "}" << (i + 1 < records.size() ? "," : "") << '\n';
  }
  out << "]\n";
  return out.str();
}

void emit_to_file(std::span<const RunRecord> records, Format format, const std::string &path)
{
  std::ofstream out(path);
  if (!out)
  {
    throw Error("cannot open '" + path + "' for writing");
  }
  out << emit(records, format);
  if (!out)
  {
    throw Error("write to '" + path + "' failed");
  }
}

std::vector<RunRecord> parse_records(const std::string &text, Format format)
{
  std::vector<RunRecord> records;
  if (format == Format::Csv)
  {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader)
    {
      throw ConfigError("unexpected CSV header");
    }
    while (std::getline(in, line))
    {
      if (line.empty())
      {
        continue;
      }
      const auto f = split(line, ',');
      if (f.size() != 10)
      {
        throw ConfigError("CSV row has " + std::to_string(f.size()) + " fields, expected 10");
      }
      RunRecord r;
      r.mode = parse_mode(f[0]);
      r.d = parse_int(f[1]);
      r.n1 = parse_int(f[2]);
      r.n2 = parse_int(f[3]);
      if (!f[4].empty())
      {
        r.n3 = parse_int(f[4]);
      }
      r.omega = parse_double(f[5]);
      r.init_seconds = parse_double(f[6]);
      r.solve_seconds = parse_double(f[7]);
      r.residual = parse_double(f[8]);
      if (!f[9].empty())
      {
        r.oracle_error = parse_double(f[9]);
      }
      records.push_back(r);
    }
    return records;
  }
  nlohmann::json doc;
  try
  {
    doc = nlohmann::json::parse(text);
  }
  catch (const nlohmann::json::exception &e)
  {
    throw ConfigError(std::string("bad JSON: ") + e.what());
  }
  if (!doc.is_array())
  {
    throw ConfigError("JSON results must be an array");
  }
  for (const auto &o : doc)
  {
    try
    {
      RunRecord r;
      r.mode = parse_mode(o.at("mode").get<std::string>());
      r.d = o.at("d").get<int>();
      r.n1 = o.at("n1").get<int>();
      r.n2 = o.at("n2").get<int>();
      if (!o.at("n3").is_null())
      {
        r.n3 = o.at("n3").get<int>();
      }
      r.omega = o.at("omega").get<double>();
      r.init_seconds = o.at("init_seconds").get<double>();
      r.solve_seconds = o.at("solve_seconds").get<double>();
      r.residual = o.at("residual").get<double>();
      if (!o.at("oracle_error").is_null())
      {
        r.oracle_error = o.at("oracle_error").get<double>();
      }
      records.push_back(r);
    }
    catch (const nlohmann::json::exception &e)
    {
      throw ConfigError(std::string("bad JSON record: ") + e.what());
    }
  }
  return records;
}

LogLogFit fit_loglog(std::span<const double> x, std::span<const double> y)
{
  if (x.size() != y.size() || x.size() < 2)
  {
    throw Error("log-log fit needs at least two (x, y) pairs");
  }
  const auto n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i)
  {
    if (!(x[i] > 0.0) || !(y[i] > 0.0))
    {
      throw Error("log-log fit needs positive data");
    }
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double den = n * sxx - sx * sx;
  if (den <= 0.0)
  {
    throw Error("log-log fit needs distinct x values");
  }
  LogLogFit fit;
  fit.slope = (n * sxy - sx * sy) / den;
  fit.intercept = (sy - fit.slope * sx) / n;
  return fit;
}

ScalingReport scaling_report(std::span<const RunRecord> records)
{
  std::vector<double> n, t;
  for (const auto &r : records)
  {
    n.push_back(static_cast<double>(r.unknowns()));
    t.push_back(r.solve_seconds);
  }
  ScalingReport rep;
  rep.fit = fit_loglog(n, t);
  rep.points = records.size();
  rep.last_ratio = t[t.size() - 1] / t[t.size() - 2];
  return rep;
}

int main_entry(int argc, const char *const *argv, std::ostream &out, std::ostream &err)
{
  CLI::App app{"Fast direct Helmholtz solver on 2D/3D grids with absorbing x_1 faces"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value configuration file; flags override it");

  RunConfig cfg;
  std::string rhs = "paper", format, bc = "abc";
  app.add_option("--d", cfg.dims, "Dimension (2 or 3)");
  app.add_option("--n1", cfg.n1, "Grid points along x_1");
  app.add_option("--n2", cfg.n2, "Grid points along x_2");
  app.add_option("--n3", cfg.n3, "Grid points along x_3 (d = 3)");
  app.add_option("--omega", cfg.omega, "Wave number (default 2 pi)");
  app.add_option("--bc", bc, "x_1 boundary: abc or neumann")
      ->check(CLI::IsMember({"abc", "neumann"}));
  app.add_option("--rhs", rhs, "paper, random:<seed> or file:<path>");
  app.add_option("--out", cfg.out, "Output path (default stdout)");
  app.add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--repeats", cfg.repeats, "Timed solves per run; the minimum is reported");
  app.add_option("--threads", cfg.threads, "Solver threads (0 = auto)");
  app.add_option("--sizes", cfg.sizes, "Bench sweep sizes n (grid n^d)")->delimiter(',');

  auto *solve = app.add_subcommand("solve", "Solve one problem and report timings/residual");
  auto *verify = app.add_subcommand("verify", "Solve and compare with the dense oracle");
  auto *bench = app.add_subcommand("bench", "Sweep grid sizes, one record per size");
  auto *fit = app.add_subcommand("fit", "Fit log-log slope of solve time vs N from results");
  std::string fit_input;
  fit->add_option("input", fit_input, "CSV or JSON results file")->required();
  for (auto *sub : {solve, verify, bench, fit})
  {
    sub->fallthrough();
  }

  try
  {
    std::vector<std::string> args(argv + 1, argv + argc);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  }
  catch (const CLI::ParseError &e)
  {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try
  {
    if (fit->parsed())
    {
      Format fmt = Format::Csv;
      if (!format.empty())
      {
        fmt = parse_format(format);
      }
      else if (fit_input.size() >= 5 && fit_input.substr(fit_input.size() - 5) == ".json")
      {
        fmt = Format::Json;
      }
      std::ifstream in(fit_input);
      if (!in)
      {
        throw ConfigError("cannot open '" + fit_input + "'");
      }
      std::stringstream text;
      text << in.rdbuf();
      const auto records = parse_records(text.str(), fmt);
      const auto rep = scaling_report(records);
      char line[160];
      std::snprintf(line, sizeof(line), "points=%zu slope=%.6f last_ratio=%.6f\n", rep.points,
                    rep.fit.slope, rep.last_ratio);
      out << line;
      return 0;
    }

    cfg.mode = verify->parsed() ? Mode::Verify : bench->parsed() ? Mode::Bench : Mode::Solve;
    cfg.rhs = RhsSpec::parse(rhs);
    cfg.format = format.empty() ? Format::Csv : parse_format(format);
    cfg.bc_x1 = bc == "neumann" ? BoundaryKind::Neumann : BoundaryKind::Absorbing;
    const auto records = run(cfg);
    if (cfg.out.empty())
    {
      out << emit(records, cfg.format);
    }
    else
    {
      emit_to_file(records, cfg.format, cfg.out);
    }
    for (const auto &r : records)
    {
      if (r.oracle_error && !(*r.oracle_error <= kVerifyTolerance))
      {
        err << "verification failed: oracle error " << format_double(*r.oracle_error)
            << " exceeds " << kVerifyTolerance << '\n';
        return 4;
      }
    }
    return 0;
  }
  catch (const ConfigError &e)
  {
    err << "config error: " << e.what() << '\n';
    return 2;
  }
  catch (const SizeLimit &e)
  {
    err << "config error: " << e.what() << '\n';
    return 2;
  }
  catch (const DimensionError &e)
  {
    err << "config error: " << e.what() << '\n';
    return 2;
  }
  catch (const SingularBlock &e)
  {
    err << "solver error: " << e.what() << '\n';
    return 3;
  }
  catch (const Error &e)
  {
    err << "solver error: " << e.what() << '\n';
    return 3;
  }
}

} // namespace helmfft::cli
