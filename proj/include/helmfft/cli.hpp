#pragma once

// Run configuration, benchmark harness and result serialization behind tools/helmfft.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "helmfft/core.hpp"

namespace helmfft::cli
{

class ConfigError : public Error
{
public:
  using Error::Error;
};

class VerificationFailure : public Error
{
public:
  using Error::Error;
};

enum class Mode
{
  Solve,
  Verify,
  Bench
};

enum class Format
{
  Csv,
  Json
};

const char *to_string(Mode mode);
Mode parse_mode(const std::string &text);
Format parse_format(const std::string &text);

struct RhsSpec
{
  enum class Kind
  {
    Paper,
    Random,
    File
  };
  Kind kind = Kind::Paper;
  std::uint64_t seed = 0;
  std::string path;

  // "paper", "random:<seed>" or "file:<path>".
  static RhsSpec parse(const std::string &text);
  std::string to_string() const;
};

inline constexpr double kVerifyTolerance = 1e-9;

struct RunConfig
{
  Mode mode = Mode::Solve;
  int dims = 2;
  int n1 = 65;
  int n2 = 65;
  int n3 = 65;
  double omega = 6.283185307179586;
  BoundaryKind bc_x1 = BoundaryKind::Absorbing;
  RhsSpec rhs;
  int repeats = 3;
  int threads = 0;
  std::vector<int> sizes; // bench sweep; each entry n gives an n^d grid
  std::string out;
  Format format = Format::Csv;

  Grid grid() const;
  // Throws ConfigError.
  void validate() const;
};

struct RunRecord
{
  Mode mode = Mode::Solve;
  int d = 2;
  int n1 = 0;
  int n2 = 0;
  std::optional<int> n3;
  double omega = 0.0;
  double init_seconds = 0.0;
  double solve_seconds = 0.0; // minimum over repeats
  double residual = 0.0;
  std::optional<double> oracle_error;

  // Not serialized.
  double median_solve_seconds = 0.0;
  std::size_t peak_extra_memory_estimate = 0; // bytes of solver workspace

  std::size_t unknowns() const;
  // Compares the serialized fields only.
  bool operator==(const RunRecord &other) const;
};

FieldVector paper_rhs(const Grid &grid);
FieldVector random_rhs(const Grid &grid, std::uint64_t seed);
FieldVector make_rhs(const RhsSpec &spec, const Grid &grid);

void write_rhs_file(const std::string &path, int dims, std::span<const Complex> values);
FieldVector read_rhs_file(const std::string &path, int dims, std::size_t expected);

// Solve/verify run one grid; bench sweeps config.sizes. Verify throws SizeLimit past the
// dense cap and leaves the tolerance check to the caller.
std::vector<RunRecord> run(const RunConfig &config);
RunRecord run_single(const RunConfig &config);

std::string emit(std::span<const RunRecord> records, Format format);
void emit_to_file(std::span<const RunRecord> records, Format format, const std::string &path);
std::vector<RunRecord> parse_records(const std::string &text, Format format);

struct LogLogFit
{
  double slope = 0.0;
  double intercept = 0.0;
};

LogLogFit fit_loglog(std::span<const double> x, std::span<const double> y);

struct ScalingReport
{
  LogLogFit fit;            // solve_seconds vs N
  double last_ratio = 0.0;  // t(last) / t(second to last)
  std::size_t points = 0;
};

ScalingReport scaling_report(std::span<const RunRecord> records);

// Full command-line entry point; returns the process exit code.
int main_entry(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

} // namespace helmfft::cli
