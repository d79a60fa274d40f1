#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>

#include "helmfft/core.hpp"
#include "helmfft/oracle.hpp"

namespace helmfft::test
{

inline FieldVector random_vector(std::size_t n, std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  FieldVector x(n);
  for (auto &v : x)
  {
    const double re = dist(rng);
    v = Complex(re, dist(rng));
  }
  return x;
}

inline double rel_error(std::span<const Complex> a, std::span<const Complex> b)
{
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
  {
    num += std::norm(a[i] - b[i]);
    den += std::norm(b[i]);
  }
  return den == 0.0 ? std::sqrt(num) : std::sqrt(num / den);
}

inline double max_abs(std::span<const Complex> a)
{
  double m = 0.0;
  for (auto v : a)
  {
    m = std::max(m, std::abs(v));
  }
  return m;
}

inline double max_abs_diff(const oracle::DenseMatrix &a, const oracle::DenseMatrix &b)
{
  double m = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i)
  {
    m = std::max(m, std::abs(a.data[i] - b.data[i]));
  }
  return m;
}

// Dense copy of a 1D TriCornerMatrix.
inline oracle::DenseMatrix to_dense(const TriCornerMatrix &t)
{
  const int n = t.size();
  oracle::DenseMatrix d(n, n);
  for (int i = 0; i < n; ++i)
  {
    for (int j = 0; j < n; ++j)
    {
      d(i, j) = t(i, j);
    }
  }
  return d;
}

inline constexpr double kTwoPi = 6.283185307179586;

} // namespace helmfft::test
