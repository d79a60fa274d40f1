#include "helmfft/block_factors.hpp"

#include <algorithm>
#include <cmath>

namespace helmfft
{

BlockFactors::BlockFactors(std::span<const Complex> lambdas, Complex shift,
                           const TriCornerMatrix &mass, const TriCornerMatrix &stiffness)
  : m_(mass.size()), count_(static_cast<int>(lambdas.size()))
{
  if (stiffness.size() != m_)
  {
    throw DimensionError("block factors: mass and stiffness differ in size");
  }
  if (mass.corner() != 0.0 || stiffness.corner() != 0.0)
  {
    throw DimensionError("block factors: blocks must be plain tridiagonal");
  }
  const auto m = static_cast<std::size_t>(m_);
  diag_.resize(count_ * m);
  inv_pivot_.resize(count_ * m);
  off_.resize(count_ * (m - 1));
  mult_.resize(count_ * (m - 1));
  const auto &md = mass.diag();
  const auto &mo = mass.off();
  const auto &kd = stiffness.diag();
  const auto &ko = stiffness.off();
  for (int l = 0; l < count_; ++l)
  {
    const Complex a = lambdas[l] - shift;
    Complex *d = diag_.data() + l * m;
    Complex *o = off_.data() + l * (m - 1);
    // Squared magnitudes throughout; avoids a hypot per entry.
    double scale2 = 0.0;
    for (std::size_t i = 0; i < m; ++i)
    {
      d[i] = a * md[i] + kd[i];
      scale2 = std::max(scale2, std::norm(d[i]));
    }
    for (std::size_t i = 0; i + 1 < m; ++i)
    {
      o[i] = a * mo[i] + ko[i];
      scale2 = std::max(scale2, std::norm(o[i]));
    }
    const double tiny2 = 1e-28 * scale2;
    Complex *mu = mult_.data() + l * (m - 1);
    Complex *ip = inv_pivot_.data() + l * m;
    Complex pivot = d[0];
    for (std::size_t i = 0;; ++i)
    {
      const double p2 = std::norm(pivot);
      if (p2 <= tiny2 || !std::isfinite(p2))
      {
        throw SingularBlock("singular tridiagonal block " + std::to_string(l + 1) + " (pivot " +
                                std::to_string(i + 1) + " has magnitude " +
                                std::to_string(std::abs(pivot)) + ")",
                            l);
      }
      ip[i] = 1.0 / pivot;
      if (i + 1 == m)
      {
        break;
      }
      mu[i] = o[i] * ip[i];
      pivot = d[i + 1] - mu[i] * o[i];
    }
  }
}

void BlockFactors::solve_block(int l, Complex *x) const
{
  const auto m = static_cast<std::size_t>(m_);
  const Complex *mu = mult_.data() + l * (m - 1);
  const Complex *o = off_.data() + l * (m - 1);
  const Complex *ip = inv_pivot_.data() + l * m;
  for (std::size_t i = 1; i < m; ++i)
  {
    x[i] -= mu[i - 1] * x[i - 1];
  }
  x[m - 1] *= ip[m - 1];
  for (std::size_t i = m - 1; i-- > 0;)
  {
    x[i] = (x[i] - o[i] * x[i + 1]) * ip[i];
  }
}

void BlockFactors::solve(std::span<Complex> x) const
{
  const auto m = static_cast<std::size_t>(m_);
  if (x.size() != m * count_)
  {
    throw DimensionError("block solve: length " + std::to_string(x.size()) + ", expected " +
                         std::to_string(m * count_));
  }
#pragma omp parallel for schedule(static)
  for (int l = 0; l < count_; ++l)
  {
    solve_block(l, x.data() + l * m);
  }
}

Complex BlockFactors::diag(int l, int i) const
{
  return diag_.at(static_cast<std::size_t>(l) * m_ + i);
}

Complex BlockFactors::off(int l, int i) const
{
  return off_.at(static_cast<std::size_t>(l) * (m_ - 1) + i);
}

} // namespace helmfft
