#pragma once

#include <span>
#include <vector>

#include "helmfft/core.hpp"

namespace helmfft
{

// LU factors of the tridiagonal family (lambda_l - shift) M + K, l = 1..count, each m x m.
// No pivoting; a pivot below 1e-14 * max|block entry| raises SingularBlock with the block index.
class BlockFactors
{
public:
  BlockFactors() = default;
  BlockFactors(std::span<const Complex> lambdas, Complex shift, const TriCornerMatrix &mass,
               const TriCornerMatrix &stiffness);

  int count() const { return count_; }
  int block_size() const { return m_; }

  // x holds count contiguous blocks of m entries.
  void solve(std::span<Complex> x) const;
  void solve_block(int l, Complex *x) const;

  // Entries of block l, for checks against dense assembly.
  Complex diag(int l, int i) const;
  Complex off(int l, int i) const;

private:
  int m_ = 0;
  int count_ = 0;
  std::vector<Complex> diag_;
  std::vector<Complex> off_;
  std::vector<Complex> mult_;
  std::vector<Complex> inv_pivot_;
};

} // namespace helmfft
