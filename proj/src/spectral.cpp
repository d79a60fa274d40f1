#include "helmfft/spectral.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace helmfft
{

namespace
{

constexpr double kTwoPi = 6.283185307179586476925286766559;

// exp(-2 pi i m / n) with m reduced mod n.
Complex unit_root(long long m, int n)
{
  const long long r = ((m % n) + n) % n;
  const double theta = kTwoPi * static_cast<double>(r) / n;
  return {std::cos(theta), -std::sin(theta)};
}

// exp(-i theta_l k): theta_l = 2 pi l / n, or (2 l + 1) pi / n for twisted bases.
Complex mode_root(long long k, int l, int n, bool twisted)
{
  if (!twisted)
  {
    return unit_root(k * l, n);
  }
  const long long m = (((k * (2LL * l + 1)) % (2LL * n)) + 2LL * n) % (2LL * n);
  const double theta = kTwoPi * static_cast<double>(m) / (2.0 * n);
  return {std::cos(theta), -std::sin(theta)};
}

// Tridiagonal Cholesky M = L L^T of a real SPD matrix; L has diagonal ld and subdiagonal ls.
void tridiagonal_cholesky(const TriCornerMatrix &m, std::vector<double> &ld,
                          std::vector<double> &ls)
{
  const int n = m.size();
  ld.assign(n, 0.0);
  ls.assign(n > 0 ? n - 1 : 0, 0.0);
  double prev = m.diag()[0].real();
  if (!(prev > 0.0))
  {
    throw EigensolverFailure("mass matrix is not positive definite");
  }
  ld[0] = std::sqrt(prev);
  for (int i = 1; i < n; ++i)
  {
    ls[i - 1] = m.off()[i - 1].real() / ld[i - 1];
    const double piv = m.diag()[i].real() - ls[i - 1] * ls[i - 1];
    if (!(piv > 0.0))
    {
      throw EigensolverFailure("mass matrix is not positive definite");
    }
    ld[i] = std::sqrt(piv);
  }
}

template <typename T>
void lower_solve_columns(const std::vector<double> &ld, const std::vector<double> &ls,
                         std::vector<T> &x, int n)
{
  // Column-major x: solve L X = X in place.
  for (int c = 0; c < n; ++c)
  {
    T *col = x.data() + static_cast<std::size_t>(c) * n;
    col[0] /= ld[0];
    for (int i = 1; i < n; ++i)
    {
      col[i] = (col[i] - ls[i - 1] * col[i - 1]) / ld[i];
    }
  }
}

template <typename T>
void upper_solve_columns(const std::vector<double> &ld, const std::vector<double> &ls,
                         std::vector<T> &x, int n)
{
  // Column-major x: solve L^T X = X in place.
  for (int c = 0; c < n; ++c)
  {
    T *col = x.data() + static_cast<std::size_t>(c) * n;
    col[n - 1] /= ld[n - 1];
    for (int i = n - 2; i >= 0; --i)
    {
      col[i] = (col[i] - ls[i] * col[i + 1]) / ld[i];
    }
  }
}

template <typename T>
void transpose_in_place(std::vector<T> &a, int n)
{
  for (int i = 0; i < n; ++i)
  {
    for (int j = i + 1; j < n; ++j)
    {
      std::swap(a[static_cast<std::size_t>(i) * n + j], a[static_cast<std::size_t>(j) * n + i]);
    }
  }
}

// Reduced matrix C = L^{-1} K L^{-T}, column-major.
template <typename T>
std::vector<T> reduce_to_standard(const TriCornerMatrix &k, const std::vector<double> &ld,
                                  const std::vector<double> &ls, T (*convert)(Complex))
{
  const int n = k.size();
  std::vector<T> c(static_cast<std::size_t>(n) * n, T(0));
  for (int j = 0; j < n; ++j)
  {
    for (int i = std::max(0, j - 1); i <= std::min(n - 1, j + 1); ++i)
    {
      c[static_cast<std::size_t>(j) * n + i] = convert(k(i, j));
    }
  }
  lower_solve_columns(ld, ls, c, n); // L^{-1} K
  transpose_in_place(c, n);          // (L^{-1} K)^T = K L^{-T}
  lower_solve_columns(ld, ls, c, n); // L^{-1} K L^{-T}
  for (int i = 0; i < n; ++i)
  {
    for (int j = i + 1; j < n; ++j)
    {
      auto &a = c[static_cast<std::size_t>(j) * n + i];
      auto &b = c[static_cast<std::size_t>(i) * n + j];
      const T avg = (a + b) * 0.5;
      a = b = avg;
    }
  }
  return c;
}

double real_part(Complex z) { return z.real(); }
Complex identity(Complex z) { return z; }

} // namespace

Complex EigenBasis::synthesis(int k, int l) const
{
  if (kind_ == BasisKind::NumericPencil)
  {
    return vector(k, l);
  }
  return std::conj(mode_root(k, l, n_, twisted_)) * scales_[l] / static_cast<double>(n_);
}

Complex EigenBasis::analysis(int l, int k) const
{
  if (kind_ == BasisKind::NumericPencil)
  {
    return vector(k, l);
  }
  return scales_[l] * mode_root(k, l, n_, twisted_);
}

EigenBasis EigenBasis::numeric(std::vector<Complex> lambdas, std::vector<Complex> vectors,
                               std::vector<Complex> scales)
{
  EigenBasis b;
  b.kind_ = BasisKind::NumericPencil;
  b.n_ = static_cast<int>(lambdas.size());
  if (vectors.size() != lambdas.size() * lambdas.size() || scales.size() != lambdas.size())
  {
    throw DimensionError("eigenbasis: inconsistent sizes");
  }
  b.lambdas_ = std::move(lambdas);
  b.vectors_ = std::move(vectors);
  b.scales_ = std::move(scales);
  return b;
}

EigenBasis EigenBasis::circulant(std::vector<Complex> lambdas, std::vector<Complex> scales,
                                 bool twisted)
{
  EigenBasis b;
  b.kind_ = BasisKind::CirculantClosedForm;
  b.twisted_ = twisted;
  b.n_ = static_cast<int>(lambdas.size());
  if (scales.size() != lambdas.size())
  {
    throw DimensionError("eigenbasis: inconsistent sizes");
  }
  b.lambdas_ = std::move(lambdas);
  b.scales_ = std::move(scales);
  return b;
}

Complex dft_entry(int n, int k, int l)
{
  return unit_root(static_cast<long long>(k - 1) * (l - 1), n);
}

namespace
{

// First row against the mode exp(i theta_l k): c_11 + c_12 e^{i theta} + c_1n e^{i theta (n-1)}.
std::vector<Complex> circulant_symbol(const TriCornerMatrix &c, bool twisted)
{
  const int n = c.size();
  std::vector<Complex> out(n);
  const Complex c11 = c(0, 0), c1n = c(0, n - 1), c12 = c(0, 1);
  for (int l = 0; l < n; ++l)
  {
    out[l] = c11 + c12 * std::conj(mode_root(1, l, n, twisted)) +
             c1n * std::conj(mode_root(n - 1, l, n, twisted));
  }
  return out;
}

bool require_circulant(const Pencil1D &p)
{
  if (!is_circulant(p.bc))
  {
    throw DimensionError("closed-form circulant eigenpairs need a periodic pencil");
  }
  return p.bc == BoundaryKind::SkewPeriodic;
}

} // namespace

std::vector<Complex> circulant_mass_eigenvalues(const Pencil1D &periodic)
{
  return circulant_symbol(periodic.mass, require_circulant(periodic));
}

std::vector<Complex> circulant_eigenvalues(const Pencil1D &periodic)
{
  const bool twisted = require_circulant(periodic);
  const auto num = circulant_symbol(periodic.stiffness, twisted);
  const auto den = circulant_symbol(periodic.mass, twisted);
  std::vector<Complex> lambdas(num.size());
  for (std::size_t l = 0; l < num.size(); ++l)
  {
    if (std::abs(den[l]) < 1e-14)
    {
      throw EigensolverFailure("degenerate circulant mass eigenvalue at mode " +
                               std::to_string(l + 1));
    }
    lambdas[l] = num[l] / den[l];
  }
  return lambdas;
}

EigenBasis circulant_basis(const Pencil1D &periodic)
{
  auto lambdas = circulant_eigenvalues(periodic);
  const auto mu = circulant_mass_eigenvalues(periodic);
  std::vector<Complex> scales(mu.size());
  for (std::size_t l = 0; l < mu.size(); ++l)
  {
    scales[l] = 1.0 / std::sqrt(mu[l]);
  }
  return EigenBasis::circulant(std::move(lambdas), std::move(scales),
                               periodic.bc == BoundaryKind::SkewPeriodic);
}

std::vector<double> neumann_eigenvalues(int n, double h)
{
  if (n < 2)
  {
    throw DimensionError("Neumann spectrum needs n >= 2");
  }
  std::vector<double> mu(n);
  for (int k = 0; k < n; ++k)
  {
    const double c = std::cos(kTwoPi * 0.5 * k / (n - 1));
    mu[k] = 6.0 * (1.0 - c) / (h * h * (2.0 + c));
  }
  return mu;
}

double relative_spectral_gap(std::span<const Complex> lambdas, Complex shift,
                             std::span<const double> mu)
{
  if (lambdas.empty() || mu.empty())
  {
    throw DimensionError("spectral gap needs non-empty spectra");
  }
  double gap = std::numeric_limits<double>::infinity();
  double spread = 0.0;
  for (const Complex &lam : lambdas)
  {
    const Complex target = shift - lam;
    spread = std::max(spread, std::abs(target));
    const auto it = std::lower_bound(mu.begin(), mu.end(), target.real());
    if (it != mu.end())
    {
      gap = std::min(gap, std::abs(*it - target));
    }
    if (it != mu.begin())
    {
      gap = std::min(gap, std::abs(*(it - 1) - target));
    }
  }
  spread += std::abs(mu.back());
  return spread > 0.0 ? gap / spread : 0.0;
}

BoundaryKind choose_auxiliary(std::span<const Complex> periodic_lambdas,
                              std::span<const Complex> skew_lambdas, Complex shift,
                              std::span<const double> mu)
{
  const double periodic = relative_spectral_gap(periodic_lambdas, shift, mu);
  const double skew = relative_spectral_gap(skew_lambdas, shift, mu);
  return skew > kAuxiliaryGapRatio * periodic ? BoundaryKind::SkewPeriodic
                                              : BoundaryKind::Periodic;
}

BoundaryKind choose_auxiliary(int n, double h, Complex shift, std::span<const double> mu)
{
  return choose_auxiliary(
      circulant_eigenvalues(assemble_auxiliary_pencil(n, h, BoundaryKind::Periodic)),
      circulant_eigenvalues(assemble_auxiliary_pencil(n, h, BoundaryKind::SkewPeriodic)), shift,
      mu);
}

namespace
{

// Unnormalized eigenpairs of a tridiagonal pencil (K, M), M real SPD; vectors column-major.
void raw_pencil_pairs(const TriCornerMatrix &k, const TriCornerMatrix &m,
                      std::vector<Complex> &lambdas, std::vector<Complex> &vecs)
{
  const int n = k.size();
  std::vector<double> ld, ls;
  tridiagonal_cholesky(m, ld, ls);
  bool real_pencil = true;
  for (int i = 0; i < n; ++i)
  {
    real_pencil = real_pencil && k.diag()[i].imag() == 0.0;
  }
  for (const Complex &v : k.off())
  {
    real_pencil = real_pencil && v.imag() == 0.0;
  }
  lambdas.assign(n, 0.0);
  vecs.assign(static_cast<std::size_t>(n) * n, 0.0);
  if (real_pencil)
  {
    auto c = reduce_to_standard<double>(k, ld, ls, &real_part);
    std::vector<double> w(n);
    const lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'U', n, c.data(), n, w.data());
    if (info != 0)
    {
      throw EigensolverFailure("dsyevd failed with info " + std::to_string(info));
    }
    upper_solve_columns(ld, ls, c, n);
    std::copy(w.begin(), w.end(), lambdas.begin());
    std::copy(c.begin(), c.end(), vecs.begin());
    return;
  }
  auto c = reduce_to_standard<Complex>(k, ld, ls, &identity);
  const lapack_int info = LAPACKE_zgeev(
      LAPACK_COL_MAJOR, 'N', 'V', n, reinterpret_cast<lapack_complex_double *>(c.data()), n,
      reinterpret_cast<lapack_complex_double *>(lambdas.data()), nullptr, 1,
      reinterpret_cast<lapack_complex_double *>(vecs.data()), n);
  if (info != 0)
  {
    throw EigensolverFailure("zgeev failed with info " + std::to_string(info));
  }
  upper_solve_columns(ld, ls, vecs, n);
}

bool mirror_symmetric(const TriCornerMatrix &a)
{
  const int n = a.size();
  if (a.corner() != 0.0)
  {
    return false;
  }
  for (int i = 0; i < n; ++i)
  {
    if (a.diag()[i] != a.diag()[n - 1 - i])
    {
      return false;
    }
  }
  for (int i = 0; i + 1 < n; ++i)
  {
    if (a.off()[i] != a.off()[n - 2 - i])
    {
      return false;
    }
  }
  return true;
}

// P^T A P for P with columns e_i + sign e_{n-1-i} (i < n/2), plus e_{n/2} when n is odd and
// sign = +1. Stays tridiagonal.
TriCornerMatrix mirror_half(const TriCornerMatrix &a, double sign)
{
  const int n = a.size();
  const int m = n / 2;
  const bool middle = (n % 2 == 1) && sign > 0.0;
  const int size = m + (middle ? 1 : 0);
  std::vector<Complex> d(size), o(size > 1 ? size - 1 : 0);
  for (int i = 0; i < m; ++i)
  {
    d[i] = 2.0 * a.diag()[i];
  }
  for (int i = 0; i + 1 < m; ++i)
  {
    o[i] = 2.0 * a.off()[i];
  }
  if (n % 2 == 0)
  {
    d[m - 1] += 2.0 * sign * a.off()[m - 1];
  }
  else if (middle)
  {
    d[m] = a.diag()[m];
    o[m - 1] = 2.0 * a.off()[m - 1];
  }
  return TriCornerMatrix(std::move(d), std::move(o));
}

} // namespace

EigenBasis solve_pencil_eigen(const Pencil1D &pencil)
{
  if (is_circulant(pencil.bc))
  {
    throw DimensionError("numeric pencil eigensolve expects an absorbing or Neumann pencil");
  }
  const int n = pencil.stiffness.size();
  if (pencil.mass.size() != n)
  {
    throw DimensionError("pencil matrices differ in size");
  }

  std::vector<Complex> w, vr;
  if (n >= 4 && mirror_symmetric(pencil.stiffness) && mirror_symmetric(pencil.mass))
  {
    // Equal conditions at both ends: eigenvectors are even or odd about the midpoint, so
    // two half-size problems replace one O(n^3) solve.
    w.reserve(n);
    vr.assign(static_cast<std::size_t>(n) * n, 0.0);
    int col = 0;
    for (const double sign : {1.0, -1.0})
    {
      std::vector<Complex> hw, hv;
      raw_pencil_pairs(mirror_half(pencil.stiffness, sign), mirror_half(pencil.mass, sign), hw,
                       hv);
      const int size = static_cast<int>(hw.size());
      for (int l = 0; l < size; ++l, ++col)
      {
        w.push_back(hw[l]);
        Complex *v = vr.data() + static_cast<std::size_t>(col) * n;
        const Complex *y = hv.data() + static_cast<std::size_t>(l) * size;
        for (int i = 0; i < n / 2; ++i)
        {
          v[i] = y[i];
          v[n - 1 - i] = sign * y[i];
        }
        if (size > n / 2)
        {
          v[n / 2] = y[n / 2];
        }
      }
    }
  }
  else
  {
    raw_pencil_pairs(pencil.stiffness, pencil.mass, w, vr);
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return w[a].real() < w[b].real() || (w[a].real() == w[b].real() && w[a].imag() < w[b].imag());
  });
  std::vector<Complex> lambdas(n);
  std::vector<Complex> vecs(static_cast<std::size_t>(n) * n);
  for (int l = 0; l < n; ++l)
  {
    lambdas[l] = w[order[l]];
    std::copy_n(vr.begin() + static_cast<std::ptrdiff_t>(order[l]) * n, n,
                vecs.begin() + static_cast<std::ptrdiff_t>(l) * n);
  }

  // Scale columns to V^T M V = I with the plain (non-conjugating) transpose.
  std::vector<Complex> scales(n);
  std::vector<Complex> mv(n);
  for (int l = 0; l < n; ++l)
  {
    Complex *v = vecs.data() + static_cast<std::size_t>(l) * n;
    pencil.mass.apply_line(v, mv.data(), 1);
    double herm = 0.0;
    for (int k = 0; k < n; ++k)
    {
      herm += (std::conj(v[k]) * mv[k]).real();
    }
    const double unit = 1.0 / std::sqrt(herm);
    Complex tnorm = 0.0;
    for (int k = 0; k < n; ++k)
    {
      v[k] *= unit;
      tnorm += v[k] * mv[k] * unit;
    }
    if (std::abs(tnorm) < 1e-12)
    {
      throw NormalizationFailure("eigenvector " + std::to_string(l + 1) +
                                 " has vanishing T-norm v^T M v");
    }
    scales[l] = 1.0 / std::sqrt(tnorm);
    for (int k = 0; k < n; ++k)
    {
      v[k] *= scales[l];
    }
    // Report the scale relative to the unit M-norm vector.
    scales[l] *= unit;
  }
  return EigenBasis::numeric(std::move(lambdas), std::move(vecs), std::move(scales));
}

void boundary_restricted_product(const EigenBasis &basis, std::span<const Complex> in,
                                 std::span<Complex> out, ProductDirection direction,
                                 std::size_t block)
{
  const int n = basis.size();
  const std::size_t full = static_cast<std::size_t>(n) * block;
  if (direction == ProductDirection::Forward)
  {
    if (in.size() != full || out.size() != 2 * block)
    {
      throw DimensionError("restricted product: expected spectral input of length " +
                           std::to_string(full));
    }
    std::fill(out.begin(), out.end(), Complex(0.0));
    Complex *first = out.data();
    Complex *last = out.data() + block;
    for (int l = 0; l < n; ++l)
    {
      const Complex a = basis.synthesis(0, l);
      const Complex b = basis.synthesis(n - 1, l);
      const Complex *z = in.data() + static_cast<std::size_t>(l) * block;
      for (std::size_t c = 0; c < block; ++c)
      {
        first[c] += a * z[c];
        last[c] += b * z[c];
      }
    }
  }
  else
  {
    if (in.size() != 2 * block || out.size() != full)
    {
      throw DimensionError("restricted product: expected boundary input of length " +
                           std::to_string(2 * block));
    }
    const Complex *first = in.data();
    const Complex *last = in.data() + block;
    for (int l = 0; l < n; ++l)
    {
      const Complex a = basis.analysis(l, 0);
      const Complex b = basis.analysis(l, n - 1);
      Complex *g = out.data() + static_cast<std::size_t>(l) * block;
      for (std::size_t c = 0; c < block; ++c)
      {
        g[c] = a * first[c] + b * last[c];
      }
    }
  }
}

} // namespace helmfft
