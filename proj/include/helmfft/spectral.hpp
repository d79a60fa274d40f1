#pragma once

// Eigenbases of 1D pencils and the batched transforms along x_1 lines.
//
// Every basis is described by a synthesis matrix S and an analysis matrix T with
//
//   (K - s M)^{-1} = S diag(1 / (lambda_l - s)) T,
//
// so a separable operator whose x_1 factor is (K - s M) ⊗ X + M ⊗ Y has the inverse
// (S ⊗ I) H^{-1} (T ⊗ I) with block-diagonal H, H_l = (lambda_l - s) X + Y.
//
// NumericPencil bases store V normalized to V^T M V = I, so S = V and T = V^T.
// CirculantClosedForm bases use the DFT: T = diag(scales) F and S = (1/n) conj(F) diag(scales)
// with F_{lk} = exp(-i theta_l (k-1)), theta_l = 2 pi (l-1) / n, and scales_l = mu_l^{-1/2},
// mu_l being the eigenvalues of the circulant mass matrix. Skew-periodic (twisted) bases use
// theta_l = (2 (l-1) + 1) pi / n, i.e. a DFT after multiplying entry k by exp(-i pi (k-1) / n).
// These are exactly the forward and inverse line transforms below.

#include <memory>
#include <span>
#include <vector>

#include "helmfft/assembly.hpp"
#include "helmfft/core.hpp"

namespace helmfft
{

enum class BasisKind
{
  NumericPencil,
  CirculantClosedForm
};

class EigenBasis
{
public:
  EigenBasis() = default;

  BasisKind kind() const { return kind_; }
  int size() const { return n_; }
  const std::vector<Complex> &lambdas() const { return lambdas_; }
  const std::vector<Complex> &scales() const { return scales_; }
  bool twisted() const { return twisted_; }

  // Normalized eigenvector matrix entry V(k, l), 0-based; NumericPencil only.
  Complex vector(int k, int l) const { return vectors_[static_cast<std::size_t>(l) * n_ + k]; }

  // 0-based entries of S and T.
  Complex synthesis(int k, int l) const;
  Complex analysis(int l, int k) const;

  static EigenBasis numeric(std::vector<Complex> lambdas, std::vector<Complex> vectors,
                            std::vector<Complex> scales);
  static EigenBasis circulant(std::vector<Complex> lambdas, std::vector<Complex> scales,
                              bool twisted = false);

private:
  BasisKind kind_ = BasisKind::NumericPencil;
  bool twisted_ = false;
  int n_ = 0;
  std::vector<Complex> lambdas_;
  std::vector<Complex> vectors_; // column-major, columns normalized
  std::vector<Complex> scales_;
};

// Lambda^B_l of a periodic or skew-periodic pencil from its first rows.
std::vector<Complex> circulant_eigenvalues(const Pencil1D &periodic);

// Eigenvalues of the circulant mass matrix (denominators of the above).
std::vector<Complex> circulant_mass_eigenvalues(const Pencil1D &periodic);

// Closed-form eigenvalues of the Neumann pencil, ascending:
// 6 (1 - cos t_k) / (h^2 (2 + cos t_k)), t_k = k pi / (n - 1).
std::vector<double> neumann_eigenvalues(int n, double h);

// min over l, k of |lambda_l - shift + mu_k| divided by max_l |lambda_l - shift| + max_k mu_k:
// roughly the inverse condition number of the block system built from these spectra.
// mu must be sorted ascending.
double relative_spectral_gap(std::span<const Complex> lambdas, Complex shift,
                             std::span<const double> mu);

// Periodic unless the skew-periodic auxiliary has a relative gap more than
// kAuxiliaryGapRatio times larger. mu: sorted spectrum of the trailing-direction operator.
inline constexpr double kAuxiliaryGapRatio = 4.0;
BoundaryKind choose_auxiliary(int n, double h, Complex shift, std::span<const double> mu);
BoundaryKind choose_auxiliary(std::span<const Complex> periodic_lambdas,
                              std::span<const Complex> skew_lambdas, Complex shift,
                              std::span<const double> mu);

// exp(-2 pi i (k-1)(l-1) / n), 1-based.
Complex dft_entry(int n, int k, int l);

// Full generalized eigendecomposition K V = M V Lambda of an Absorbing or Neumann pencil,
// columns scaled by s_l = (V_l^T M V_l)^{-1/2}.
EigenBasis solve_pencil_eigen(const Pencil1D &pencil);

// Closed-form DFT basis of a periodic or skew-periodic pencil.
EigenBasis circulant_basis(const Pencil1D &periodic);

// Length-n transforms over `block` interleaved lines: element (l, c) sits at l * block + c.
class LineTransformPlan
{
public:
  LineTransformPlan(int n, std::size_t block, bool twisted = false);
  ~LineTransformPlan();
  LineTransformPlan(LineTransformPlan &&) noexcept;
  LineTransformPlan &operator=(LineTransformPlan &&) noexcept;
  LineTransformPlan(const LineTransformPlan &) = delete;
  LineTransformPlan &operator=(const LineTransformPlan &) = delete;

  int length() const { return n_; }
  std::size_t block() const { return block_; }
  bool twisted() const { return !twist_.empty(); }

  // x <- diag(scales) F x (unnormalized DFT per line, then optional per-mode scaling).
  void forward(std::span<Complex> x, std::span<const Complex> scales = {}) const;

  // x <- (1/n) conj(F) diag(scales) x.
  void inverse(std::span<Complex> x, std::span<const Complex> scales = {}) const;

private:
  struct Plans;
  int n_ = 0;
  std::size_t block_ = 0;
  std::vector<Complex> twist_; // exp(-i pi k / n) when twisted
  std::unique_ptr<Plans> plans_;
};

FieldVector forward_line_transform(const LineTransformPlan &plan, std::span<const Complex> x,
                                   std::span<const Complex> scales = {});
FieldVector inverse_line_transform(const LineTransformPlan &plan, std::span<const Complex> x,
                                   std::span<const Complex> scales = {});

enum class ProductDirection
{
  Forward, // spectral (n * block) -> boundary planes (2 * block): rows {1, n} of S
  Adjoint  // boundary planes (2 * block) -> spectral (n * block): columns {1, n} of T
};

void boundary_restricted_product(const EigenBasis &basis, std::span<const Complex> in,
                                 std::span<Complex> out, ProductDirection direction,
                                 std::size_t block);

} // namespace helmfft
