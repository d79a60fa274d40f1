#include <fftw3.h>

#include <cmath>
#include <mutex>

#include "helmfft/spectral.hpp"

namespace helmfft
{

namespace
{

// FFTW planning is not thread-safe; execution of an existing plan is.
std::mutex &planner_mutex()
{
  static std::mutex m;
  return m;
}

fftw_complex *as_fftw(Complex *p) { return reinterpret_cast<fftw_complex *>(p); }

// Line k times factor[k] (or its conjugate).
void scale_lines(std::span<Complex> x, std::size_t block, const std::vector<Complex> &factor,
                 bool conjugate)
{
  for (std::size_t k = 0; k < factor.size(); ++k)
  {
    const Complex s = conjugate ? std::conj(factor[k]) : factor[k];
    Complex *line = x.data() + k * block;
    for (std::size_t c = 0; c < block; ++c)
    {
      line[c] *= s;
    }
  }
}

} // namespace

struct LineTransformPlan::Plans
{
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;

  ~Plans()
  {
    std::lock_guard lock(planner_mutex());
    if (forward)
    {
      fftw_destroy_plan(forward);
    }
    if (backward)
    {
      fftw_destroy_plan(backward);
    }
  }
};

LineTransformPlan::LineTransformPlan(int n, std::size_t block, bool twisted)
  : n_(n), block_(block), plans_(std::make_unique<Plans>())
{
  if (n < 1 || block < 1)
  {
    throw DimensionError("line transform needs positive length and block");
  }
  if (twisted)
  {
    twist_.resize(n);
    for (int k = 0; k < n; ++k)
    {
      const double theta = 3.141592653589793238462643383279 * k / n;
      twist_[k] = Complex(std::cos(theta), -std::sin(theta));
    }
  }
  const int len[1] = {n};
  const int howmany = static_cast<int>(block);
  const int stride = static_cast<int>(block);
  // FFTW_ESTIMATE never touches the arrays, so a small buffer marks the plan as in-place.
  // Estimated plans also keep results bitwise reproducible across processes.
  auto *probe = fftw_alloc_complex(1);
  std::lock_guard lock(planner_mutex());
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  plans_->forward = fftw_plan_many_dft(1, len, howmany, probe, nullptr, stride, 1, probe, nullptr,
                                       stride, 1, FFTW_FORWARD, flags);
  plans_->backward = fftw_plan_many_dft(1, len, howmany, probe, nullptr, stride, 1, probe,
                                        nullptr, stride, 1, FFTW_BACKWARD, flags);
  fftw_free(probe);
  if (!plans_->forward || !plans_->backward)
  {
    throw Error("FFTW failed to create a line transform plan");
  }
}

LineTransformPlan::~LineTransformPlan() = default;
LineTransformPlan::LineTransformPlan(LineTransformPlan &&) noexcept = default;
LineTransformPlan &LineTransformPlan::operator=(LineTransformPlan &&) noexcept = default;

void LineTransformPlan::forward(std::span<Complex> x, std::span<const Complex> scales) const
{
  const std::size_t total = static_cast<std::size_t>(n_) * block_;
  if (x.size() != total || (!scales.empty() && scales.size() != static_cast<std::size_t>(n_)))
  {
    throw DimensionError("forward line transform: length " + std::to_string(x.size()) +
                         ", expected " + std::to_string(total));
  }
  if (!twist_.empty())
  {
    scale_lines(x, block_, twist_, false);
  }
  fftw_execute_dft(plans_->forward, as_fftw(x.data()), as_fftw(x.data()));
  if (!scales.empty())
  {
    for (int l = 0; l < n_; ++l)
    {
      Complex *line = x.data() + static_cast<std::size_t>(l) * block_;
      const Complex s = scales[l];
      for (std::size_t c = 0; c < block_; ++c)
      {
        line[c] *= s;
      }
    }
  }
}

void LineTransformPlan::inverse(std::span<Complex> x, std::span<const Complex> scales) const
{
  const std::size_t total = static_cast<std::size_t>(n_) * block_;
  if (x.size() != total || (!scales.empty() && scales.size() != static_cast<std::size_t>(n_)))
  {
    throw DimensionError("inverse line transform: length " + std::to_string(x.size()) +
                         ", expected " + std::to_string(total));
  }
  const double inv_n = 1.0 / n_;
  for (int l = 0; l < n_; ++l)
  {
    Complex *line = x.data() + static_cast<std::size_t>(l) * block_;
    const Complex s = scales.empty() ? Complex(inv_n) : scales[l] * inv_n;
    for (std::size_t c = 0; c < block_; ++c)
    {
      line[c] *= s;
    }
  }
  fftw_execute_dft(plans_->backward, as_fftw(x.data()), as_fftw(x.data()));
  if (!twist_.empty())
  {
    scale_lines(x, block_, twist_, true);
  }
}

FieldVector forward_line_transform(const LineTransformPlan &plan, std::span<const Complex> x,
                                   std::span<const Complex> scales)
{
  FieldVector y(x.begin(), x.end());
  plan.forward(y, scales);
  return y;
}

FieldVector inverse_line_transform(const LineTransformPlan &plan, std::span<const Complex> x,
                                   std::span<const Complex> scales)
{
  FieldVector y(x.begin(), x.end());
  plan.inverse(y, scales);
  return y;
}

} // namespace helmfft
