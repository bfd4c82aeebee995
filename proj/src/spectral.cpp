#include "uclab/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <mutex>
#include <stdexcept>

namespace uclab {

namespace {
// FFTW plan creation/destruction is not thread-safe.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
} // namespace

struct Spectral::Impl {
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
  double* real = nullptr;
  fftw_complex* spec = nullptr;
  std::size_t nreal = 0;
  std::size_t nspec = 0;
  std::vector<double> eig; // -Lap_h eigenvalue per spectral bin
};

Spectral::Spectral(const Grid& g) : grid_(g), impl_(new Impl) {
  const int n = g.n;
  impl_->nreal = g.node_count();
  impl_->nspec = g.dim == 1 ? static_cast<std::size_t>(n / 2 + 1)
                            : static_cast<std::size_t>(n) * (n / 2 + 1);
  impl_->real = fftw_alloc_real(impl_->nreal);
  impl_->spec = fftw_alloc_complex(impl_->nspec);
  if (!impl_->real || !impl_->spec) throw std::runtime_error("Spectral: allocation failed");
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    if (g.dim == 1) {
      impl_->fwd = fftw_plan_dft_r2c_1d(n, impl_->real, impl_->spec, FFTW_ESTIMATE);
      impl_->bwd = fftw_plan_dft_c2r_1d(n, impl_->spec, impl_->real, FFTW_ESTIMATE);
    } else {
      impl_->fwd = fftw_plan_dft_r2c_2d(n, n, impl_->real, impl_->spec, FFTW_ESTIMATE);
      impl_->bwd = fftw_plan_dft_c2r_2d(n, n, impl_->spec, impl_->real, FFTW_ESTIMATE);
    }
  }
  if (!impl_->fwd || !impl_->bwd) throw std::runtime_error("Spectral: plan creation failed");

  const double ih2 = 1.0 / (g.spacing * g.spacing);
  auto axis_eig = [&](int k) { return 2.0 * ih2 * (1.0 - std::cos(2.0 * M_PI * k / n)); };
  impl_->eig.resize(impl_->nspec);
  if (g.dim == 1) {
    for (int k = 0; k <= n / 2; ++k) impl_->eig[k] = axis_eig(k);
  } else {
    for (int kx = 0; kx < n; ++kx)
      for (int ky = 0; ky <= n / 2; ++ky)
        impl_->eig[static_cast<std::size_t>(kx) * (n / 2 + 1) + ky] = axis_eig(kx) + axis_eig(ky);
  }
}

Spectral::~Spectral() {
  if (impl_) {
    std::lock_guard<std::mutex> lock(planner_mutex());
    if (impl_->fwd) fftw_destroy_plan(impl_->fwd);
    if (impl_->bwd) fftw_destroy_plan(impl_->bwd);
    fftw_free(impl_->real);
    fftw_free(impl_->spec);
    delete impl_;
  }
}

double Spectral::eigenvalue(int kx, int ky) const {
  const int n = grid_.n;
  if (grid_.dim == 1) return impl_->eig[kx];
  return impl_->eig[static_cast<std::size_t>(kx) * (n / 2 + 1) + ky];
}

void Spectral::implicit_heat(const double* in, double dt, double* out) {
  std::memcpy(impl_->real, in, impl_->nreal * sizeof(double));
  fftw_execute(impl_->fwd);
  const double norm = 1.0 / static_cast<double>(impl_->nreal);
  for (std::size_t k = 0; k < impl_->nspec; ++k) {
    const double f = norm / (1.0 + dt * impl_->eig[k]);
    impl_->spec[k][0] *= f;
    impl_->spec[k][1] *= f;
  }
  fftw_execute(impl_->bwd);
  std::memcpy(out, impl_->real, impl_->nreal * sizeof(double));
}

void Spectral::semigroup(const double* in, double t, double* out) {
  if (t < 0.0) throw std::invalid_argument("Spectral::semigroup: negative time");
  std::memcpy(impl_->real, in, impl_->nreal * sizeof(double));
  fftw_execute(impl_->fwd);
  const double norm = 1.0 / static_cast<double>(impl_->nreal);
  for (std::size_t k = 0; k < impl_->nspec; ++k) {
    const double f = norm * std::exp(-t * impl_->eig[k]);
    impl_->spec[k][0] *= f;
    impl_->spec[k][1] *= f;
  }
  fftw_execute(impl_->bwd);
  std::memcpy(out, impl_->real, impl_->nreal * sizeof(double));
}

Field Spectral::semigroup(const Field& f, double t) {
  if (f.grid != grid_) throw std::invalid_argument("Spectral::semigroup: grid mismatch");
  Field out(grid_);
  semigroup(f.v.data(), t, out.v.data());
  return out;
}

} // namespace uclab
