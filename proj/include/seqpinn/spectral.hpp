#pragma once

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "seqpinn/errors.hpp"
#include "seqpinn/grid.hpp"
#include "seqpinn/problems.hpp"

namespace seqpinn {

/// Fraction of the spectrum kept when evaluating nonlinear products: the
/// classical 2/3 rule. The Allen-Cahn cubic in principle calls for 1/2, but
/// the retained modes decay fast enough here that measured self-convergence
/// is identical under either rule, so the common rule is used throughout.
inline double dealias_fraction(const ProblemInfo&) { return 2.0 / 3.0; }

/// Resolutions at which each benchmark passes the 1e-6 amplitude
/// self-consistency gate. The Allen-Cahn initial condition has a derivative
/// jump at the periodic boundary; at 512 modes the early-time solve
/// transiently undershoots the invariant region |u| <= 1 by ~8e-6, so it
/// gets one extra doubling.
inline std::uint32_t default_oracle_nx(const ProblemInfo& info) {
  return info.id == Problem::allen_cahn ? 1024u : 512u;
}
inline double default_oracle_dt(const ProblemInfo&) { return 1e-5; }

namespace detail {

/// Owning wrapper around the FFTW buffers and plans for one resolution.
class FftPair {
 public:
  explicit FftPair(std::uint32_t nx)
      : nx_(nx),
        real_(fftw_alloc_real(nx)),
        cplx_(fftw_alloc_complex(nx / 2 + 1)) {
    if (!real_ || !cplx_) throw numeric_error("spectral: allocation failed");
    fwd_ = fftw_plan_dft_r2c_1d(static_cast<int>(nx), real_, cplx_,
                                FFTW_ESTIMATE);
    bwd_ = fftw_plan_dft_c2r_1d(static_cast<int>(nx), cplx_, real_,
                                FFTW_ESTIMATE);
    if (!fwd_ || !bwd_) throw numeric_error("spectral: FFT planning failed");
  }
  ~FftPair() {
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
    fftw_free(real_);
    fftw_free(cplx_);
  }
  FftPair(const FftPair&) = delete;
  FftPair& operator=(const FftPair&) = delete;

  std::uint32_t nk() const { return nx_ / 2 + 1; }

  /// spectrum of `field` (unnormalized, FFTW convention)
  void forward(const std::vector<double>& field,
               std::vector<std::complex<double>>& spec) {
    for (std::uint32_t i = 0; i < nx_; ++i) real_[i] = field[i];
    fftw_execute(fwd_);
    spec.resize(nk());
    for (std::uint32_t i = 0; i < nk(); ++i)
      spec[i] = {cplx_[i][0], cplx_[i][1]};
  }

  /// field from spectrum, including the 1/nx normalization
  void inverse(const std::vector<std::complex<double>>& spec,
               std::vector<double>& field) {
    for (std::uint32_t i = 0; i < nk(); ++i) {
      cplx_[i][0] = spec[i].real();
      cplx_[i][1] = spec[i].imag();
    }
    fftw_execute(bwd_);
    field.resize(nx_);
    const double scale = 1.0 / static_cast<double>(nx_);
    for (std::uint32_t i = 0; i < nx_; ++i) field[i] = real_[i] * scale;
  }

 private:
  std::uint32_t nx_;
  double* real_;
  fftw_complex* cplx_;
  fftw_plan fwd_, bwd_;
};

}  // namespace detail

/// Fourier pseudospectral discretization in space with fourth-order
/// exponential time differencing (ETDRK4) in time. The phi-function
/// coefficients are evaluated by contour averaging over a full circle of
/// roots of unity, which stays accurate for the purely imaginary dispersive
/// symbols (a half-circle with a real-part projection would not).
inline ReferenceGrid solve_spectral(const ProblemInfo& info, std::uint32_t nx,
                                    double dt, double T,
                                    std::uint32_t frames = 201) {
  if (nx < 256 || (nx & (nx - 1)) != 0)
    throw config_error("spectral: nx must be a power of two >= 256");
  if (!(dt > 0) || !(T > 0)) throw config_error("spectral: dt and T must be > 0");
  if (frames < 2) throw config_error("spectral: need at least two output frames");

  // Land every frame exactly on a step boundary; dt only shrinks.
  const auto spf = static_cast<std::uint64_t>(
      std::ceil(T / (static_cast<double>(frames - 1) * dt) - 1e-9));
  const std::uint64_t steps_per_frame = spf == 0 ? 1 : spf;
  const std::uint64_t nsteps = steps_per_frame * (frames - 1);
  const double h = T / static_cast<double>(nsteps);

  const double span = info.x_hi - info.x_lo;
  const std::uint32_t nk = nx / 2 + 1;

  std::vector<double> k(nk);
  for (std::uint32_t i = 0; i < nk; ++i)
    k[i] = 2.0 * std::numbers::pi * static_cast<double>(i) / span;

  std::vector<std::complex<double>> lsym(nk);
  for (std::uint32_t i = 0; i < nk; ++i) {
    switch (info.id) {
      case Problem::convection:
        lsym[i] = std::complex<double>(0.0, -info.beta * k[i]);
        break;
      case Problem::allen_cahn:
        lsym[i] = std::complex<double>(-info.diffusivity * k[i] * k[i] +
                                           info.reaction,
                                       0.0);
        break;
      case Problem::kdv:
        lsym[i] = std::complex<double>(0.0, info.dispersion * k[i] * k[i] * k[i]);
        break;
    }
  }

  const double kmax = k[nk - 1];
  const double keep = dealias_fraction(info) * kmax;
  std::vector<double> mask(nk);
  for (std::uint32_t i = 0; i < nk; ++i) mask[i] = k[i] <= keep ? 1.0 : 0.0;

  // phi-function coefficients via 64-point contour averages around each h*L.
  constexpr int M = 64;
  std::vector<std::complex<double>> E(nk), E2(nk), Q(nk), f1(nk), f2(nk), f3(nk);
  for (std::uint32_t i = 0; i < nk; ++i) {
    const std::complex<double> z = h * lsym[i];
    E[i] = std::exp(z);
    E2[i] = std::exp(0.5 * z);
    std::complex<double> q = 0, a1 = 0, a2 = 0, a3 = 0;
    for (int j = 0; j < M; ++j) {
      const double th = std::numbers::pi * (2.0 * j + 1.0) / M;
      const std::complex<double> zr = z + std::polar(1.0, th);
      const std::complex<double> ez = std::exp(zr);
      const std::complex<double> zr3 = zr * zr * zr;
      q += (std::exp(0.5 * zr) - 1.0) / zr;
      a1 += (-4.0 - zr + ez * (4.0 - 3.0 * zr + zr * zr)) / zr3;
      a2 += (2.0 + zr + ez * (-2.0 + zr)) / zr3;
      a3 += (-4.0 - 3.0 * zr - zr * zr + ez * (4.0 - zr)) / zr3;
    }
    const double inv = h / static_cast<double>(M);
    Q[i] = q * inv;
    f1[i] = a1 * inv;
    f2[i] = a2 * inv;
    f3[i] = a3 * inv;
  }

  detail::FftPair fft(nx);
  std::vector<double> u0(nx), work(nx);
  for (std::uint32_t i = 0; i < nx; ++i)
    u0[i] = initial_condition(info, info.x_lo + span * i / nx);

  using Spec = std::vector<std::complex<double>>;
  Spec v, na, nb, nc, nv, a, b, c;
  fft.forward(u0, v);

  const bool linear_only = info.id == Problem::convection;
  auto nonlinear = [&](const Spec& state, Spec& out) {
    fft.inverse(state, work);
    if (info.id == Problem::allen_cahn) {
      for (auto& w : work) w = -info.reaction * w * w * w;
      fft.forward(work, out);
    } else {  // kdv: -1/2 d/dx (u^2)
      for (auto& w : work) w = w * w;
      fft.forward(work, out);
      for (std::uint32_t i = 0; i < nk; ++i)
        out[i] *= std::complex<double>(0.0, -0.5 * k[i]);
    }
    for (std::uint32_t i = 0; i < nk; ++i) out[i] *= mask[i];
  };

  ReferenceGrid grid;
  grid.nx = nx;
  grid.nt = frames;
  grid.x_lo = info.x_lo;
  grid.x_hi = info.x_hi;
  grid.t_lo = 0.0;
  grid.t_hi = T;
  grid.problem = problem_name(info.id);
  grid.creation = "spectral nx=" + std::to_string(nx) +
                  " dt=" + std::to_string(h) + " T=" + std::to_string(T) +
                  " frames=" + std::to_string(frames);
  grid.values.resize(static_cast<std::size_t>(nx) * frames);
  for (std::uint32_t i = 0; i < nx; ++i) grid.values[i] = u0[i];

  std::uint64_t step = 0;
  for (std::uint32_t frame = 1; frame < frames; ++frame) {
    for (std::uint64_t s = 0; s < steps_per_frame; ++s, ++step) {
      if (linear_only) {
        for (std::uint32_t i = 0; i < nk; ++i) v[i] *= E[i];
        continue;
      }
      nonlinear(v, nv);
      a.resize(nk);
      b.resize(nk);
      c.resize(nk);
      for (std::uint32_t i = 0; i < nk; ++i) a[i] = E2[i] * v[i] + Q[i] * nv[i];
      nonlinear(a, na);
      for (std::uint32_t i = 0; i < nk; ++i) b[i] = E2[i] * v[i] + Q[i] * na[i];
      nonlinear(b, nb);
      for (std::uint32_t i = 0; i < nk; ++i)
        c[i] = E2[i] * a[i] + Q[i] * (2.0 * nb[i] - nv[i]);
      nonlinear(c, nc);
      for (std::uint32_t i = 0; i < nk; ++i)
        v[i] = E[i] * v[i] + f1[i] * nv[i] + 2.0 * f2[i] * (na[i] + nb[i]) +
               f3[i] * nc[i];
    }
    fft.inverse(v, work);
    double* row = grid.values.data() + static_cast<std::size_t>(frame) * nx;
    for (std::uint32_t i = 0; i < nx; ++i) {
      if (!std::isfinite(work[i]))
        throw instability_error(
            "spectral solve blew up by step " + std::to_string(step) + " (t=" +
            std::to_string(static_cast<double>(step) * h) + ")");
      row[i] = work[i];
    }
  }
  return grid;
}

}  // namespace seqpinn
