#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <memory>
#include <random>
#include <vector>

#include "spectralkit/fft.hpp"

namespace spectralkit {

using cplx = std::complex<double>;
using real_field = std::vector<double>;
using spect_field = std::vector<cplx>;

/// Wavenumber layout, dealias mask and transform plan for a periodic
/// rectangular grid. Immutable after make_grid; shareable across threads.
///
/// Axis conventions: physical arrays are row-major over (n[0], ..., n[d-1]);
/// axis j carries coordinate x_j with x_j(i) = i * L[j] / n[j]. The last axis
/// is the Hermitian (half-stored) one. Wavenumber spacing per axis is
/// 2*pi/L[j]; on full axes the stored order is 0, 1, ..., n/2, -(n/2-1), ..., -1
/// (the Nyquist index maps to +n/2).
struct SpectralGrid {
    int dims = 0;
    std::vector<int> n;
    std::vector<double> L;
    std::vector<double> dx;
    double dealias_coef = 2.0 / 3.0;

    std::vector<int> spect_shape;
    std::size_t phys_size = 0;
    std::size_t spect_size = 0;

    /// k values per axis over the stored spectral extent of that axis.
    std::vector<std::vector<double>> k_axis;
    /// |k|^2 per stored mode, flattened row-major over spect_shape.
    std::vector<double> k_sq;
    /// 1 where the mode survives dealiasing, 0 where it is zeroed.
    std::vector<std::uint8_t> dealias_mask;
    /// Parseval weight per stored mode: 1 on the self-conjugate planes of the
    /// half-stored axis (last-axis index 0 and Nyquist), else 2, so that
    /// mean_j(u_j^2) = sum_k w_k |u_hat_k|^2.
    std::vector<double> parseval_w;
    /// Shell index per stored mode: round(|k| / delta_k).
    std::vector<int> shell;
    int n_shells = 0;
    /// Shell width 2*pi/max(L).
    double delta_k = 0;
    /// Largest |k| over stored modes.
    double k_norm_max = 0;

    std::shared_ptr<const FftPlan> plan;

    /// Padded-to-3D spectral extents (leading axes 1) for generic loops.
    std::array<int, 3> sp3{1, 1, 1};
    /// Padded per-axis k arrays matching sp3.
    std::array<std::vector<double>, 3> kp3;
};

/// Build a grid. Extents must be even and >= 4 (1 to 3 axes), lengths
/// positive, dealias_coef in (0, 1]. Throws ConfigError otherwise.
SpectralGrid make_grid(const std::vector<int>& n, const std::vector<double>& L,
                       double dealias_coef = 2.0 / 3.0);

/// Zero all modes where the mask is false. Idempotent.
void dealias(const SpectralGrid& g, spect_field& uhat);
void dealias(const SpectralGrid& g, cplx* uhat, std::size_t size);

/// d/dx_axis in spectral space: out = i * k_axis * a.
void gradient_component(const SpectralGrid& g, const spect_field& a, int axis,
                        spect_field& out);
std::vector<spect_field> gradient(const SpectralGrid& g, const spect_field& a);

/// sum_d i * k_d * u_d.
spect_field divergence(const SpectralGrid& g, const std::vector<spect_field>& u);

/// i k_x u_y - i k_y u_x (2D grids only).
spect_field curl2d(const SpectralGrid& g, const spect_field& ux, const spect_field& uy);

/// i k x u (3D grids only).
void curl3d(const SpectralGrid& g, const spect_field& vx, const spect_field& vy,
            const spect_field& vz, spect_field& wx, spect_field& wy, spect_field& wz);

/// Leray projection u <- u - k (k.u)/|k|^2; k = 0 mode untouched. Idempotent.
void project_divfree(const SpectralGrid& g, spect_field& ux, spect_field& uy);
void project_divfree(const SpectralGrid& g, spect_field& ux, spect_field& uy,
                     spect_field& uz);

/// Stream-function inversion (2D): psi = w/|k|^2 (0 at k=0), ux = i k_y psi,
/// uy = -i k_x psi. Sign convention: w = dx(uy) - dy(ux) = |k|^2 psi.
void velocity_from_vorticity2d(const SpectralGrid& g, const spect_field& w,
                               spect_field& ux, spect_field& uy);

/// Hermitian-consistent random field with unit-magnitude coefficients on the
/// shells whose center k lies in [k_lo, k_hi], zero elsewhere. Deterministic
/// per engine state; the inverse transform is exactly real.
spect_field random_field(const SpectralGrid& g, std::mt19937_64& rng, double k_lo,
                         double k_hi);
spect_field random_field(const SpectralGrid& g, std::uint64_t seed, double k_lo,
                         double k_hi);

}  // namespace spectralkit
