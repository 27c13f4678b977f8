#include "spectralkit/grid.hpp"

#include <cmath>
#include <string>

namespace spectralkit {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

void check_spect_size(const SpectralGrid& g, const spect_field& f, const char* what) {
    if (f.size() != g.spect_size)
        throw ShapeError(std::string(what) + ": field has " + std::to_string(f.size()) +
                         " modes, grid expects " + std::to_string(g.spect_size));
}

}  // namespace

SpectralGrid make_grid(const std::vector<int>& n, const std::vector<double>& L,
                       double dealias_coef) {
    if (n.empty() || n.size() > 3)
        throw ConfigError("grid rank must be 1..3, got " + std::to_string(n.size()));
    if (L.size() != n.size())
        throw ConfigError("grid has " + std::to_string(n.size()) + " extents but " +
                          std::to_string(L.size()) + " lengths");
    for (int e : n) {
        if (e < 4) throw ConfigError("extent " + std::to_string(e) + " too small (min 4)");
        if (e % 2 != 0) throw ConfigError("extent " + std::to_string(e) + " is odd");
    }
    for (double l : L)
        if (!(l > 0)) throw ConfigError("domain length must be positive");
    if (!(dealias_coef > 0.0) || dealias_coef > 1.0)
        throw ConfigError("dealias_coef must be in (0, 1]");

    SpectralGrid g;
    g.dims = static_cast<int>(n.size());
    g.n = n;
    g.L = L;
    g.dealias_coef = dealias_coef;
    g.plan = plan_fft(n);
    g.spect_shape = g.plan->spect_shape();
    g.phys_size = g.plan->phys_size();
    g.spect_size = g.plan->spect_size();

    g.dx.resize(g.dims);
    g.k_axis.resize(g.dims);
    double Lmax = 0;
    for (int d = 0; d < g.dims; ++d) {
        g.dx[d] = L[d] / n[d];
        Lmax = std::max(Lmax, L[d]);
        double spacing = kTwoPi / L[d];
        int extent = g.spect_shape[d];
        auto& ks = g.k_axis[d];
        ks.resize(extent);
        if (d == g.dims - 1) {
            for (int i = 0; i < extent; ++i) ks[i] = spacing * i;
        } else {
            for (int i = 0; i < extent; ++i) {
                int signed_i = i <= n[d] / 2 ? i : i - n[d];
                ks[i] = spacing * signed_i;
            }
        }
    }
    g.delta_k = kTwoPi / Lmax;

    for (int j = 0; j < 3; ++j) {
        g.sp3[j] = 1;
        g.kp3[j] = {0.0};
    }
    int pad = 3 - g.dims;
    for (int d = 0; d < g.dims; ++d) {
        g.sp3[pad + d] = g.spect_shape[d];
        g.kp3[pad + d] = g.k_axis[d];
    }

    g.k_sq.resize(g.spect_size);
    g.dealias_mask.resize(g.spect_size);
    g.parseval_w.resize(g.spect_size);
    g.shell.resize(g.spect_size);

    std::vector<double> kcut(g.dims);
    for (int d = 0; d < g.dims; ++d)
        kcut[d] = dealias_coef * (kTwoPi / L[d]) * (n[d] / 2);

    int last_extent = g.spect_shape[g.dims - 1];
    std::size_t idx = 0;
    for (int i0 = 0; i0 < g.sp3[0]; ++i0) {
        for (int i1 = 0; i1 < g.sp3[1]; ++i1) {
            for (int i2 = 0; i2 < g.sp3[2]; ++i2, ++idx) {
                double k0 = g.kp3[0][i0], k1 = g.kp3[1][i1], k2 = g.kp3[2][i2];
                double ksq = k0 * k0 + k1 * k1 + k2 * k2;
                g.k_sq[idx] = ksq;
                double knorm = std::sqrt(ksq);
                g.k_norm_max = std::max(g.k_norm_max, knorm);
                g.shell[idx] = static_cast<int>(std::llround(knorm / g.delta_k));
                bool keep = true;
                int ip[3] = {i0, i1, i2};
                for (int d = 0; d < g.dims; ++d)
                    if (std::abs(g.k_axis[d][ip[pad + d]]) > kcut[d]) keep = false;
                g.dealias_mask[idx] = keep ? 1 : 0;
                // Self-conjugate planes of the half-stored axis: index 0 and Nyquist.
                int ilast = i2;  // last padded axis is always the real last axis
                g.parseval_w[idx] = (ilast == 0 || ilast == last_extent - 1) ? 1.0 : 2.0;
            }
        }
    }
    g.n_shells = static_cast<int>(std::llround(g.k_norm_max / g.delta_k)) + 1;
    return g;
}

void dealias(const SpectralGrid& g, cplx* uhat, std::size_t size) {
    if (size != g.spect_size)
        throw ShapeError("dealias: field size " + std::to_string(size) +
                         " does not match grid");
    for (std::size_t i = 0; i < g.spect_size; ++i)
        if (!g.dealias_mask[i]) uhat[i] = 0.0;
}

void dealias(const SpectralGrid& g, spect_field& uhat) {
    dealias(g, uhat.data(), uhat.size());
}

void gradient_component(const SpectralGrid& g, const spect_field& a, int axis,
                        spect_field& out) {
    check_spect_size(g, a, "gradient");
    if (axis < 0 || axis >= g.dims)
        throw ShapeError("gradient: axis " + std::to_string(axis) + " out of range");
    out.resize(g.spect_size);
    int pad = 3 - g.dims;
    int paxis = pad + axis;
    std::size_t idx = 0;
    for (int i0 = 0; i0 < g.sp3[0]; ++i0) {
        for (int i1 = 0; i1 < g.sp3[1]; ++i1) {
            for (int i2 = 0; i2 < g.sp3[2]; ++i2, ++idx) {
                int ip[3] = {i0, i1, i2};
                double k = g.kp3[paxis][ip[paxis]];
                // i*k*a
                out[idx] = cplx(-k * a[idx].imag(), k * a[idx].real());
            }
        }
    }
}

std::vector<spect_field> gradient(const SpectralGrid& g, const spect_field& a) {
    std::vector<spect_field> out(g.dims);
    for (int d = 0; d < g.dims; ++d) gradient_component(g, a, d, out[d]);
    return out;
}

spect_field divergence(const SpectralGrid& g, const std::vector<spect_field>& u) {
    if (static_cast<int>(u.size()) != g.dims)
        throw ShapeError("divergence: expected " + std::to_string(g.dims) +
                         " components, got " + std::to_string(u.size()));
    spect_field out(g.spect_size, 0.0);
    spect_field tmp;
    for (int d = 0; d < g.dims; ++d) {
        gradient_component(g, u[d], d, tmp);
        for (std::size_t i = 0; i < g.spect_size; ++i) out[i] += tmp[i];
    }
    return out;
}

spect_field curl2d(const SpectralGrid& g, const spect_field& ux, const spect_field& uy) {
    if (g.dims != 2) throw ShapeError("curl2d requires a 2D grid");
    check_spect_size(g, ux, "curl2d");
    check_spect_size(g, uy, "curl2d");
    spect_field out(g.spect_size);
    std::size_t idx = 0;
    for (int i0 = 0; i0 < g.spect_shape[0]; ++i0) {
        double kx = g.k_axis[0][i0];
        for (int i1 = 0; i1 < g.spect_shape[1]; ++i1, ++idx) {
            double ky = g.k_axis[1][i1];
            // i kx uy - i ky ux
            out[idx] = cplx(-kx * uy[idx].imag() + ky * ux[idx].imag(),
                            kx * uy[idx].real() - ky * ux[idx].real());
        }
    }
    return out;
}

void curl3d(const SpectralGrid& g, const spect_field& vx, const spect_field& vy,
            const spect_field& vz, spect_field& wx, spect_field& wy, spect_field& wz) {
    if (g.dims != 3) throw ShapeError("curl3d requires a 3D grid");
    check_spect_size(g, vx, "curl3d");
    check_spect_size(g, vy, "curl3d");
    check_spect_size(g, vz, "curl3d");
    wx.resize(g.spect_size);
    wy.resize(g.spect_size);
    wz.resize(g.spect_size);
    auto icross = [](double k, const cplx& v) {
        return cplx(-k * v.imag(), k * v.real());
    };
    std::size_t idx = 0;
    for (int i0 = 0; i0 < g.spect_shape[0]; ++i0) {
        double kx = g.k_axis[0][i0];
        for (int i1 = 0; i1 < g.spect_shape[1]; ++i1) {
            double ky = g.k_axis[1][i1];
            for (int i2 = 0; i2 < g.spect_shape[2]; ++i2, ++idx) {
                double kz = g.k_axis[2][i2];
                wx[idx] = icross(ky, vz[idx]) - icross(kz, vy[idx]);
                wy[idx] = icross(kz, vx[idx]) - icross(kx, vz[idx]);
                wz[idx] = icross(kx, vy[idx]) - icross(ky, vx[idx]);
            }
        }
    }
}

void project_divfree(const SpectralGrid& g, spect_field& ux, spect_field& uy) {
    if (g.dims != 2) throw ShapeError("project_divfree(ux, uy) requires a 2D grid");
    check_spect_size(g, ux, "project_divfree");
    check_spect_size(g, uy, "project_divfree");
    std::size_t idx = 0;
    for (int i0 = 0; i0 < g.spect_shape[0]; ++i0) {
        double kx = g.k_axis[0][i0];
        for (int i1 = 0; i1 < g.spect_shape[1]; ++i1, ++idx) {
            double ky = g.k_axis[1][i1];
            double ksq = g.k_sq[idx];
            if (ksq == 0.0) continue;
            cplx s = (kx * ux[idx] + ky * uy[idx]) / ksq;
            ux[idx] -= kx * s;
            uy[idx] -= ky * s;
        }
    }
}

void project_divfree(const SpectralGrid& g, spect_field& ux, spect_field& uy,
                     spect_field& uz) {
    if (g.dims != 3) throw ShapeError("project_divfree(ux, uy, uz) requires a 3D grid");
    check_spect_size(g, ux, "project_divfree");
    check_spect_size(g, uy, "project_divfree");
    check_spect_size(g, uz, "project_divfree");
    std::size_t idx = 0;
    for (int i0 = 0; i0 < g.spect_shape[0]; ++i0) {
        double kx = g.k_axis[0][i0];
        for (int i1 = 0; i1 < g.spect_shape[1]; ++i1) {
            double ky = g.k_axis[1][i1];
            for (int i2 = 0; i2 < g.spect_shape[2]; ++i2, ++idx) {
                double kz = g.k_axis[2][i2];
                double ksq = g.k_sq[idx];
                if (ksq == 0.0) continue;
                cplx s = (kx * ux[idx] + ky * uy[idx] + kz * uz[idx]) / ksq;
                ux[idx] -= kx * s;
                uy[idx] -= ky * s;
                uz[idx] -= kz * s;
            }
        }
    }
}

void velocity_from_vorticity2d(const SpectralGrid& g, const spect_field& w,
                               spect_field& ux, spect_field& uy) {
    if (g.dims != 2) throw ShapeError("velocity_from_vorticity2d requires a 2D grid");
    check_spect_size(g, w, "velocity_from_vorticity2d");
    ux.resize(g.spect_size);
    uy.resize(g.spect_size);
    std::size_t idx = 0;
    for (int i0 = 0; i0 < g.spect_shape[0]; ++i0) {
        double kx = g.k_axis[0][i0];
        for (int i1 = 0; i1 < g.spect_shape[1]; ++i1, ++idx) {
            double ky = g.k_axis[1][i1];
            double ksq = g.k_sq[idx];
            if (ksq == 0.0) {
                // Mean flow is not recoverable from vorticity; set to zero.
                ux[idx] = 0.0;
                uy[idx] = 0.0;
                continue;
            }
            cplx psi = w[idx] / ksq;
            ux[idx] = cplx(-ky * psi.imag(), ky * psi.real());    // i ky psi
            uy[idx] = cplx(kx * psi.imag(), -kx * psi.real());    // -i kx psi
        }
    }
}

spect_field random_field(const SpectralGrid& g, std::mt19937_64& rng, double k_lo,
                         double k_hi) {
    if (!(k_lo >= 0) || !(k_hi > k_lo))
        throw ConfigError("random_field: need 0 <= k_lo < k_hi");
    if (k_lo > g.k_norm_max)
        throw ConfigError("random_field: band lies above the largest resolved |k|");

    // White noise in physical space guarantees Hermitian-consistent
    // coefficients (real inverse) after the forward transform; the band
    // filter and per-mode magnitude normalization preserve that symmetry.
    real_field noise(g.phys_size);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (auto& v : noise) v = gauss(rng);

    spect_field uhat;
    g.plan->forward(noise, uhat);

    std::size_t kept = 0;
    for (std::size_t i = 0; i < g.spect_size; ++i) {
        double kc = g.shell[i] * g.delta_k;  // shell center
        if (kc < k_lo || kc > k_hi) {
            uhat[i] = 0.0;
            continue;
        }
        double mag = std::abs(uhat[i]);
        if (mag > 1e-300) uhat[i] /= mag;  // unit magnitude, phase kept
        ++kept;
    }
    if (kept == 0) throw ConfigError("random_field: band [k_lo, k_hi] selects no modes");
    return uhat;
}

spect_field random_field(const SpectralGrid& g, std::uint64_t seed, double k_lo,
                         double k_hi) {
    std::mt19937_64 rng(seed);
    return random_field(g, rng, k_lo, k_hi);
}

}  // namespace spectralkit
