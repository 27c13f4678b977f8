#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <vector>

#include "spectralkit/errors.hpp"

namespace spectralkit {

/// Number of worker threads the transform layer will use. Resolution order:
/// explicit set_fft_workers() request, else 1; always capped by the
/// SPECTRALKIT_NUM_THREADS environment variable when it is set.
int fft_workers();
/// Request a worker count for subsequently created plans (>= 1).
void set_fft_workers(int n);

/// Real-to-complex transform plan for one physical shape (1D/2D/3D).
///
/// Normalization: forward includes the 1/N_total factor, so coefficients are
/// mode amplitudes (a unit cosine has coefficient 0.5 in its stored mode).
/// The inverse is the unnormalized Hermitian synthesis: inverse(forward(u)) = u.
/// Both directions are out of place and never modify their input.
class FftPlan {
public:
    ~FftPlan();
    FftPlan(const FftPlan&) = delete;
    FftPlan& operator=(const FftPlan&) = delete;

    const std::vector<int>& phys_shape() const { return phys_shape_; }
    const std::vector<int>& spect_shape() const { return spect_shape_; }
    std::size_t phys_size() const { return phys_size_; }
    std::size_t spect_size() const { return spect_size_; }
    int workers() const { return workers_; }

    void forward(const double* u, std::complex<double>* uhat) const;
    void inverse(const std::complex<double>* uhat, double* u) const;

    /// Size-checked conveniences; outputs are resized.
    void forward(const std::vector<double>& u,
                 std::vector<std::complex<double>>& uhat) const;
    void inverse(const std::vector<std::complex<double>>& uhat,
                 std::vector<double>& u) const;

private:
    friend std::shared_ptr<const FftPlan> plan_fft(const std::vector<int>&);
    explicit FftPlan(const std::vector<int>& phys_shape, int workers);

    std::vector<int> phys_shape_;
    std::vector<int> spect_shape_;
    std::size_t phys_size_ = 0;
    std::size_t spect_size_ = 0;
    int workers_ = 1;
    void* fwd_ = nullptr;  // fftw_plan
    void* bwd_ = nullptr;  // fftw_plan
};

/// Cached plan lookup: repeated requests for the same shape (and worker
/// count) return the same plan object. Extents must be even and >= 4;
/// rank must be 1..3.
std::shared_ptr<const FftPlan> plan_fft(const std::vector<int>& phys_shape);

}  // namespace spectralkit
