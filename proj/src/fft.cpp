#include "spectralkit/fft.hpp"

#include <fftw3.h>

#include <cstdlib>
#include <map>
#include <mutex>
#include <string>

namespace spectralkit {

namespace {

std::mutex g_mutex;  // guards planner calls, the cache and the worker setting
int g_requested_workers = 1;
bool g_threads_ready = false;

int env_worker_cap() {
    const char* s = std::getenv("SPECTRALKIT_NUM_THREADS");
    if (!s || !*s) return 0;
    char* end = nullptr;
    long v = std::strtol(s, &end, 10);
    if (end == s || v < 1) return 0;
    return static_cast<int>(v);
}

int resolve_workers_locked() {
    int w = g_requested_workers;
    int cap = env_worker_cap();
    if (cap > 0 && w > cap) w = cap;
    return w < 1 ? 1 : w;
}

void check_shape(const std::vector<int>& shape) {
    if (shape.empty() || shape.size() > 3)
        throw ShapeError("transform rank must be 1..3, got " +
                         std::to_string(shape.size()));
    for (int n : shape) {
        if (n < 4) throw ShapeError("extent " + std::to_string(n) + " too small (min 4)");
        if (n % 2 != 0) throw ShapeError("extent " + std::to_string(n) + " is odd");
    }
}

}  // namespace

int fft_workers() {
    std::lock_guard<std::mutex> lock(g_mutex);
    return resolve_workers_locked();
}

void set_fft_workers(int n) {
    std::lock_guard<std::mutex> lock(g_mutex);
    g_requested_workers = n < 1 ? 1 : n;
}

FftPlan::FftPlan(const std::vector<int>& phys_shape, int workers)
    : phys_shape_(phys_shape), spect_shape_(phys_shape), workers_(workers) {
    spect_shape_.back() = phys_shape.back() / 2 + 1;
    phys_size_ = 1;
    spect_size_ = 1;
    for (std::size_t d = 0; d < phys_shape_.size(); ++d) {
        phys_size_ *= static_cast<std::size_t>(phys_shape_[d]);
        spect_size_ *= static_cast<std::size_t>(spect_shape_[d]);
    }

    if (!g_threads_ready) {
        fftw_init_threads();
        g_threads_ready = true;
    }
    fftw_plan_with_nthreads(workers_);

    // Deterministic planning (same algorithm every run, so state checksums
    // reproduce) on caller-provided unaligned buffers.
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    std::vector<double> ubuf(phys_size_);
    std::vector<std::complex<double>> cbuf(spect_size_);
    int rank = static_cast<int>(phys_shape_.size());
    fwd_ = fftw_plan_dft_r2c(rank, phys_shape_.data(), ubuf.data(),
                             reinterpret_cast<fftw_complex*>(cbuf.data()), flags);
    bwd_ = fftw_plan_dft_c2r(rank, phys_shape_.data(),
                             reinterpret_cast<fftw_complex*>(cbuf.data()),
                             ubuf.data(), flags);
    if (!fwd_ || !bwd_) throw Error("transform planning failed");
}

FftPlan::~FftPlan() {
    std::lock_guard<std::mutex> lock(g_mutex);
    if (fwd_) fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
    if (bwd_) fftw_destroy_plan(static_cast<fftw_plan>(bwd_));
}

void FftPlan::forward(const double* u, std::complex<double>* uhat) const {
    // Out-of-place r2c leaves the input intact.
    fftw_execute_dft_r2c(static_cast<fftw_plan>(fwd_), const_cast<double*>(u),
                         reinterpret_cast<fftw_complex*>(uhat));
    const double scale = 1.0 / static_cast<double>(phys_size_);
    for (std::size_t i = 0; i < spect_size_; ++i) uhat[i] *= scale;
}

void FftPlan::inverse(const std::complex<double>* uhat, double* u) const {
    // Multi-dimensional c2r destroys its input, so synthesize from a copy to
    // keep the out-of-place contract.
    std::vector<std::complex<double>> tmp(uhat, uhat + spect_size_);
    fftw_execute_dft_c2r(static_cast<fftw_plan>(bwd_),
                         reinterpret_cast<fftw_complex*>(tmp.data()), u);
}

void FftPlan::forward(const std::vector<double>& u,
                      std::vector<std::complex<double>>& uhat) const {
    if (u.size() != phys_size_)
        throw ShapeError("forward: field has " + std::to_string(u.size()) +
                         " values, plan expects " + std::to_string(phys_size_));
    uhat.resize(spect_size_);
    forward(u.data(), uhat.data());
}

void FftPlan::inverse(const std::vector<std::complex<double>>& uhat,
                      std::vector<double>& u) const {
    if (uhat.size() != spect_size_)
        throw ShapeError("inverse: field has " + std::to_string(uhat.size()) +
                         " values, plan expects " + std::to_string(spect_size_));
    u.resize(phys_size_);
    inverse(uhat.data(), u.data());
}

std::shared_ptr<const FftPlan> plan_fft(const std::vector<int>& phys_shape) {
    check_shape(phys_shape);
    std::lock_guard<std::mutex> lock(g_mutex);
    int workers = resolve_workers_locked();
    static std::map<std::pair<std::vector<int>, int>, std::shared_ptr<const FftPlan>> cache;
    auto key = std::make_pair(phys_shape, workers);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    std::shared_ptr<const FftPlan> plan(new FftPlan(phys_shape, workers));
    cache.emplace(std::move(key), plan);
    return plan;
}

}  // namespace spectralkit
