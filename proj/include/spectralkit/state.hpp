#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spectralkit/grid.hpp"
#include "spectralkit/time_stepping.hpp"

namespace spectralkit {

// Supplies derived fields that are not part of the prognostic state
// (e.g. velocity components reconstructed from vorticity).
class ComputableProvider {
public:
    virtual ~ComputableProvider() = default;
    virtual std::vector<std::string> keys_computable() const = 0;
    virtual void compute_field(const std::string& key, real_field& out) = 0;
};

// Container pairing each spectral prognostic variable with its physical
// counterpart.  The spectral side is canonical; physical fields are a
// cache regenerated by inverse transform whenever the spectral side has
// been touched since the last read.
class StateSet {
public:
    // keys_spect[i] must be keys_phys[i] + "_fft".
    StateSet(const SpectralGrid& grid, std::vector<std::string> keys_phys,
             std::vector<std::string> keys_spect);

    const std::vector<std::string>& keys_state_phys() const { return keys_phys_; }
    const std::vector<std::string>& keys_state_spect() const { return keys_spect_; }
    std::vector<std::string> keys_computable() const;

    std::size_t n_vars() const { return spect_.size(); }
    const SpectralGrid& grid() const { return *grid_; }

    // Canonical storage, ordered as keys_state_spect.  The mutable
    // accessor conservatively invalidates the physical cache.
    const StateVec& spect() const { return spect_; }
    StateVec& spect_mut() {
        ++version_;
        return spect_;
    }
    const std::vector<cplx>& var_spect(const std::string& key) const;
    std::vector<cplx>& var_spect_mut(const std::string& key);

    // Physical view of one prognostic variable; transforms on demand.
    const real_field& var_phys(const std::string& key);

    // Replaces one variable from physical values (forward transform).
    void load_phys(const std::string& key, const real_field& values);

    // Replaces every variable at once, keeping the given values as the
    // physical view verbatim (snapshot reloads stay bit-exact).
    void load_phys_all_trusted(const std::vector<real_field>& values);

    // Copies a physical or computable field into out.
    void compute_field(const std::string& key, real_field& out);

    bool is_phys_key(const std::string& key) const;

    // Monotone counter; bumps on every mutation of the spectral side.
    std::uint64_t version() const { return version_; }

    void set_provider(ComputableProvider* p) { provider_ = p; }
    void set_timers(KernelTimers* t) { timers_ = t; }

private:
    std::size_t index_of(const std::string& key) const;
    void refresh_phys();

    const SpectralGrid* grid_;
    std::vector<std::string> keys_phys_;
    std::vector<std::string> keys_spect_;
    StateVec spect_;
    std::vector<real_field> phys_cache_;
    std::uint64_t version_ = 1;
    std::uint64_t phys_version_ = 0;
    ComputableProvider* provider_ = nullptr;
    KernelTimers* timers_ = nullptr;
};

}  // namespace spectralkit
