#include "spectralkit/state.hpp"

#include <algorithm>

#include "spectralkit/errors.hpp"

namespace spectralkit {

StateSet::StateSet(const SpectralGrid& grid, std::vector<std::string> keys_phys,
                   std::vector<std::string> keys_spect)
    : grid_(&grid), keys_phys_(std::move(keys_phys)), keys_spect_(std::move(keys_spect)) {
    if (keys_phys_.empty() || keys_phys_.size() != keys_spect_.size())
        throw ConfigError("state keys: need matching non-empty phys/spect lists");
    for (std::size_t i = 0; i < keys_phys_.size(); ++i)
        if (keys_spect_[i] != keys_phys_[i] + "_fft")
            throw ConfigError("state keys: '" + keys_spect_[i] + "' does not pair with '" +
                              keys_phys_[i] + "'");
    spect_.assign(keys_phys_.size(), std::vector<cplx>(grid_->spect_size, cplx(0.0, 0.0)));
    phys_cache_.assign(keys_phys_.size(), real_field(grid_->phys_size, 0.0));
}

std::vector<std::string> StateSet::keys_computable() const {
    return provider_ ? provider_->keys_computable() : std::vector<std::string>{};
}

std::size_t StateSet::index_of(const std::string& key) const {
    for (std::size_t i = 0; i < keys_phys_.size(); ++i)
        if (keys_phys_[i] == key || keys_spect_[i] == key) return i;
    throw ConfigError("unknown state variable '" + key + "'");
}

bool StateSet::is_phys_key(const std::string& key) const {
    return std::find(keys_phys_.begin(), keys_phys_.end(), key) != keys_phys_.end();
}

const std::vector<cplx>& StateSet::var_spect(const std::string& key) const {
    return spect_[index_of(key)];
}

std::vector<cplx>& StateSet::var_spect_mut(const std::string& key) {
    ++version_;
    return spect_[index_of(key)];
}

void StateSet::refresh_phys() {
    if (phys_version_ == version_) return;
    KernelTimers::Scope scope(timers_, "fft");
    for (std::size_t i = 0; i < spect_.size(); ++i)
        grid_->plan->inverse(spect_[i], phys_cache_[i]);
    phys_version_ = version_;
}

const real_field& StateSet::var_phys(const std::string& key) {
    std::size_t i = index_of(key);
    refresh_phys();
    return phys_cache_[i];
}

void StateSet::load_phys(const std::string& key, const real_field& values) {
    std::size_t i = index_of(key);
    if (values.size() != static_cast<std::size_t>(grid_->phys_size))
        throw ShapeError("load_phys: field size mismatch for '" + key + "'");
    {
        KernelTimers::Scope scope(timers_, "fft");
        grid_->plan->forward(values, spect_[i]);
    }
    // The cache may now mix old and new fields; drop it wholesale.
    ++version_;
}

void StateSet::load_phys_all_trusted(const std::vector<real_field>& values) {
    if (values.size() != spect_.size())
        throw ShapeError("load_phys_all_trusted: wrong variable count");
    for (const auto& v : values)
        if (v.size() != static_cast<std::size_t>(grid_->phys_size))
            throw ShapeError("load_phys_all_trusted: field size mismatch");
    {
        KernelTimers::Scope scope(timers_, "fft");
        for (std::size_t i = 0; i < spect_.size(); ++i)
            grid_->plan->forward(values[i], spect_[i]);
    }
    phys_cache_ = values;
    phys_version_ = ++version_;
}

void StateSet::compute_field(const std::string& key, real_field& out) {
    if (is_phys_key(key)) {
        out = var_phys(key);
        return;
    }
    if (provider_) {
        auto keys = provider_->keys_computable();
        if (std::find(keys.begin(), keys.end(), key) != keys.end()) {
            provider_->compute_field(key, out);
            return;
        }
    }
    throw ConfigError("unknown state variable '" + key + "'");
}

}  // namespace spectralkit
