#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "spectralkit/params.hpp"

namespace spectralkit {

// Role order is fixed; every solver descriptor fills all seven slots.
inline constexpr std::array<const char*, 7> solver_class_roles = {
    "Operators",  "State",   "TimeStepping", "InitFields",
    "Forcing",    "Output",  "Preprocess"};

// Descriptor naming the component classes a solver is assembled from,
// plus the state-variable key lists.  Printable as a nested tree and
// parseable back without loss.
struct SolverInfo {
    std::string short_name;
    int dims = 2;
    // role -> component id, in solver_class_roles order.
    std::vector<std::pair<std::string, std::string>> classes;
    std::vector<std::string> keys_state_phys;
    std::vector<std::string> keys_state_spect;
    std::vector<std::string> keys_computable;

    const std::string& class_id(const std::string& role) const;

    ParamTree to_tree() const;
    static SolverInfo from_tree(const ParamTree& tree);

    std::string print() const;
    static SolverInfo parse(const std::string& text);

    bool operator==(const SolverInfo&) const = default;
};

// Component ids referenced by a SolverInfo must be registered here.
// Built-in ids are pre-registered; registering a solver adds its ids.
bool component_id_known(const std::string& id);
void register_component_id(const std::string& id);

// Throws ConfigError on missing roles, unknown component ids, bad dims,
// or inconsistent key lists.
void validate_solver_info(const SolverInfo& info);

}  // namespace spectralkit
