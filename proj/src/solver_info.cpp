#include "spectralkit/solver_info.hpp"

#include <algorithm>
#include <mutex>
#include <set>
#include <sstream>

#include "spectralkit/errors.hpp"

namespace spectralkit {

namespace {

std::mutex g_component_mutex;

std::set<std::string>& component_table() {
    static std::set<std::string> table = {
        "operators.spectral_1d", "operators.spectral_2d", "operators.spectral_3d",
        "state.trivial",         "state.ad1d",            "state.ns2d",
        "state.ns3d",            "time_stepping.exact_lin_rk",
        "init_fields.full",      "forcing.random_band",   "output.standard",
        "preprocess.standard"};
    return table;
}

std::string join_keys(const std::vector<std::string>& keys) {
    std::string out;
    for (std::size_t i = 0; i < keys.size(); ++i) {
        if (i) out += ',';
        out += keys[i];
    }
    return out;
}

std::vector<std::string> split_keys(const std::string& joined) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : joined) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

}  // namespace

bool component_id_known(const std::string& id) {
    std::lock_guard<std::mutex> lock(g_component_mutex);
    return component_table().count(id) != 0;
}

void register_component_id(const std::string& id) {
    if (id.empty()) throw ConfigError("component id must be non-empty");
    std::lock_guard<std::mutex> lock(g_component_mutex);
    component_table().insert(id);
}

const std::string& SolverInfo::class_id(const std::string& role) const {
    for (const auto& [r, id] : classes)
        if (r == role) return id;
    throw ConfigError("solver '" + short_name + "' has no class for role '" + role + "'");
}

void validate_solver_info(const SolverInfo& info) {
    if (info.short_name.empty()) throw ConfigError("solver descriptor: empty short_name");
    if (info.dims < 1 || info.dims > 3)
        throw ConfigError("solver '" + info.short_name + "': dims must be 1, 2 or 3");
    if (info.classes.size() != solver_class_roles.size())
        throw ConfigError("solver '" + info.short_name + "': expected " +
                          std::to_string(solver_class_roles.size()) + " class roles, got " +
                          std::to_string(info.classes.size()));
    for (std::size_t i = 0; i < solver_class_roles.size(); ++i) {
        if (info.classes[i].first != solver_class_roles[i])
            throw ConfigError("solver '" + info.short_name + "': role " + std::to_string(i) +
                              " must be '" + solver_class_roles[i] + "', got '" +
                              info.classes[i].first + "'");
        if (!component_id_known(info.classes[i].second))
            throw ConfigError("solver '" + info.short_name + "': unknown component id '" +
                              info.classes[i].second + "'");
    }
    if (info.keys_state_phys.empty() ||
        info.keys_state_phys.size() != info.keys_state_spect.size())
        throw ConfigError("solver '" + info.short_name + "': state key lists must pair up");
    for (std::size_t i = 0; i < info.keys_state_phys.size(); ++i)
        if (info.keys_state_spect[i] != info.keys_state_phys[i] + "_fft")
            throw ConfigError("solver '" + info.short_name + "': spectral key '" +
                              info.keys_state_spect[i] + "' does not pair with '" +
                              info.keys_state_phys[i] + "'");
}

ParamTree SolverInfo::to_tree() const {
    ParamTree tree("info_solver");
    tree.add_leaf("short_name", short_name);
    tree.add_leaf("dims", static_cast<std::int64_t>(dims));
    auto& cls = tree.add_child("classes");
    for (const auto& [role, id] : classes) cls.add_leaf(role, id);
    auto& keys = tree.add_child("keys");
    keys.add_leaf("keys_state_phys", join_keys(keys_state_phys));
    keys.add_leaf("keys_state_spect", join_keys(keys_state_spect));
    keys.add_leaf("keys_computable", join_keys(keys_computable));
    return tree;
}

SolverInfo SolverInfo::from_tree(const ParamTree& tree) {
    if (tree.name() != "info_solver")
        throw ConfigError("solver descriptor tree must be rooted at 'info_solver', got '" +
                          tree.name() + "'");
    SolverInfo info;
    info.short_name = tree.get<std::string>("short_name");
    info.dims = static_cast<int>(tree.get<std::int64_t>("dims"));
    for (const char* role : solver_class_roles)
        info.classes.emplace_back(role, tree.get<std::string>(std::string("classes.") + role));
    info.keys_state_phys = split_keys(tree.get<std::string>("keys.keys_state_phys"));
    info.keys_state_spect = split_keys(tree.get<std::string>("keys.keys_state_spect"));
    info.keys_computable = split_keys(tree.get<std::string>("keys.keys_computable"));
    return info;
}

std::string SolverInfo::print() const { return to_tree().serialize(); }

SolverInfo SolverInfo::parse(const std::string& text) {
    return from_tree(ParamTree::deserialize(text));
}

}  // namespace spectralkit
