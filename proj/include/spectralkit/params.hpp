#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "spectralkit/errors.hpp"

namespace spectralkit {

/// Leaf value of a parameter tree.
using ParamValue =
    std::variant<bool, std::int64_t, double, std::string, std::vector<double>>;

/// Human-readable name of the type held by a value ("bool", "int", ...).
const char* param_type_name(const ParamValue& v);

/// Shortest decimal that round-trips to exactly the same double.
/// Always contains '.', 'e' or a non-finite word so the type survives parsing.
std::string format_double(double v);

/// Hierarchical parameter container.
///
/// Structure (names of children and leaves) is locked by freeze(); leaf
/// values stay mutable afterwards. Paths are dot-separated, e.g.
/// "forcing.enable". Deep copies are value copies.
class ParamTree {
public:
    explicit ParamTree(std::string name);
    ParamTree(const ParamTree& other);
    ParamTree& operator=(const ParamTree& other);
    ParamTree(ParamTree&&) noexcept = default;
    ParamTree& operator=(ParamTree&&) noexcept = default;

    const std::string& name() const { return name_; }
    bool frozen() const { return frozen_; }
    /// Recursively lock the structure. Idempotent.
    void freeze();

    /// Add a direct child node. Throws ParamError if frozen or duplicate.
    ParamTree& add_child(const std::string& child_name);
    /// Add a direct leaf. Throws ParamError if frozen or duplicate.
    void add_leaf(const std::string& leaf_name, ParamValue default_value);

    bool has_leaf(const std::string& path) const;
    bool has_child(const std::string& path) const;

    const ParamTree& child(const std::string& path) const;
    ParamTree& child(const std::string& path);

    /// Leaf value at a dot path. Throws ParamError with sibling suggestions.
    const ParamValue& value(const std::string& path) const;

    /// Update a leaf. The value type must match the leaf type; assigning an
    /// int to a float leaf promotes. Throws ParamError otherwise; the tree is
    /// unchanged on error.
    void set(const std::string& path, ParamValue v);

    /// Update a leaf from text, parsed according to the existing leaf type.
    void set_from_string(const std::string& path, const std::string& text);

    template <typename T>
    T get(const std::string& path) const {
        const ParamValue& v = value(path);
        if constexpr (std::is_same_v<T, double>) {
            if (auto p = std::get_if<double>(&v)) return *p;
            if (auto p = std::get_if<std::int64_t>(&v))
                return static_cast<double>(*p);
        } else {
            if (auto p = std::get_if<T>(&v)) return *p;
        }
        throw ParamError("parameter '" + path + "' has type " +
                         param_type_name(v) + ", requested a different type");
    }

    std::vector<std::string> child_names() const;
    std::vector<std::string> leaf_names() const;
    /// All leaf paths below this node, depth-first, leaves before children.
    std::vector<std::string> leaf_paths() const;

    /// Copy every leaf value from src into this tree. Every leaf path of src
    /// must exist here with a compatible type; src's structure may be a
    /// subset of ours (missing leaves keep their values).
    void overlay(const ParamTree& src);

    /// Canonical text form (see README: nested blocks, `name = value`).
    std::string serialize() const;
    /// Parse the canonical text form; the result is frozen.
    /// Throws ParseError with line/column on malformed input.
    static ParamTree deserialize(const std::string& text);

    /// Same names, nesting and leaf types (values ignored).
    bool same_structure(const ParamTree& other) const;
    /// Structure plus bit-identical values.
    bool operator==(const ParamTree& other) const;
    bool operator!=(const ParamTree& other) const { return !(*this == other); }

private:
    struct Walk {
        const ParamTree* node;
        std::string last;
    };
    Walk walk(const std::string& path) const;
    const ParamTree* find_child(const std::string& n) const;
    const std::pair<std::string, ParamValue>* find_leaf(const std::string& n) const;
    [[noreturn]] void throw_unknown(const std::string& path,
                                    const std::string& segment) const;
    void serialize_into(std::string& out, int indent) const;

    std::string name_;
    bool frozen_ = false;
    std::vector<std::pair<std::string, ParamValue>> leaves_;
    std::vector<std::unique_ptr<ParamTree>> children_;
};

}  // namespace spectralkit
