#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "prefcone/errors.hpp"
#include "prefcone/vector_ops.hpp"

namespace prefcone {

/// Constraint from the utility-independence assumption on one attribute,
/// at one {0,1}-vertex completion of the remaining attributes.
struct UtilityIndependence {
    std::size_t attribute;
    std::uint32_t completion;
    friend bool operator==(const UtilityIndependence&, const UtilityIndependence&) = default;
};

struct FromComparison {
    std::string statement_id;
    friend bool operator==(const FromComparison&, const FromComparison&) = default;
};

struct FromCeterisParibus {
    std::string statement_id;
    std::uint32_t completion;
    friend bool operator==(const FromCeterisParibus&, const FromCeterisParibus&) = default;
};

/// One half of k_Y = 0 for an interaction subset under an additive restriction.
struct AdditiveRestriction {
    std::uint32_t mask;
    bool upper;
    friend bool operator==(const AdditiveRestriction&, const AdditiveRestriction&) = default;
};

using Provenance = std::variant<UtilityIndependence, FromComparison, FromCeterisParibus, AdditiveRestriction>;

inline std::optional<std::string> statement_id(const Provenance& p) {
    if (auto c = std::get_if<FromComparison>(&p)) return c->statement_id;
    if (auto c = std::get_if<FromCeterisParibus>(&p)) return c->statement_id;
    return std::nullopt;
}

inline std::string describe(const Provenance& p) {
    return std::visit(
        [](const auto& v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, UtilityIndependence>)
                return "ui:" + std::to_string(v.attribute) + ":" + std::to_string(v.completion);
            else if constexpr (std::is_same_v<T, FromComparison>)
                return "comparison:" + v.statement_id;
            else if constexpr (std::is_same_v<T, FromCeterisParibus>)
                return "ceteris_paribus:" + v.statement_id + ":" + std::to_string(v.completion);
            else
                return std::string("additive:") + std::to_string(v.mask) + (v.upper ? ":upper" : ":lower");
        },
        p);
}

/// The halfspace <k, w> <= 0, or < 0 when strict.
struct Constraint {
    Vector w;
    bool strict = false;
    Provenance provenance;

    static Constraint make(Vector w, bool strict, Provenance provenance) {
        if (strict && is_zero(w))
            throw ValidationError(describe(provenance), "strict constraint with zero vector is unsatisfiable");
        return Constraint{std::move(w), strict, std::move(provenance)};
    }

    bool vacuous() const { return !strict && is_zero(w); }

    friend bool operator==(const Constraint&, const Constraint&) = default;
};

/// Ordered list of constraints over a fixed dimension.
class ConstraintStore {
  public:
    ConstraintStore() = default;
    explicit ConstraintStore(std::size_t dimension, bool additive = false)
        : dimension_(dimension), additive_(additive) {}

    void add(Constraint c) {
        if (c.w.size() != dimension_) throw ContractViolation("constraint dimension mismatch");
        constraints_.push_back(std::move(c));
    }

    std::size_t dimension() const { return dimension_; }
    std::size_t size() const { return constraints_.size(); }
    bool empty() const { return constraints_.empty(); }
    const Constraint& operator[](std::size_t i) const { return constraints_[i]; }
    const std::vector<Constraint>& constraints() const { return constraints_; }
    auto begin() const { return constraints_.begin(); }
    auto end() const { return constraints_.end(); }

    /// True when the store carries the additive restriction k_Y = 0 for |Y| > 1.
    bool additive() const { return additive_; }

    /// Statement ids in order of first appearance.
    std::vector<std::string> statement_ids() const {
        std::vector<std::string> ids;
        std::set<std::string> seen;
        for (const auto& c : constraints_)
            if (auto id = statement_id(c.provenance); id && seen.insert(*id).second) ids.push_back(*id);
        return ids;
    }

    /// Copy with every constraint derived from the given statements removed.
    ConstraintStore without(const std::set<std::string>& ids) const {
        ConstraintStore out(dimension_, additive_);
        for (const auto& c : constraints_) {
            auto id = statement_id(c.provenance);
            if (!id || !ids.contains(*id)) out.constraints_.push_back(c);
        }
        return out;
    }

    friend bool operator==(const ConstraintStore&, const ConstraintStore&) = default;

  private:
    std::size_t dimension_ = 0;
    bool additive_ = false;
    std::vector<Constraint> constraints_;
};

}  // namespace prefcone
