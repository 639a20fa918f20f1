#pragma once

// Compiles utility-independence assumptions, comparisons and ceteris paribus
// statements into homogeneous linear constraints on the scaling vector.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "prefcone/constraint.hpp"
#include "prefcone/core.hpp"

namespace prefcone {

/// worse <= better (or worse < better when strict).
struct Comparison {
    Prospect worse;
    Prospect better;
    bool strict = false;
};

/// worse_partial <= better_partial over `scope`, whatever the other attributes are.
/// Scope holds ascending attribute indices; the partials hold value indices aligned with it.
struct CeterisParibus {
    std::vector<std::size_t> scope;
    std::vector<std::size_t> worse;
    std::vector<std::size_t> better;
    bool strict = false;
};

using Statement = std::variant<Comparison, CeterisParibus>;

struct IdentifiedStatement {
    std::string id;
    Statement statement;
};

struct CompileOptions {
    /// Adds k_Y = 0 for every |Y| > 1 as a pair of weak constraints.
    bool additive = false;
};

/// Outcome that sets every attribute outside `fixed_mask` to its worst (bit clear)
/// or best (bit set) value, following the bits of `completion` in ascending attribute order.
inline Outcome vertex_completion(const DecisionProblem& problem, std::uint32_t fixed_mask,
                                 std::uint32_t completion, Outcome base) {
    std::size_t bit = 0;
    for (std::size_t j = 0; j < problem.attribute_count(); ++j) {
        if ((fixed_mask >> j) & 1u) continue;
        const bool best = (completion >> bit++) & 1u;
        base.values[j] = best ? problem.attribute(j).best_value() : problem.attribute(j).worst_value();
    }
    return base;
}

/// s^i(x): zero off subsets containing attribute i, -t_{Y - {i}}(x) on them (t of the empty set is 1).
/// Does not depend on x_i.
inline Vector ui_vector(const DecisionProblem& problem, std::size_t attribute, const Outcome& x) {
    problem.validate(x);
    const std::size_t n = problem.attribute_count();
    Vector u(n);
    for (std::size_t j = 0; j < n; ++j) u[j] = problem.subutility(j, x[j]);
    const auto t = moments_from_subutilities(u);
    Vector s(problem.dimension(), 0.0);
    const std::uint32_t bit = std::uint32_t{1} << attribute;
    for (std::uint32_t mask = 1; mask <= problem.dimension(); ++mask) {
        if (!(mask & bit)) continue;
        const std::uint32_t rest = mask ^ bit;
        s[mask - 1] = rest == 0 ? -1.0 : -t[SubsetIndex(rest)];
    }
    return s;
}

/// Utility-independence constraints, one per attribute and vertex completion of the others.
/// The left side of the UI inequality is multilinear in the other sub-utilities, so its
/// minimum over all assignments is reached at a {0,1} vertex; n * 2^(n-1) constraints.
inline std::vector<Constraint> ui_constraints(const DecisionProblem& problem) {
    const std::size_t n = problem.attribute_count();
    std::vector<Constraint> out;
    out.reserve(n << (n - 1));
    Outcome base{std::vector<std::size_t>(n, 0)};
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint32_t fixed = std::uint32_t{1} << i;
        for (std::uint32_t c = 0; c < (std::uint32_t{1} << (n - 1)); ++c) {
            const auto x = vertex_completion(problem, fixed, c, base);
            out.push_back(Constraint::make(ui_vector(problem, i, x), true, UtilityIndependence{i, c}));
        }
    }
    return out;
}

inline Constraint comparison_constraint(const DecisionProblem& problem, const Comparison& s,
                                        const std::string& id = {}) {
    auto w = difference(prospect_moments(problem, s.worse), prospect_moments(problem, s.better));
    return Constraint::make(std::move(w), s.strict, FromComparison{id});
}

inline void validate(const DecisionProblem& problem, const CeterisParibus& s) {
    if (s.scope.empty()) throw ValidationError("scope", "ceteris paribus scope must be nonempty");
    if (!std::is_sorted(s.scope.begin(), s.scope.end()) ||
        std::adjacent_find(s.scope.begin(), s.scope.end()) != s.scope.end())
        throw ValidationError("scope", "scope must list distinct attributes in ascending order");
    if (s.worse.size() != s.scope.size() || s.better.size() != s.scope.size())
        throw ValidationError("scope", "partial assignments must cover exactly the scope");
    for (std::size_t k = 0; k < s.scope.size(); ++k) {
        if (s.scope[k] >= problem.attribute_count()) throw ValidationError("scope", "unknown attribute index");
        const auto& attr = problem.attribute(s.scope[k]);
        if (s.worse[k] >= attr.size() || s.better[k] >= attr.size())
            throw ValidationError("attribute " + attr.name, "value index out of domain");
    }
}

/// One comparison per vertex completion of the attributes outside the scope: 2^(n - |S|) constraints.
inline std::vector<Constraint> cp_expand(const DecisionProblem& problem, const CeterisParibus& s,
                                         const std::string& id = {}) {
    validate(problem, s);
    const std::size_t n = problem.attribute_count();
    std::uint32_t scope_mask = 0;
    Outcome worse{std::vector<std::size_t>(n, 0)};
    Outcome better = worse;
    for (std::size_t k = 0; k < s.scope.size(); ++k) {
        scope_mask |= std::uint32_t{1} << s.scope[k];
        worse.values[s.scope[k]] = s.worse[k];
        better.values[s.scope[k]] = s.better[k];
    }
    const std::size_t free = n - s.scope.size();
    std::vector<Constraint> out;
    for (std::uint32_t c = 0; c < (std::uint32_t{1} << free); ++c) {
        const auto xw = vertex_completion(problem, scope_mask, c, worse);
        const auto xb = vertex_completion(problem, scope_mask, c, better);
        auto w = difference(outcome_moments(problem, xw), outcome_moments(problem, xb));
        out.push_back(Constraint::make(std::move(w), s.strict, FromCeterisParibus{id, c}));
    }
    return out;
}

inline std::vector<Constraint> statement_constraints(const DecisionProblem& problem, const IdentifiedStatement& s) {
    try {
        if (auto c = std::get_if<Comparison>(&s.statement)) return {comparison_constraint(problem, *c, s.id)};
        return cp_expand(problem, std::get<CeterisParibus>(s.statement), s.id);
    } catch (const ValidationError& e) {
        throw ValidationError("statement " + s.id, e.what());
    }
}

namespace detail {

/// Deduplicates constraints that are positive multiples of each other with equal strictness.
class DedupIndex {
  public:
    bool insert(const Constraint& c) {
        const double scale = norm_inf(c.w);
        std::string key(1, c.strict ? 's' : 'w');
        for (double x : c.w) {
            const auto q = std::llround(x / scale * 1e9);
            key.append(reinterpret_cast<const char*>(&q), sizeof q);
        }
        auto& bucket = buckets_[key];
        const Vector unit = normalized(c.w);
        for (const auto& other : bucket)
            if (dot(unit, other) >= 1.0 - 1e-12) return false;
        bucket.push_back(unit);
        return true;
    }

  private:
    std::unordered_map<std::string, std::vector<Vector>> buckets_;
};

}  // namespace detail

/// UI constraints, then the additive restriction if requested, then each statement's
/// constraints in log order. Vacuous constraints are dropped and positive multiples deduplicated.
inline ConstraintStore compile(const DecisionProblem& problem, std::span<const IdentifiedStatement> statements,
                               CompileOptions options = {}) {
    ConstraintStore store(problem.dimension(), options.additive);
    detail::DedupIndex seen;
    auto push = [&](Constraint c) {
        if (c.vacuous()) return;
        if (seen.insert(c)) store.add(std::move(c));
    };
    for (auto& c : ui_constraints(problem)) push(std::move(c));
    if (options.additive) {
        for (std::uint32_t mask = 1; mask <= problem.dimension(); ++mask) {
            if (SubsetIndex(mask).size() < 2) continue;
            Vector e(problem.dimension(), 0.0);
            e[mask - 1] = 1.0;
            push(Constraint::make(e, false, AdditiveRestriction{mask, true}));
            e[mask - 1] = -1.0;
            push(Constraint::make(e, false, AdditiveRestriction{mask, false}));
        }
    }
    for (const auto& s : statements)
        for (auto& c : statement_constraints(problem, s)) push(std::move(c));
    return store;
}

inline ConstraintStore compile(const DecisionProblem& problem, std::initializer_list<IdentifiedStatement> statements,
                               CompileOptions options = {}) {
    return compile(problem, std::span<const IdentifiedStatement>(statements.begin(), statements.size()), options);
}

}  // namespace prefcone
