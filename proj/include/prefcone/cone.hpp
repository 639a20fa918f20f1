#pragma once

// LP-backed queries against the preference cone K = {k : <k, w_j> <= 0} and the
// cone C_W generated by the constraint vectors. K is the dual of C_W, so a
// direction v satisfies <k, v> <= 0 for every admissible k exactly when v is a
// nonnegative combination of the w_j.

#include <algorithm>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "prefcone/constraint.hpp"
#include "prefcone/core.hpp"
#include "prefcone/lp.hpp"

namespace prefcone {

inline constexpr double kFeasibilityTolerance = 1e-9;
inline constexpr double kSlackThreshold = 1e-9;

enum class Membership { Member, NotMember, Indeterminate };

inline const char* to_string(Membership m) {
    switch (m) {
        case Membership::Member: return "member";
        case Membership::NotMember: return "not_member";
        case Membership::Indeterminate: return "indeterminate";
    }
    return "?";
}

struct MembershipResult {
    Membership verdict = Membership::Indeterminate;
    Vector multipliers;  ///< lambda >= 0 with sum lambda_j w_j = v, when Member
};

namespace detail {

inline std::vector<Vector> unit_rows(const ConstraintStore& w) {
    std::vector<Vector> rows;
    rows.reserve(w.size());
    for (const auto& c : w) rows.push_back(normalized(c.w));
    return rows;
}

}  // namespace detail

/// Tests v in C_W by LP feasibility of lambda >= 0, sum lambda_j w_j = v. Constraint vectors
/// and v are scaled to unit length first, so the answer is invariant under positive scaling.
inline MembershipResult cone_membership_detail(std::span<const double> v, const ConstraintStore& w) {
    if (v.size() != w.dimension()) throw ContractViolation("membership vector has wrong dimension");
    MembershipResult out;
    const double vnorm = norm2(v);
    if (vnorm == 0.0) {
        out.verdict = Membership::Member;
        out.multipliers.assign(w.size(), 0.0);
        return out;
    }
    const Vector target = scaled(v, 1.0 / vnorm);
    const auto rows = detail::unit_rows(w);
    const std::size_t d = w.dimension(), m = w.size();

    lp::LinearProgram<double> prog(m);
    for (std::size_t j = 0; j < m; ++j) prog.set_bounds(j, 0.0, std::nullopt);
    for (std::size_t i = 0; i < d; ++i) {
        Vector coeffs(m);
        for (std::size_t j = 0; j < m; ++j) coeffs[j] = rows[j][i];
        prog.add(std::move(coeffs), lp::Relation::Equal, target[i]);
    }
    const auto r = lp::solve_with_exact_fallback(prog);
    if (r.status == lp::Status::Infeasible) {
        out.verdict = Membership::NotMember;
        return out;
    }
    if (r.status != lp::Status::Optimal) return out;

    Vector residual = target;
    for (std::size_t j = 0; j < m; ++j) axpy(-r.point[j], rows[j], residual);
    if (norm_inf(residual) > kFeasibilityTolerance) return out;
    out.verdict = Membership::Member;
    out.multipliers.resize(m);
    for (std::size_t j = 0; j < m; ++j) out.multipliers[j] = r.point[j] / norm2(w[j].w) * vnorm;
    return out;
}

inline Membership cone_membership(std::span<const double> v, const ConstraintStore& w) {
    return cone_membership_detail(v, w).verdict;
}

/// Outcome of maximizing the common slack epsilon over admissible scaling vectors.
struct SlackResult {
    lp::Status status = lp::Status::NumericalFailure;
    double epsilon = 0.0;
    ScalingVector k;
};

/// maximize eps  s.t.  <k, w> <= 0 (weak), <k, w> + eps <= 0 (strict), extra rows likewise,
/// -1 <= k_Y <= 1, 0 <= eps <= 1. All row vectors are scaled to unit length.
inline SlackResult max_slack(const ConstraintStore& w, std::span<const Vector> extra_weak = {},
                             std::span<const Vector> extra_strict = {}) {
    const std::size_t d = w.dimension();
    lp::LinearProgram<double> prog(d + 1);
    for (std::size_t j = 0; j < d; ++j) prog.set_bounds(j, -1.0, 1.0);
    prog.set_bounds(d, 0.0, 1.0);
    auto add_row = [&](std::span<const double> a, bool strict) {
        if (norm2(a) == 0.0) {
            // <k, 0> + eps <= 0 forces eps = 0; a weak zero row is vacuous.
            if (strict) {
                Vector coeffs(d + 1, 0.0);
                coeffs[d] = 1.0;
                prog.add(std::move(coeffs), lp::Relation::LessEqual, 0.0);
            }
            return;
        }
        Vector coeffs = normalized(a);
        coeffs.push_back(strict ? 1.0 : 0.0);
        prog.add(std::move(coeffs), lp::Relation::LessEqual, 0.0);
    };
    for (const auto& c : w) add_row(c.w, c.strict);
    for (const auto& a : extra_weak) add_row(a, false);
    for (const auto& a : extra_strict) add_row(a, true);
    Vector objective(d + 1, 0.0);
    objective[d] = 1.0;
    prog.maximize(std::move(objective));
    const auto r = lp::solve_with_exact_fallback(prog);
    SlackResult out;
    out.status = r.status;
    if (r.status == lp::Status::Optimal) {
        out.epsilon = r.point[d];
        out.k = ScalingVector(Vector(r.point.begin(), r.point.begin() + static_cast<std::ptrdiff_t>(d)));
    }
    return out;
}

enum class ConsistencyStatus { Consistent, Inconsistent, Indeterminate };

inline const char* to_string(ConsistencyStatus s) {
    switch (s) {
        case ConsistencyStatus::Consistent: return "consistent";
        case ConsistencyStatus::Inconsistent: return "inconsistent";
        case ConsistencyStatus::Indeterminate: return "indeterminate";
    }
    return "?";
}

struct FeasibilityReport {
    ConsistencyStatus status = ConsistencyStatus::Indeterminate;
    double epsilon = 0.0;
    std::optional<ScalingVector> witness;
    std::vector<std::string> conflict;  ///< statement ids, filled by callers that compute a core

    bool consistent() const { return status == ConsistencyStatus::Consistent; }
};

/// Consistent iff some admissible k leaves every strict constraint with slack above 1e-9.
inline FeasibilityReport consistency(const ConstraintStore& w) {
    FeasibilityReport out;
    const auto r = max_slack(w);
    if (r.status != lp::Status::Optimal) return out;
    out.epsilon = r.epsilon;
    if (r.epsilon > kSlackThreshold) {
        out.status = ConsistencyStatus::Consistent;
        out.witness = r.k;
    } else {
        out.status = ConsistencyStatus::Inconsistent;
    }
    return out;
}

/// Greedy deletion filter over statements. `rebuild(removed)` must return the store
/// with the given statement ids left out. Statements are tried newest first.
template <class Rebuild>
std::vector<std::string> conflict_core(const std::vector<std::string>& statement_ids, Rebuild&& rebuild) {
    std::set<std::string> removed;
    {
        const auto full = consistency(rebuild(removed));
        if (full.status == ConsistencyStatus::Consistent)
            throw ContractViolation("conflict core requested for a consistent store");
        if (full.status == ConsistencyStatus::Indeterminate)
            throw std::runtime_error("consistency LP failed numerically");
    }
    for (auto it = statement_ids.rbegin(); it != statement_ids.rend(); ++it) {
        removed.insert(*it);
        const auto r = consistency(rebuild(removed));
        if (r.status == ConsistencyStatus::Indeterminate) throw std::runtime_error("consistency LP failed numerically");
        if (r.status == ConsistencyStatus::Consistent) removed.erase(*it);
    }
    std::vector<std::string> core;
    for (const auto& id : statement_ids)
        if (!removed.contains(id)) core.push_back(id);
    return core;
}

/// Core over the statements present in `w`; utility-independence constraints are never removed.
inline std::vector<std::string> conflict_core(const ConstraintStore& w) {
    return conflict_core(w.statement_ids(), [&](const std::set<std::string>& removed) { return w.without(removed); });
}

enum class Intersection { Trivial, Nontrivial, Indeterminate };

inline const char* to_string(Intersection s) {
    switch (s) {
        case Intersection::Trivial: return "trivial";
        case Intersection::Nontrivial: return "nontrivial";
        case Intersection::Indeterminate: return "indeterminate";
    }
    return "?";
}

/// Whether C_V and C_W meet only at the origin. A nonzero common point can be scaled so
/// that some coordinate is +1 or -1; one LP per coordinate and sign decides it. A single
/// LP with sum(mu) = 1 screens out the trivial case first.
inline Intersection trivial_intersection(std::span<const Vector> v, const ConstraintStore& w) {
    std::vector<Vector> gens;
    for (const auto& x : v) {
        if (x.size() != w.dimension()) throw ContractViolation("vector has wrong dimension");
        if (!is_zero(x)) gens.push_back(normalized(x));
    }
    if (gens.empty()) return Intersection::Trivial;
    const auto rows = detail::unit_rows(w);
    const std::size_t d = w.dimension(), s = gens.size(), m = rows.size();

    auto build = [&]() {
        lp::LinearProgram<double> prog(s + m);
        for (std::size_t j = 0; j < s + m; ++j) prog.set_bounds(j, 0.0, std::nullopt);
        for (std::size_t i = 0; i < d; ++i) {
            Vector coeffs(s + m);
            for (std::size_t a = 0; a < s; ++a) coeffs[a] = gens[a][i];
            for (std::size_t j = 0; j < m; ++j) coeffs[s + j] = -rows[j][i];
            prog.add(std::move(coeffs), lp::Relation::Equal, 0.0);
        }
        return prog;
    };

    {
        auto prog = build();
        Vector coeffs(s + m, 0.0);
        std::fill(coeffs.begin(), coeffs.begin() + static_cast<std::ptrdiff_t>(s), 1.0);
        prog.add(std::move(coeffs), lp::Relation::Equal, 1.0);
        const auto r = lp::solve_with_exact_fallback(prog);
        if (r.status == lp::Status::Infeasible) return Intersection::Trivial;
        if (r.status != lp::Status::Optimal) return Intersection::Indeterminate;
    }
    bool failed = false;
    for (std::size_t t = 0; t < d; ++t) {
        for (double sign : {1.0, -1.0}) {
            auto prog = build();
            Vector coeffs(s + m, 0.0);
            for (std::size_t a = 0; a < s; ++a) coeffs[a] = gens[a][t];
            prog.add(std::move(coeffs), lp::Relation::Equal, sign);
            const auto r = lp::solve_with_exact_fallback(prog);
            if (r.status == lp::Status::Optimal) return Intersection::Nontrivial;
            if (r.status != lp::Status::Infeasible) failed = true;
        }
    }
    return failed ? Intersection::Indeterminate : Intersection::Trivial;
}

}  // namespace prefcone
