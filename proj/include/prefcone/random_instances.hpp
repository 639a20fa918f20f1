#pragma once

// Seeded random decision problems, prospects and preference statements for
// property testing and the CLI harness.

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "prefcone/core.hpp"
#include "prefcone/statements.hpp"

namespace prefcone::random {

using Engine = std::mt19937_64;

struct ProblemShape {
    std::size_t attributes = 3;
    std::size_t max_domain = 3;       ///< domain sizes drawn from [2, max_domain]
    std::size_t alternatives = 4;
    std::size_t max_support = 3;      ///< outcomes per alternative drawn from [1, max_support]
};

inline double uniform(Engine& rng, double lo = 0.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline std::size_t index(Engine& rng, std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

inline Attribute attribute(Engine& rng, std::string name, std::size_t max_domain) {
    const std::size_t size = index(rng, 2, std::max<std::size_t>(2, max_domain));
    std::vector<std::string> domain;
    std::vector<double> u;
    for (std::size_t v = 0; v < size; ++v) {
        domain.push_back("v" + std::to_string(v));
        u.push_back(v == 0 ? 0.0 : v == 1 ? 1.0 : uniform(rng));
    }
    std::shuffle(u.begin(), u.end(), rng);
    return Attribute::make(std::move(name), std::move(domain), std::move(u));
}

inline Outcome outcome(Engine& rng, const std::vector<Attribute>& attributes) {
    Outcome x;
    for (const auto& a : attributes) x.values.push_back(index(rng, 0, a.size() - 1));
    return x;
}

inline Prospect prospect(Engine& rng, const std::vector<Attribute>& attributes, std::size_t max_support) {
    const std::size_t size = index(rng, 1, std::max<std::size_t>(1, max_support));
    std::vector<double> w(size);
    double sum = 0.0;
    for (auto& x : w) sum += (x = uniform(rng, 0.05, 1.0));
    std::vector<Branch> branches;
    double acc = 0.0;
    for (std::size_t i = 0; i < size; ++i) {
        const double p = i + 1 == size ? 1.0 - acc : w[i] / sum;
        acc += p;
        branches.push_back({p, outcome(rng, attributes)});
    }
    return Prospect::make(std::move(branches));
}

inline DecisionProblem problem(Engine& rng, const ProblemShape& shape) {
    std::vector<Attribute> attrs;
    for (std::size_t i = 0; i < shape.attributes; ++i)
        attrs.push_back(attribute(rng, "X" + std::to_string(i + 1), shape.max_domain));
    std::vector<Alternative> alts;
    for (std::size_t a = 0; a < shape.alternatives; ++a)
        alts.push_back({"a" + std::to_string(a + 1), prospect(rng, attrs, shape.max_support)});
    return DecisionProblem(std::move(attrs), std::move(alts));
}

/// A scaling vector satisfying every utility-independence constraint with slack:
/// positive main effects plus interactions small enough not to flip any UI sign.
inline ScalingVector admissible_scaling(Engine& rng, const DecisionProblem& problem) {
    const auto ui = ui_constraints(problem);
    const std::size_t d = problem.dimension();
    for (double spread = 1.0;; spread *= 0.5) {
        ScalingVector k = ScalingVector::zeros(d);
        for (std::size_t c = 0; c < d; ++c) {
            const auto y = SubsetIndex::from_coordinate(c);
            k[c] = y.size() == 1 ? uniform(rng, 0.2, 1.0) : uniform(rng, -spread, spread);
        }
        const bool ok = std::all_of(ui.begin(), ui.end(),
                                    [&](const Constraint& con) { return dot(con.w, k.coords()) < -1e-3; });
        if (ok) return k;
    }
}

/// Statements that a decision maker with hidden utility `truth` would assert.
/// Comparisons between random prospects and ceteris paribus statements that hold at
/// every completion; strict when the utility gap is clear.
inline std::vector<IdentifiedStatement> statements_for(Engine& rng, const DecisionProblem& problem,
                                                       const ScalingVector& truth, std::size_t count,
                                                       std::size_t first_id = 1) {
    std::vector<IdentifiedStatement> out;
    const auto& attrs = problem.attributes();
    std::size_t guard = 0;
    while (out.size() < count && guard++ < 100 * (count + 1)) {
        const std::string id = "s" + std::to_string(first_id + out.size());
        if (uniform(rng) < 0.6) {
            auto p = prospect(rng, attrs, 2);
            auto q = prospect(rng, attrs, 2);
            const double gap = expected_utility(problem, truth, q) - expected_utility(problem, truth, p);
            if (std::abs(gap) < 1e-6) continue;
            if (gap < 0) std::swap(p, q);
            out.push_back({id, Comparison{p, q, std::abs(gap) > 1e-3}});
        } else {
            const std::size_t n = problem.attribute_count();
            std::vector<std::size_t> scope;
            for (std::size_t i = 0; i < n; ++i)
                if (uniform(rng) < 0.5) scope.push_back(i);
            if (scope.empty()) scope.push_back(index(rng, 0, n - 1));
            CeterisParibus cp{scope, {}, {}, false};
            for (auto i : scope) {
                cp.worse.push_back(index(rng, 0, attrs[i].size() - 1));
                cp.better.push_back(index(rng, 0, attrs[i].size() - 1));
            }
            double lo = 1e300, hi = -1e300;
            try {
                for (const auto& c : cp_expand(problem, cp)) {
                    const double v = dot(c.w, truth.coords());
                    lo = std::min(lo, v);
                    hi = std::max(hi, v);
                }
            } catch (const ValidationError&) {
                continue;
            }
            if (hi < -1e-3) {
                cp.strict = true;
            } else if (lo > 1e-3) {
                std::swap(cp.worse, cp.better);
                cp.strict = true;
            } else if (hi <= 0.0 && lo < -1e-6) {
                cp.strict = false;
            } else {
                continue;
            }
            out.push_back({id, cp});
        }
    }
    return out;
}

}  // namespace prefcone::random
