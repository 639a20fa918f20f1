#pragma once

// Shared fixtures: the three-binary-attribute worked example and friends.

#include <string>
#include <vector>

#include "prefcone/core.hpp"
#include "prefcone/statements.hpp"

namespace prefcone::testing {

inline Outcome bits(std::initializer_list<std::size_t> v) { return Outcome{std::vector<std::size_t>(v)}; }

/// Three binary attributes with u_i(x_i) = x_i and no alternatives.
inline DecisionProblem three_binary(std::vector<Alternative> alternatives = {}) {
    return DecisionProblem({Attribute::binary("X1"), Attribute::binary("X2"), Attribute::binary("X3")},
                           std::move(alternatives));
}

/// {.5:(0,1,1), .3:(1,0,0), .2:(0,1,0)}
inline Prospect worked_lottery() {
    return Prospect::make({{0.5, bits({0, 1, 1})}, {0.3, bits({1, 0, 0})}, {0.2, bits({0, 1, 0})}});
}

inline DecisionProblem worked_problem() {
    return three_binary({{"x101", Prospect::degenerate(bits({1, 0, 1}))}, {"lottery", worked_lottery()}});
}

/// (X1=1, X2=0) preferred to (X1=0, X2=1) whatever X3 is.
inline IdentifiedStatement worked_cp(bool strict = true) {
    return {"cp1", CeterisParibus{{0, 1}, {0, 1}, {1, 0}, strict}};
}

inline Vector coords(std::initializer_list<std::pair<std::initializer_list<std::size_t>, double>> terms,
                     std::size_t d = 7) {
    Vector v(d, 0.0);
    for (const auto& [attrs, value] : terms) v[SubsetIndex::of(attrs).coordinate()] += value;
    return v;
}

}  // namespace prefcone::testing
