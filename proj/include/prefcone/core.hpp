#pragma once

// Domain model for multilinear utility functions over finite attributes.
//
// A scaling vector k and a moment vector t(p) share one coordinate system:
// the nonempty attribute subset with bitmask m sits at coordinate m - 1.
// Expected utility is then the inner product <k, t(p)>.

#include <algorithm>
#include <bit>
#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "prefcone/errors.hpp"
#include "prefcone/vector_ops.hpp"

namespace prefcone {

inline constexpr std::size_t kMaxAttributes = 16;
inline constexpr double kProbabilityTolerance = 1e-12;

/// Number of scaling coefficients for n attributes.
constexpr std::size_t dimension_for(std::size_t n) { return (std::size_t{1} << n) - 1; }

/// A nonempty subset of attributes, stored as a bitmask (bit i <=> attribute i).
class SubsetIndex {
  public:
    constexpr explicit SubsetIndex(std::uint32_t mask) : mask_(mask) {}

    static constexpr SubsetIndex from_coordinate(std::size_t coordinate) {
        return SubsetIndex(static_cast<std::uint32_t>(coordinate + 1));
    }

    static SubsetIndex of(std::initializer_list<std::size_t> attributes) {
        std::uint32_t m = 0;
        for (auto a : attributes) m |= std::uint32_t{1} << a;
        return SubsetIndex(m);
    }

    constexpr std::uint32_t mask() const { return mask_; }
    constexpr std::size_t coordinate() const { return mask_ - 1; }
    constexpr bool contains(std::size_t attribute) const { return (mask_ >> attribute) & 1u; }
    constexpr int size() const { return std::popcount(mask_); }

    friend constexpr auto operator<=>(SubsetIndex, SubsetIndex) = default;

  private:
    std::uint32_t mask_;
};

/// Fixed-length coordinate vector indexed by subsets; the tag keeps moment
/// vectors and scaling vectors from being mixed up.
template <class Tag>
class CoordinateVector {
  public:
    CoordinateVector() = default;
    explicit CoordinateVector(Vector coords) : coords_(std::move(coords)) {}

    static CoordinateVector zeros(std::size_t d) { return CoordinateVector(Vector(d, 0.0)); }

    std::size_t size() const { return coords_.size(); }
    double operator[](std::size_t i) const { return coords_[i]; }
    double& operator[](std::size_t i) { return coords_[i]; }
    double operator[](SubsetIndex y) const { return coords_[y.coordinate()]; }
    double& operator[](SubsetIndex y) { return coords_[y.coordinate()]; }

    const Vector& coords() const& { return coords_; }
    Vector coords() && { return std::move(coords_); }
    std::span<const double> span() const { return coords_; }

    auto begin() const { return coords_.begin(); }
    auto end() const { return coords_.end(); }

    friend bool operator==(const CoordinateVector&, const CoordinateVector&) = default;

  private:
    Vector coords_;
};

struct MomentTag {};
struct ScalingTag {};
using MomentVector = CoordinateVector<MomentTag>;
using ScalingVector = CoordinateVector<ScalingTag>;

inline double dot(const ScalingVector& k, const MomentVector& t) { return dot(k.span(), t.span()); }

/// t(p) - t(q), the direction every dominance test is phrased in.
inline Vector difference(const MomentVector& a, const MomentVector& b) {
    return subtract(a.span(), b.span());
}

/// A finite-domain attribute with its normalized sub-utility.
struct Attribute {
    std::string name;
    std::vector<std::string> domain;
    std::vector<double> subutility;

    /// Validates and builds. Sub-utilities must lie in [0,1] and attain both 0 and 1.
    static Attribute make(std::string name, std::vector<std::string> domain,
                          std::vector<double> subutility) {
        const std::string where = "attribute " + name;
        if (name.empty()) throw ValidationError(where, "name must be nonempty");
        if (domain.size() < 2) throw ValidationError(where, "domain needs at least 2 values");
        if (std::set<std::string>(domain.begin(), domain.end()).size() != domain.size())
            throw ValidationError(where, "domain values must be distinct");
        if (subutility.size() != domain.size())
            throw ValidationError(where, "subutility must align with domain");
        bool has_zero = false, has_one = false;
        for (double u : subutility) {
            if (!(u >= 0.0 && u <= 1.0)) throw ValidationError(where, "subutility values must lie in [0,1]");
            has_zero |= (u == 0.0);
            has_one |= (u == 1.0);
        }
        if (!has_zero || !has_one)
            throw ValidationError(where, "subutility must attain 0 and 1");
        return Attribute{std::move(name), std::move(domain), std::move(subutility)};
    }

    /// Binary attribute with domain {"0","1"} and u(x) = x.
    static Attribute binary(std::string name) { return make(std::move(name), {"0", "1"}, {0.0, 1.0}); }

    std::size_t size() const { return domain.size(); }

    friend bool operator==(const Attribute&, const Attribute&) = default;

    std::size_t index_of(const std::string& value) const {
        auto it = std::find(domain.begin(), domain.end(), value);
        if (it == domain.end()) throw ValidationError("attribute " + name, "unknown value '" + value + "'");
        return static_cast<std::size_t>(it - domain.begin());
    }

    /// First domain value with sub-utility 0.
    std::size_t worst_value() const {
        return static_cast<std::size_t>(std::find(subutility.begin(), subutility.end(), 0.0) - subutility.begin());
    }

    /// First domain value with sub-utility 1.
    std::size_t best_value() const {
        return static_cast<std::size_t>(std::find(subutility.begin(), subutility.end(), 1.0) - subutility.begin());
    }
};

/// One value index per attribute.
struct Outcome {
    std::vector<std::size_t> values;

    std::size_t size() const { return values.size(); }
    std::size_t operator[](std::size_t i) const { return values[i]; }

    friend auto operator<=>(const Outcome&, const Outcome&) = default;
};

struct Branch {
    double probability;
    Outcome outcome;

    friend bool operator==(const Branch&, const Branch&) = default;
};

/// A probability distribution over outcomes. Duplicate outcomes are merged
/// in order of first appearance and probabilities are renormalized exactly.
class Prospect {
  public:
    Prospect() = default;

    static Prospect make(std::vector<Branch> branches, const std::string& where = "prospect") {
        if (branches.empty()) throw ValidationError(where, "support must be nonempty");
        std::vector<Branch> merged;
        double sum = 0.0;
        for (auto& b : branches) {
            if (!(b.probability > 0.0 && b.probability <= 1.0))
                throw ValidationError(where, "probabilities must lie in (0,1]");
            sum += b.probability;
            auto it = std::find_if(merged.begin(), merged.end(),
                                   [&](const Branch& m) { return m.outcome == b.outcome; });
            if (it == merged.end())
                merged.push_back(std::move(b));
            else
                it->probability += b.probability;
        }
        if (std::abs(sum - 1.0) > kProbabilityTolerance)
            throw ValidationError(where, "probabilities must sum to 1 within 1e-12");
        // Sums already equal to 1 up to rounding are left alone so that save/load is a fixed point.
        if (std::abs(sum - 1.0) > 4.0 * std::numeric_limits<double>::epsilon() * static_cast<double>(branches.size()))
            for (auto& b : merged) b.probability /= sum;
        Prospect p;
        p.support_ = std::move(merged);
        return p;
    }

    static Prospect degenerate(Outcome x) {
        Prospect p;
        p.support_.push_back(Branch{1.0, std::move(x)});
        return p;
    }

    /// alpha * a + (1 - alpha) * b, alpha in [0,1].
    static Prospect mixture(double alpha, const Prospect& a, const Prospect& b) {
        if (!(alpha >= 0.0 && alpha <= 1.0)) throw ContractViolation("mixture weight must lie in [0,1]");
        std::vector<Branch> branches;
        for (const auto& x : a.support_)
            if (alpha > 0.0) branches.push_back({alpha * x.probability, x.outcome});
        for (const auto& x : b.support_)
            if (alpha < 1.0) branches.push_back({(1.0 - alpha) * x.probability, x.outcome});
        return make(std::move(branches));
    }

    const std::vector<Branch>& support() const { return support_; }
    bool is_degenerate() const { return support_.size() == 1; }

    friend bool operator==(const Prospect&, const Prospect&) = default;

  private:
    std::vector<Branch> support_;
};

struct Alternative {
    std::string name;
    Prospect prospect;

    friend bool operator==(const Alternative&, const Alternative&) = default;
};

class DecisionProblem {
  public:
    DecisionProblem() = default;

    DecisionProblem(std::vector<Attribute> attributes, std::vector<Alternative> alternatives)
        : attributes_(std::move(attributes)), alternatives_(std::move(alternatives)) {
        if (attributes_.empty()) throw ValidationError("attributes", "at least one attribute required");
        if (attributes_.size() > kMaxAttributes)
            throw ValidationError("attributes", "at most " + std::to_string(kMaxAttributes) + " attributes supported");
        std::set<std::string> names;
        for (const auto& a : attributes_)
            if (!names.insert(a.name).second) throw ValidationError("attribute " + a.name, "duplicate attribute name");
        names.clear();
        for (const auto& alt : alternatives_) {
            if (!names.insert(alt.name).second)
                throw ValidationError("alternative " + alt.name, "duplicate alternative name");
            validate(alt.prospect);
        }
    }

    std::size_t attribute_count() const { return attributes_.size(); }
    std::size_t dimension() const { return dimension_for(attributes_.size()); }
    const std::vector<Attribute>& attributes() const { return attributes_; }
    const Attribute& attribute(std::size_t i) const { return attributes_[i]; }
    const std::vector<Alternative>& alternatives() const { return alternatives_; }

    std::size_t attribute_index(const std::string& name) const {
        for (std::size_t i = 0; i < attributes_.size(); ++i)
            if (attributes_[i].name == name) return i;
        throw ValidationError("attribute " + name, "unknown attribute");
    }

    const Alternative* find_alternative(const std::string& name) const {
        for (const auto& a : alternatives_)
            if (a.name == name) return &a;
        return nullptr;
    }

    void validate(const Outcome& x) const {
        if (x.size() != attributes_.size())
            throw ValidationError("outcome", "expected " + std::to_string(attributes_.size()) + " values, got " +
                                                 std::to_string(x.size()));
        for (std::size_t i = 0; i < x.size(); ++i)
            if (x[i] >= attributes_[i].size())
                throw ValidationError("attribute " + attributes_[i].name, "value index out of domain");
    }

    void validate(const Prospect& p) const {
        for (const auto& b : p.support()) validate(b.outcome);
    }

    double subutility(std::size_t attribute, std::size_t value) const {
        return attributes_[attribute].subutility[value];
    }

    /// Outcome from domain value labels, one per attribute.
    Outcome outcome(std::initializer_list<std::string> labels) const {
        return outcome(std::vector<std::string>(labels));
    }

    Outcome outcome(const std::vector<std::string>& labels) const {
        if (labels.size() != attributes_.size()) throw ValidationError("outcome", "wrong number of values");
        Outcome x;
        for (std::size_t i = 0; i < labels.size(); ++i) x.values.push_back(attributes_[i].index_of(labels[i]));
        return x;
    }

    friend bool operator==(const DecisionProblem&, const DecisionProblem&) = default;

  private:
    std::vector<Attribute> attributes_;
    std::vector<Alternative> alternatives_;
};

/// Products of sub-utilities over every nonempty subset, given the
/// per-attribute sub-utility values. t_{} = 1 is the recursion seed and has no coordinate.
inline MomentVector moments_from_subutilities(std::span<const double> u) {
    const std::size_t d = dimension_for(u.size());
    Vector t(d + 1);
    t[0] = 1.0;
    for (std::size_t mask = 1; mask <= d; ++mask) {
        const auto low = static_cast<std::size_t>(std::countr_zero(mask));
        t[mask] = t[mask & (mask - 1)] * u[low];
    }
    t.erase(t.begin());
    return MomentVector(std::move(t));
}

inline MomentVector outcome_moments(const DecisionProblem& problem, const Outcome& x) {
    problem.validate(x);
    Vector u(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) u[i] = problem.subutility(i, x[i]);
    return moments_from_subutilities(u);
}

inline MomentVector prospect_moments(const DecisionProblem& problem, const Prospect& p) {
    problem.validate(p);
    Vector t(problem.dimension(), 0.0);
    for (const auto& b : p.support()) axpy(b.probability, outcome_moments(problem, b.outcome).span(), t);
    return MomentVector(std::move(t));
}

/// Multilinear utility, evaluated subset by subset from the sub-utilities.
inline double utility(const DecisionProblem& problem, const ScalingVector& k, const Outcome& x) {
    problem.validate(x);
    double u = 0.0;
    for (std::size_t c = 0; c < k.size(); ++c) {
        const auto y = SubsetIndex::from_coordinate(c);
        double prod = 1.0;
        for (std::size_t i = 0; i < x.size(); ++i)
            if (y.contains(i)) prod *= problem.subutility(i, x[i]);
        u += k[c] * prod;
    }
    return u;
}

/// Expectation of the utility over the support; does not go through moment vectors.
inline double expected_utility(const DecisionProblem& problem, const ScalingVector& k, const Prospect& p) {
    double eu = 0.0;
    for (const auto& b : p.support()) eu += b.probability * utility(problem, k, b.outcome);
    return eu;
}

/// E_p[u_i(x_i)] for every attribute i.
inline Vector marginal_expectations(const DecisionProblem& problem, const Prospect& p) {
    problem.validate(p);
    Vector m(problem.attribute_count(), 0.0);
    for (const auto& b : p.support())
        for (std::size_t i = 0; i < m.size(); ++i) m[i] += b.probability * problem.subutility(i, b.outcome[i]);
    return m;
}

}  // namespace prefcone
