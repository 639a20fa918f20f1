#pragma once

// Decision-analysis queries over a compiled preference cone: induced dominance,
// local-dominance fast paths, potential optimality and query suggestion.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "prefcone/cone.hpp"
#include "prefcone/core.hpp"
#include "prefcone/double_description.hpp"
#include "prefcone/statements.hpp"

namespace prefcone {

/// A compiled constraint store with its consistency verdict and, optionally, the
/// generators of K. Immutable after construction, so safe to share across threads.
class PreferenceCone {
  public:
    explicit PreferenceCone(ConstraintStore w) : w_(std::move(w)), feasibility_(consistency(w_)) {}

    /// Also enumerates generators when the dimension is within `options.cap`.
    PreferenceCone(ConstraintStore w, GeneratorOptions options) : PreferenceCone(std::move(w)) {
        if (w_.dimension() <= options.cap) generators_ = dual_generators(w_, options);
    }

    /// Uses generators enumerated elsewhere, e.g. in exact arithmetic.
    PreferenceCone(ConstraintStore w, GeneratorSet<double> generators) : PreferenceCone(std::move(w)) {
        if (generators.dimension != w_.dimension()) throw ContractViolation("generator dimension mismatch");
        generators_ = std::move(generators);
    }

    const ConstraintStore& constraints() const { return w_; }
    std::size_t dimension() const { return w_.dimension(); }
    const FeasibilityReport& feasibility() const { return feasibility_; }
    bool consistent() const { return feasibility_.consistent(); }
    const std::optional<GeneratorSet<double>>& generators() const { return generators_; }

    void require_consistent() const {
        if (feasibility_.status == ConsistencyStatus::Inconsistent)
            throw InconsistentPreferences("preference statements are inconsistent; compute a conflict core");
        if (feasibility_.status == ConsistencyStatus::Indeterminate)
            throw InconsistentPreferences("consistency could not be decided numerically");
    }

    /// Membership of v in C_W by the generator test when generators are cached, else by LP.
    Membership contains(std::span<const double> v) const {
        if (generators_) return generator_membership(*generators_, v) ? Membership::Member : Membership::NotMember;
        return cone_membership(v, w_);
    }

  private:
    ConstraintStore w_;
    FeasibilityReport feasibility_;
    std::optional<GeneratorSet<double>> generators_;
};

/// Relation between the first and second prospect. Preceq is the "+1" of the
/// dominance test: every admissible utility rates the first no higher than the second.
enum class Verdict { Preceq, Succeq, Equivalent, Incomparable, Indeterminate };

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::Preceq: return "preceq";
        case Verdict::Succeq: return "succeq";
        case Verdict::Equivalent: return "equivalent";
        case Verdict::Incomparable: return "incomparable";
        case Verdict::Indeterminate: return "indeterminate";
    }
    return "?";
}

inline Verdict reversed(Verdict v) {
    if (v == Verdict::Preceq) return Verdict::Succeq;
    if (v == Verdict::Succeq) return Verdict::Preceq;
    return v;
}

enum class Method { Generator, LP, LocalScreen };

inline const char* to_string(Method m) {
    switch (m) {
        case Method::Generator: return "generator";
        case Method::LP: return "lp";
        case Method::LocalScreen: return "local_screen";
    }
    return "?";
}

struct DominanceResult {
    Verdict verdict = Verdict::Indeterminate;
    Method method = Method::LP;
    /// For Preceq/Succeq: no admissible utility ties the two prospects.
    bool strict = false;
    /// For Incomparable: admissible k rating the first prospect strictly higher.
    std::optional<ScalingVector> first_preferred;
    /// For Incomparable: admissible k rating the second prospect strictly higher.
    std::optional<ScalingVector> second_preferred;
    double margin = 0.0;  ///< smallest normalized witness margin

    /// +1, -1 or 0 in the orientation of the dominance test; nullopt for Equivalent/Indeterminate.
    std::optional<int> code() const {
        switch (verdict) {
            case Verdict::Preceq: return 1;
            case Verdict::Succeq: return -1;
            case Verdict::Incomparable: return 0;
            default: return std::nullopt;
        }
    }
};

struct DominanceOptions {
    bool witnesses = true;  ///< solve the witness LPs for Incomparable and the strictness LP for +-1
};

namespace detail {

/// Admissible k with <k, v> >= eps |v|, if any. Margins at or below 1e-9 count as none.
inline std::optional<SlackResult> witness_for(const PreferenceCone& cone, std::span<const double> v) {
    const std::vector<Vector> extra{negate(v)};
    auto r = max_slack(cone.constraints(), {}, extra);
    if (r.status != lp::Status::Optimal || r.epsilon <= kSlackThreshold) return std::nullopt;
    return r;
}

/// Whether some admissible k has <k, v> >= 0, i.e. v in C_W is not strict.
inline bool tie_possible(const PreferenceCone& cone, std::span<const double> v) {
    const std::vector<Vector> extra{negate(v)};
    const auto r = max_slack(cone.constraints(), extra);
    return r.status == lp::Status::Optimal && r.epsilon > kSlackThreshold;
}

}  // namespace detail

/// Dominance of moment vectors tp vs tq under every admissible scaling vector.
inline DominanceResult induced_dominance(const MomentVector& tp, const MomentVector& tq, const PreferenceCone& cone,
                                         DominanceOptions options = {}) {
    cone.require_consistent();
    DominanceResult out;
    out.method = cone.generators() ? Method::Generator : Method::LP;
    const Vector v = difference(tp, tq);
    const Membership forward = cone.contains(v);
    const Membership backward = cone.contains(negate(v));
    if (forward == Membership::Indeterminate || backward == Membership::Indeterminate) return out;

    const bool fwd = forward == Membership::Member, bwd = backward == Membership::Member;
    if (fwd && bwd) {
        out.verdict = Verdict::Equivalent;
    } else if (fwd || bwd) {
        out.verdict = fwd ? Verdict::Preceq : Verdict::Succeq;
        if (options.witnesses) out.strict = !detail::tie_possible(cone, fwd ? v : negate(v));
    } else {
        out.verdict = Verdict::Incomparable;
        if (options.witnesses) {
            const auto up = detail::witness_for(cone, v);
            const auto down = detail::witness_for(cone, negate(v));
            if (!up || !down) {
                out.verdict = Verdict::Indeterminate;
                return out;
            }
            out.first_preferred = up->k;
            out.second_preferred = down->k;
            out.margin = std::min(up->epsilon, down->epsilon);
        }
    }
    return out;
}

inline DominanceResult induced_dominance(const DecisionProblem& problem, const Prospect& p, const Prospect& q,
                                         const PreferenceCone& cone, DominanceOptions options = {}) {
    return induced_dominance(prospect_moments(problem, p), prospect_moments(problem, q), cone, options);
}

/// Rescales k so its coefficients sum to one, which makes the best outcome worth 1.
/// Left unchanged when the sum is not positive.
inline ScalingVector display_normalized(const ScalingVector& k) {
    double sum = 0.0;
    for (double x : k) sum += x;
    if (!(sum > 0.0)) return k;
    return ScalingVector(scaled(k.coords(), 1.0 / sum));
}

/// True when p equals the product of its marginals, to 1e-9 per outcome probability.
inline bool is_product(const Prospect& p) {
    const auto& support = p.support();
    if (support.empty()) return false;
    const std::size_t n = support.front().outcome.size();
    std::vector<std::map<std::size_t, double>> marginal(n);
    for (const auto& b : support)
        for (std::size_t i = 0; i < n; ++i) marginal[i][b.outcome[i]] += b.probability;
    // A product distribution charges every combination of marginal values.
    double cells = 1.0;
    for (const auto& m : marginal) cells *= static_cast<double>(m.size());
    if (cells != static_cast<double>(support.size())) return false;
    for (const auto& b : support) {
        double prod = 1.0;
        for (std::size_t i = 0; i < n; ++i) prod *= marginal[i].at(b.outcome[i]);
        if (std::abs(prod - b.probability) > 1e-9) return false;
    }
    return true;
}

enum class ScreenMode { Additive, ProductDistributions };

inline constexpr double kMarginalTolerance = 1e-12;

/// Dominance from marginal sub-utility expectations alone. Sound under an additive
/// restriction, or when both prospects are product distributions.
inline std::optional<Verdict> local_dominance_screen(const DecisionProblem& problem, const Prospect& p,
                                                     const Prospect& q, ScreenMode mode,
                                                     const ConstraintStore& w) {
    if (mode == ScreenMode::Additive && !w.additive())
        throw ContractViolation("additive screen needs the additive restriction in the store");
    if (mode == ScreenMode::ProductDistributions && !(is_product(p) && is_product(q)))
        throw ContractViolation("product screen needs both prospects to be product distributions");
    const auto ep = marginal_expectations(problem, p);
    const auto eq = marginal_expectations(problem, q);
    bool le = true, ge = true;
    for (std::size_t i = 0; i < ep.size(); ++i) {
        le = le && ep[i] <= eq[i] + kMarginalTolerance;
        ge = ge && ep[i] >= eq[i] - kMarginalTolerance;
    }
    if (le && ge) return Verdict::Equivalent;
    if (le) return Verdict::Preceq;
    if (ge) return Verdict::Succeq;
    return std::nullopt;
}

/// Screen mode that applies to the pair, if any.
inline std::optional<ScreenMode> applicable_screen(const Prospect& p, const Prospect& q, const ConstraintStore& w) {
    if (w.additive()) return ScreenMode::Additive;
    if (is_product(p) && is_product(q)) return ScreenMode::ProductDistributions;
    return std::nullopt;
}

struct PotentialOptimality {
    bool weakly = false;    ///< some admissible k rates r at least as high as every other alternative
    bool strictly = false;  ///< some admissible k rates r strictly above every other alternative
    std::optional<ScalingVector> witness;
    bool pairwise_screen = false;  ///< t_r - t_s outside C_W for every s
    Intersection cone_intersection = Intersection::Indeterminate;  ///< cone{t_r - t_s} meets C_W only at 0
};

inline PotentialOptimality potential_optimality(const std::vector<MomentVector>& moments, std::size_t r,
                                                const PreferenceCone& cone) {
    cone.require_consistent();
    PotentialOptimality out;
    std::vector<Vector> toward_others, from_r;
    for (std::size_t s = 0; s < moments.size(); ++s) {
        if (s == r) continue;
        toward_others.push_back(difference(moments[s], moments[r]));
        from_r.push_back(difference(moments[r], moments[s]));
    }
    const auto weak = max_slack(cone.constraints(), toward_others);
    out.weakly = weak.status == lp::Status::Optimal && weak.epsilon > kSlackThreshold;
    if (out.weakly) out.witness = weak.k;
    const auto strict = max_slack(cone.constraints(), {}, toward_others);
    out.strictly = strict.status == lp::Status::Optimal && strict.epsilon > kSlackThreshold;
    if (out.strictly) out.witness = strict.k;

    out.pairwise_screen = std::all_of(from_r.begin(), from_r.end(), [&](const Vector& v) {
        return cone_membership(v, cone.constraints()) == Membership::NotMember;
    });
    out.cone_intersection = trivial_intersection(from_r, cone.constraints());
    return out;
}

struct AlternativeReport {
    std::string name;
    std::vector<std::string> dominated_by;           ///< alternatives s with r Preceq s
    std::vector<std::string> strictly_dominated_by;  ///< the subset where no admissible k ties them
    std::vector<std::string> equivalent_to;
    PotentialOptimality optimality;

    bool potentially_optimal() const { return optimality.weakly; }
};

struct PairVerdict {
    std::size_t first, second;  ///< first < second
    DominanceResult result;
};

struct OptimalityReport {
    std::vector<AlternativeReport> alternatives;
    std::vector<PairVerdict> pairs;

    const PairVerdict* find(std::size_t a, std::size_t b) const {
        for (const auto& p : pairs)
            if (p.first == a && p.second == b) return &p;
        return nullptr;
    }
};

struct ReportOptions {
    bool screens = true;
    bool witnesses = true;
};

/// Pairwise dominance with local fast paths where they apply, then potential optimality.
inline OptimalityReport nondominated_set(const DecisionProblem& problem, const PreferenceCone& cone,
                                         ReportOptions options = {}) {
    cone.require_consistent();
    const auto& alts = problem.alternatives();
    std::vector<MomentVector> moments;
    for (const auto& a : alts) moments.push_back(prospect_moments(problem, a.prospect));

    OptimalityReport out;
    for (const auto& a : alts) out.alternatives.push_back({a.name, {}, {}, {}, {}});
    for (std::size_t i = 0; i < alts.size(); ++i) {
        for (std::size_t j = i + 1; j < alts.size(); ++j) {
            DominanceResult res;
            std::optional<Verdict> screened;
            if (options.screens)
                if (auto mode = applicable_screen(alts[i].prospect, alts[j].prospect, cone.constraints()))
                    screened = local_dominance_screen(problem, alts[i].prospect, alts[j].prospect, *mode,
                                                      cone.constraints());
            if (screened) {
                res.verdict = *screened;
                res.method = Method::LocalScreen;
                // Admissible scalings raise utility strictly in each marginal expectation.
                res.strict = *screened != Verdict::Equivalent;
            } else {
                res = induced_dominance(moments[i], moments[j], cone, {options.witnesses});
            }
            auto& ri = out.alternatives[i];
            auto& rj = out.alternatives[j];
            switch (res.verdict) {
                case Verdict::Preceq:
                    ri.dominated_by.push_back(alts[j].name);
                    if (res.strict) ri.strictly_dominated_by.push_back(alts[j].name);
                    break;
                case Verdict::Succeq:
                    rj.dominated_by.push_back(alts[i].name);
                    if (res.strict) rj.strictly_dominated_by.push_back(alts[i].name);
                    break;
                case Verdict::Equivalent:
                    ri.equivalent_to.push_back(alts[j].name);
                    rj.equivalent_to.push_back(alts[i].name);
                    break;
                default: break;
            }
            out.pairs.push_back({i, j, std::move(res)});
        }
    }
    for (std::size_t r = 0; r < alts.size(); ++r) out.alternatives[r].optimality = potential_optimality(moments, r, cone);
    return out;
}

/// A proposed statement for the decision maker to confirm or reverse.
struct Query {
    Statement statement;
    std::string encoding;  ///< canonical text used for tie-breaking
    std::size_t score = 0;  ///< verdict changes guaranteed whichever way it is answered
    std::optional<std::pair<std::size_t, std::size_t>> alternatives;  ///< for comparisons of two alternatives
};

namespace detail {

inline Statement flipped(Statement s) {
    std::visit([](auto& x) { std::swap(x.worse, x.better); }, s);
    return s;
}

inline std::vector<Verdict> pair_verdicts(const std::vector<MomentVector>& moments, const PreferenceCone& cone) {
    std::vector<Verdict> out;
    for (std::size_t i = 0; i < moments.size(); ++i)
        for (std::size_t j = i + 1; j < moments.size(); ++j)
            out.push_back(induced_dominance(moments[i], moments[j], cone, {false}).verdict);
    return out;
}

}  // namespace detail

/// Candidate queries: strict comparisons of currently incomparable alternatives, and
/// two-attribute tradeoffs (best of one, worst of the other, against the reverse).
/// Each is scored by the fewest pair verdicts it changes over its consistent answers.
inline std::optional<Query> suggest_query(const DecisionProblem& problem, const PreferenceCone& cone,
                                          const std::set<std::string>& skip = {}) {
    if (!cone.consistent()) return std::nullopt;
    const auto& alts = problem.alternatives();
    std::vector<MomentVector> moments;
    for (const auto& a : alts) moments.push_back(prospect_moments(problem, a.prospect));
    const auto current = detail::pair_verdicts(moments, cone);

    std::vector<Query> candidates;
    std::size_t pair = 0;
    for (std::size_t i = 0; i < alts.size(); ++i)
        for (std::size_t j = i + 1; j < alts.size(); ++j, ++pair)
            if (current[pair] == Verdict::Incomparable)
                candidates.push_back({Comparison{alts[i].prospect, alts[j].prospect, true},
                                      "comparison:" + alts[i].name + ":" + alts[j].name, 0, std::pair{i, j}});
    const auto& attrs = problem.attributes();
    for (std::size_t i = 0; i < attrs.size(); ++i)
        for (std::size_t j = i + 1; j < attrs.size(); ++j) {
            CeterisParibus cp{{i, j},
                              {attrs[i].best_value(), attrs[j].worst_value()},
                              {attrs[i].worst_value(), attrs[j].best_value()},
                              true};
            candidates.push_back({cp,
                                  "ceteris_paribus:" + attrs[i].name + "=" + attrs[i].domain[cp.worse[0]] + "," +
                                      attrs[j].name + "=" + attrs[j].domain[cp.worse[1]] + ":" + attrs[i].name +
                                      "=" + attrs[i].domain[cp.better[0]] + "," + attrs[j].name + "=" +
                                      attrs[j].domain[cp.better[1]],
                                  0, std::nullopt});
        }

    std::optional<Query> best;
    for (auto& q : candidates) {
        if (skip.contains(q.encoding)) continue;
        std::optional<std::size_t> score;
        for (const Statement& answer : {q.statement, detail::flipped(q.statement)}) {
            ConstraintStore w = cone.constraints();
            for (auto& c : statement_constraints(problem, {"query", answer}))
                if (!c.vacuous()) w.add(std::move(c));
            const PreferenceCone next(std::move(w));
            if (!next.consistent()) continue;
            const auto after = detail::pair_verdicts(moments, next);
            std::size_t changed = 0;
            for (std::size_t k = 0; k < after.size(); ++k) changed += after[k] != current[k];
            score = score ? std::min(*score, changed) : changed;
        }
        if (!score || *score == 0) continue;
        q.score = *score;
        if (!best || q.score > best->score || (q.score == best->score && q.encoding < best->encoding)) best = q;
    }
    return best;
}

}  // namespace prefcone
