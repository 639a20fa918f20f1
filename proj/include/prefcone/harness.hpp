#pragma once

// Randomized self-check of the inference layer. Statements come from a hidden
// admissible utility, admissible scalings are drawn by hit-and-run, and every
// verdict is checked against the samples and against the generator path.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "prefcone/cone.hpp"
#include "prefcone/double_description.hpp"
#include "prefcone/inference.hpp"
#include "prefcone/lp.hpp"
#include "prefcone/random_instances.hpp"

namespace prefcone::harness {

/// Hit-and-run over {k in [-1,1]^d : weak rows <= 0, strict rows <= -eps/2} with unit rows,
/// where eps is the maximal strict slack. Implicit equalities are detected by LP and
/// directions are kept inside their null space.
class AdmissibleSampler {
  public:
    AdmissibleSampler(const ConstraintStore& w, std::mt19937_64& rng) : rng_(rng), d_(w.dimension()) {
        const auto base = consistency(w);
        if (!base.consistent()) return;
        const double eps = base.epsilon / 2;
        for (const auto& c : w) {
            rows_.push_back(normalized(c.w));
            rhs_.push_back(c.strict ? -eps : 0.0);
            strict_.push_back(c.strict);
        }
        std::vector<Vector> equalities;
        Vector centre = base.witness->coords();
        std::size_t points = 1;
        for (std::size_t i = 0; i < rows_.size(); ++i) {
            if (strict_[i]) continue;
            auto prog = polytope();
            prog.maximize(negate(rows_[i]));
            const auto r = lp::solve_with_exact_fallback(prog);
            if (r.status != lp::Status::Optimal) continue;
            if (r.value <= 1e-9) {
                equalities.push_back(rows_[i]);
                continue;
            }
            axpy(1.0, r.point, centre);
            ++points;
        }
        point_ = scaled(centre, 1.0 / static_cast<double>(points));
        // Orthonormal basis of the equality span.
        for (auto e : equalities) {
            for (const auto& b : basis_) axpy(-dot(b, e), b, e);
            const double n = norm2(e);
            if (n > 1e-9) basis_.push_back(scaled(e, 1.0 / n));
        }
        ready_ = true;
    }

    bool ready() const { return ready_; }

    /// Next point of the chain, after `thin` steps.
    ScalingVector next(std::size_t thin = 3) {
        for (std::size_t s = 0; s < thin; ++s) step();
        return ScalingVector(point_);
    }

  private:
    lp::LinearProgram<double> polytope() const {
        lp::LinearProgram<double> prog(d_);
        for (std::size_t j = 0; j < d_; ++j) prog.set_bounds(j, -1.0, 1.0);
        for (std::size_t i = 0; i < rows_.size(); ++i) prog.add(rows_[i], lp::Relation::LessEqual, rhs_[i]);
        return prog;
    }

    void step() {
        std::normal_distribution<double> gauss;
        Vector dir(d_);
        for (auto& x : dir) x = gauss(rng_);
        for (const auto& b : basis_) axpy(-dot(b, dir), b, dir);
        const double n = norm2(dir);
        if (n < 1e-12) return;
        for (auto& x : dir) x /= n;

        double lo = -1e300, hi = 1e300;
        auto clip = [&](double a, double slack) {  // a t <= slack
            if (std::abs(a) < 1e-14) return;
            if (a > 0)
                hi = std::min(hi, slack / a);
            else
                lo = std::max(lo, slack / a);
        };
        for (std::size_t i = 0; i < rows_.size(); ++i) {
            const double a = dot(rows_[i], dir);
            // Equality rows are orthogonal to dir up to rounding.
            if (!strict_[i] && std::abs(a) < 1e-12) continue;
            clip(a, std::max(0.0, rhs_[i] - dot(rows_[i], point_)));
        }
        for (std::size_t j = 0; j < d_; ++j) {
            clip(dir[j], std::max(0.0, 1.0 - point_[j]));
            clip(-dir[j], std::max(0.0, 1.0 + point_[j]));
        }
        if (!(lo < hi)) return;
        const double t = std::uniform_real_distribution<double>(lo, hi)(rng_);
        axpy(t, dir, point_);
    }

    std::mt19937_64& rng_;
    std::size_t d_;
    std::vector<Vector> rows_;
    Vector rhs_;
    std::vector<bool> strict_;
    std::vector<Vector> basis_;
    Vector point_;
    bool ready_ = false;
};

struct Options {
    std::uint64_t seed = 1;
    std::size_t attributes = 3;
    std::size_t trials = 100;
    std::size_t samples = 200;       ///< admissible scalings per trial
    std::size_t max_statements = 6;
    std::size_t generator_cap = kDefaultGeneratorCap;
    bool exact = false;              ///< enumerate generators in rational arithmetic
};

struct Summary {
    std::size_t trials = 0;
    std::size_t verdicts = 0;   ///< pair verdicts checked
    std::size_t samples = 0;    ///< admissible scalings drawn
    std::size_t incomparable = 0;
    std::vector<std::string> violations;

    bool ok() const { return violations.empty(); }
};

namespace detail {

inline constexpr double kSignTolerance = 1e-7;

inline bool admissible(const ConstraintStore& w, const ScalingVector& k) {
    for (const auto& c : w) {
        const double v = dot(normalized(c.w), k.coords());
        if (c.strict ? v >= -1e-12 : v > 1e-9) return false;
    }
    return true;
}

}  // namespace detail

/// One trial per index; each trial's randomness is derived from (seed, index) alone.
inline void run_trial(const Options& options, std::size_t trial, Summary& summary) {
    std::seed_seq seq{options.seed, static_cast<std::uint64_t>(trial)};
    std::mt19937_64 rng(seq);
    const auto problem = random::problem(rng, {options.attributes, 3, 4, 3});
    const auto truth = random::admissible_scaling(rng, problem);
    const auto statements =
        random::statements_for(rng, problem, truth, random::index(rng, 0, options.max_statements));
    auto fail = [&](const std::string& what) {
        summary.violations.push_back("trial " + std::to_string(trial) + ": " + what);
    };

    const auto& alts = problem.alternatives();
    std::vector<MomentVector> moments;
    for (const auto& a : alts) moments.push_back(prospect_moments(problem, a.prospect));

    std::vector<Verdict> previous;
    for (std::size_t prefix = 0; prefix <= statements.size(); ++prefix) {
        const bool last = prefix == statements.size();
        const std::vector<IdentifiedStatement> log(statements.begin(), statements.begin() + static_cast<std::ptrdiff_t>(prefix));
        const PreferenceCone cone(compile(problem, log));
        if (!cone.consistent()) {
            fail("statements drawn from an admissible utility are inconsistent (prefix " + std::to_string(prefix) + ")");
            return;
        }
        std::vector<Verdict> verdicts;
        std::vector<DominanceResult> results;
        for (std::size_t i = 0; i < alts.size(); ++i)
            for (std::size_t j = i + 1; j < alts.size(); ++j) {
                results.push_back(induced_dominance(moments[i], moments[j], cone));
                verdicts.push_back(results.back().verdict);
            }

        // Monotonicity: a decided pair stays decided in the same direction.
        for (std::size_t k = 0; k < previous.size(); ++k) {
            const auto before = previous[k], after = verdicts[k];
            const bool kept = before == Verdict::Incomparable || before == after ||
                              (before != Verdict::Equivalent && after == Verdict::Equivalent);
            if (!kept)
                fail(std::string("monotonicity: ") + to_string(before) + " became " + to_string(after) +
                     " after statement " + std::to_string(prefix));
        }
        previous = verdicts;
        if (!last) continue;

        std::optional<PreferenceCone> with_generators;
        if (problem.dimension() <= options.generator_cap) {
            if (options.exact)
                with_generators.emplace(cone.constraints(), to_double(dual_generators_exact(cone.constraints())));
            else
                with_generators.emplace(cone.constraints(), GeneratorOptions{options.generator_cap});
        }

        AdmissibleSampler sampler(cone.constraints(), rng);
        std::vector<ScalingVector> ks;
        for (std::size_t s = 0; s < options.samples && sampler.ready(); ++s) {
            ks.push_back(sampler.next());
            if (!detail::admissible(cone.constraints(), ks.back())) fail("sampler left the admissible set");
        }
        summary.samples += ks.size();

        std::size_t pair = 0;
        for (std::size_t i = 0; i < alts.size(); ++i)
            for (std::size_t j = i + 1; j < alts.size(); ++j, ++pair) {
                const auto& r = results[pair];
                const std::string name = alts[i].name + "/" + alts[j].name;
                const Vector v = difference(moments[i], moments[j]);
                const double scale = std::max(norm_inf(v), 1e-300);
                ++summary.verdicts;

                const auto back = induced_dominance(moments[j], moments[i], cone, {false});
                if (back.verdict != reversed(r.verdict)) fail("asymmetry on " + name);

                if (with_generators) {
                    const auto g = induced_dominance(moments[i], moments[j], *with_generators, {false});
                    if (g.verdict != r.verdict)
                        fail("generator path says " + std::string(to_string(g.verdict)) + ", LP says " +
                             to_string(r.verdict) + " on " + name);
                }

                switch (r.verdict) {
                    case Verdict::Preceq:
                    case Verdict::Succeq:
                    case Verdict::Equivalent:
                        for (const auto& k : ks) {
                            const double gap = dot(k.coords(), v) / scale;  // EU(p_i) - EU(p_j)
                            const bool bad = (r.verdict == Verdict::Preceq && gap > detail::kSignTolerance) ||
                                             (r.verdict == Verdict::Succeq && gap < -detail::kSignTolerance) ||
                                             (r.verdict == Verdict::Equivalent && std::abs(gap) > detail::kSignTolerance);
                            if (bad) {
                                fail(std::string("soundness: sampled utility contradicts ") + to_string(r.verdict) +
                                     " on " + name);
                                break;
                            }
                        }
                        break;
                    case Verdict::Incomparable: {
                        ++summary.incomparable;
                        const bool ok = r.first_preferred && r.second_preferred &&
                                        detail::admissible(cone.constraints(), *r.first_preferred) &&
                                        detail::admissible(cone.constraints(), *r.second_preferred) &&
                                        dot(r.first_preferred->coords(), v) > 1e-9 &&
                                        dot(r.second_preferred->coords(), v) < -1e-9;
                        if (!ok) fail("completeness: witnesses do not certify incomparability on " + name);
                        break;
                    }
                    case Verdict::Indeterminate: fail("indeterminate verdict on " + name); break;
                }
            }
    }
}

inline Summary run(const Options& options) {
    Summary summary;
    for (std::size_t t = 0; t < options.trials; ++t) {
        run_trial(options, t, summary);
        ++summary.trials;
    }
    return summary;
}

}  // namespace prefcone::harness
