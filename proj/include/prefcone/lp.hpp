#pragma once

// Dense two-phase primal simplex with implicit variable bounds. Dantzig pricing,
// switching to Bland's rule while pivots stay degenerate.
// Deterministic for a fixed input order. Instantiable over double or Rational.

#include <algorithm>
#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "prefcone/errors.hpp"
#include "prefcone/scalar.hpp"

namespace prefcone::lp {

enum class Relation { LessEqual, Equal, GreaterEqual };

enum class Status { Optimal, Infeasible, Unbounded, NumericalFailure };

inline const char* to_string(Status s) {
    switch (s) {
        case Status::Optimal: return "optimal";
        case Status::Infeasible: return "infeasible";
        case Status::Unbounded: return "unbounded";
        case Status::NumericalFailure: return "numerical_failure";
    }
    return "?";
}

template <class T>
struct Result {
    Status status = Status::NumericalFailure;
    std::vector<T> point;  ///< feasible point (Optimal)
    T value{};             ///< objective value at `point` (Optimal)
    std::vector<T> ray;    ///< improving recession direction (Unbounded)
    std::size_t iterations = 0;
};

struct Options {
    std::size_t max_iterations = 0;  ///< 0 picks a size-based default
};

template <class T = double>
class LinearProgram {
    using Traits = ScalarTraits<T>;

  public:
    /// Variables start out free.
    explicit LinearProgram(std::size_t variables)
        : n_(variables), lower_(variables), upper_(variables) {}

    std::size_t variables() const { return n_; }
    std::size_t rows() const { return rows_.size(); }

    void set_bounds(std::size_t j, std::optional<T> lo, std::optional<T> hi) {
        if (lo && hi && *hi < *lo) throw ContractViolation("variable bounds cross");
        lower_[j] = std::move(lo);
        upper_[j] = std::move(hi);
    }

    void add(std::vector<T> coeffs, Relation rel, T rhs) {
        if (coeffs.size() != n_) throw ContractViolation("row length mismatch");
        rows_.push_back({std::move(coeffs), rel, std::move(rhs)});
    }

    void maximize(std::vector<T> c) {
        if (c.size() != n_) throw ContractViolation("objective length mismatch");
        objective_ = std::move(c);
    }

    Result<T> solve(Options options = {}) const;

    /// The same program over another scalar type, converting through double.
    template <class U>
    LinearProgram<U> cast() const {
        auto conv = [](const T& x) { return ScalarTraits<U>::from_double(Traits::to_double(x)); };
        LinearProgram<U> out(n_);
        for (std::size_t j = 0; j < n_; ++j) {
            std::optional<U> lo, hi;
            if (lower_[j]) lo = conv(*lower_[j]);
            if (upper_[j]) hi = conv(*upper_[j]);
            out.set_bounds(j, lo, hi);
        }
        for (const auto& row : rows_) {
            std::vector<U> coeffs;
            for (const auto& a : row.coeffs) coeffs.push_back(conv(a));
            out.add(std::move(coeffs), row.rel, conv(row.rhs));
        }
        if (objective_) {
            std::vector<U> c;
            for (const auto& a : *objective_) c.push_back(conv(a));
            out.maximize(std::move(c));
        }
        return out;
    }

  private:
    struct RowData {
        std::vector<T> coeffs;
        Relation rel;
        T rhs;
    };

    std::size_t n_;
    std::vector<std::optional<T>> lower_, upper_;
    std::vector<RowData> rows_;
    std::optional<std::vector<T>> objective_;
};

namespace detail {

// Internal standard form: columns y >= 0 with optional finite upper bounds,
// equality rows with nonnegative right-hand sides.
template <class T>
class Tableau {
    using Traits = ScalarTraits<T>;

  public:
    Tableau(std::size_t rows, std::size_t cols) : m_(rows), n_(cols), a_(rows * cols), beta_(rows), basis_(rows) {}

    T& at(std::size_t i, std::size_t j) { return a_[i * n_ + j]; }
    const T& at(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }

    std::size_t m_, n_;
    std::vector<T> a_;
    std::vector<T> beta_;             // basic values
    std::vector<std::size_t> basis_;  // column basic in each row
    std::vector<std::optional<T>> upper_;
    std::vector<char> at_upper_;
    std::vector<char> is_basic_;
    std::vector<char> eligible_;
    std::vector<T> cost_;
    std::vector<T> reduced_;  // c_j - c_B^T B^-1 a_j
    bool bland_ = false;
    bool degenerate_ = false;  // last step moved no basic value

    T value_of(std::size_t j) const {
        if (is_basic_[j]) {
            for (std::size_t i = 0; i < m_; ++i)
                if (basis_[i] == j) return beta_[i];
        }
        return at_upper_[j] ? *upper_[j] : T(0);
    }

    void price() {
        reduced_ = cost_;
        for (std::size_t i = 0; i < m_; ++i) {
            const T& cb = cost_[basis_[i]];
            if (cb == 0) continue;
            for (std::size_t j = 0; j < n_; ++j) reduced_[j] -= cb * at(i, j);
        }
    }

    void pivot(std::size_t r, std::size_t c) {
        const T piv = at(r, c);
        std::vector<std::size_t> nz;
        for (std::size_t j = 0; j < n_; ++j) {
            if (at(r, j) != 0) {
                at(r, j) /= piv;
                nz.push_back(j);
            }
        }
        for (std::size_t i = 0; i < m_; ++i) {
            if (i == r) continue;
            const T f = at(i, c);
            if (f == 0) continue;
            for (std::size_t j : nz) at(i, j) -= f * at(r, j);
            at(i, c) = 0;
        }
        const T fr = reduced_[c];
        if (fr != 0) {
            for (std::size_t j : nz) reduced_[j] -= fr * at(r, j);
            reduced_[c] = 0;
        }
        is_basic_[basis_[r]] = 0;
        basis_[r] = c;
        is_basic_[c] = 1;
        at_upper_[c] = 0;
    }

    enum class Step { Optimal, Unbounded, Moved };

    // Entering column: largest improving reduced cost, or the lowest index under Bland.
    // Leaving row: smallest ratio; ties go to the largest pivot, or the lowest basic index under Bland.
    Step iterate(std::size_t& unbounded_col, int& unbounded_dir) {
        const T tol = Traits::tolerance();
        const T ptol = Traits::pivot_tolerance();
        std::size_t enter = n_;
        int dir = 0;
        T gain(0);
        for (std::size_t j = 0; j < n_; ++j) {
            if (is_basic_[j] || !eligible_[j]) continue;
            if (upper_[j] && *upper_[j] <= tol) continue;
            int d = 0;
            if (!at_upper_[j] && reduced_[j] > tol) d = 1;
            if (at_upper_[j] && reduced_[j] < -tol) d = -1;
            if (d == 0) continue;
            const T g = Traits::abs(reduced_[j]);
            if (enter == n_ || g > gain) enter = j, dir = d, gain = g;
            if (bland_) break;
        }
        if (enter == n_) return Step::Optimal;

        std::optional<T> best;
        std::size_t leave_row = m_;
        bool leave_upper = false;
        for (std::size_t i = 0; i < m_; ++i) {
            const T alpha = dir > 0 ? at(i, enter) : T(-at(i, enter));
            std::optional<T> ratio;
            bool to_upper = false;
            if (alpha > ptol) {
                ratio = (beta_[i] > 0 ? beta_[i] : T(0)) / alpha;
            } else if (alpha < -ptol && upper_[basis_[i]]) {
                const T room = *upper_[basis_[i]] - beta_[i];
                ratio = (room > 0 ? room : T(0)) / T(-alpha);
                to_upper = true;
            }
            if (!ratio) continue;
            const bool tie = best && Traits::abs(*ratio - *best) <= tol;
            const bool better_tie =
                tie && (bland_ ? basis_[i] < basis_[leave_row]
                               : Traits::abs(at(i, enter)) > Traits::abs(at(leave_row, enter)));
            if (!best || *ratio < *best - tol || better_tie) {
                best = ratio;
                leave_row = i;
                leave_upper = to_upper;
            }
        }
        const auto& bound = upper_[enter];
        if (bound && (!best || *bound <= *best)) {
            // bound flip, no basis change
            const T step = dir > 0 ? *bound : T(-*bound);
            for (std::size_t i = 0; i < m_; ++i)
                if (at(i, enter) != 0) beta_[i] -= step * at(i, enter);
            at_upper_[enter] = dir > 0;
            degenerate_ = *bound <= tol;
            return Step::Moved;
        }
        if (!best) {
            unbounded_col = enter;
            unbounded_dir = dir;
            return Step::Unbounded;
        }
        const T t = *best;
        degenerate_ = t <= tol;
        const T step = dir > 0 ? t : T(-t);
        for (std::size_t i = 0; i < m_; ++i)
            if (at(i, enter) != 0) beta_[i] -= step * at(i, enter);
        const T entering_value = (at_upper_[enter] ? *upper_[enter] : T(0)) + step;
        const std::size_t leaving = basis_[leave_row];
        pivot(leave_row, enter);
        beta_[leave_row] = entering_value;
        at_upper_[leaving] = leave_upper;
        return Step::Moved;
    }
};

}  // namespace detail

template <class T>
Result<T> LinearProgram<T>::solve(Options options) const {
    using Traits = ScalarTraits<T>;
    const T tol = Traits::tolerance();

    // Column mapping for each original variable: x_j = offset_j + sum(sign * y_col).
    struct Map {
        T offset{};
        std::size_t col = 0;
        int sign = 1;
        std::optional<std::size_t> neg_col;  // split variables: x = y_col - y_neg
    };
    std::vector<Map> map(n_);
    std::vector<std::optional<T>> col_upper;
    for (std::size_t j = 0; j < n_; ++j) {
        const auto& lo = lower_[j];
        const auto& hi = upper_[j];
        Map mp;
        if (lo && hi && *lo < 0 && *hi > 0) {
            mp.col = col_upper.size();
            col_upper.push_back(*hi);
            mp.neg_col = col_upper.size();
            col_upper.push_back(T(-*lo));
        } else if (lo) {
            mp.offset = *lo;
            mp.col = col_upper.size();
            col_upper.push_back(hi ? std::optional<T>(*hi - *lo) : std::nullopt);
        } else if (hi) {
            mp.offset = *hi;
            mp.sign = -1;
            mp.col = col_upper.size();
            col_upper.push_back(std::nullopt);
        } else {
            mp.col = col_upper.size();
            col_upper.push_back(std::nullopt);
            mp.neg_col = col_upper.size();
            col_upper.push_back(std::nullopt);
        }
        map[j] = mp;
    }
    const std::size_t nx = col_upper.size();
    const std::size_t m = rows_.size();

    // Rows in internal columns, sign-normalized to nonnegative rhs.
    std::vector<std::vector<T>> coeff(m, std::vector<T>(nx));
    std::vector<T> rhs(m);
    std::vector<int> slack_sign(m, 0);
    std::vector<char> flipped(m, 0);
    std::size_t slacks = 0;
    for (std::size_t i = 0; i < m; ++i) {
        const auto& row = rows_[i];
        T b = row.rhs;
        for (std::size_t j = 0; j < n_; ++j) {
            const T& a = row.coeffs[j];
            if (a == 0) continue;
            b -= a * map[j].offset;
            coeff[i][map[j].col] += map[j].sign > 0 ? a : T(-a);
            if (map[j].neg_col) coeff[i][*map[j].neg_col] -= a;
        }
        if (row.rel == Relation::LessEqual) slack_sign[i] = 1, ++slacks;
        if (row.rel == Relation::GreaterEqual) slack_sign[i] = -1, ++slacks;
        if (b < 0) {
            flipped[i] = 1;
            b = -b;
            for (auto& a : coeff[i]) a = -a;
            slack_sign[i] = -slack_sign[i];
        }
        rhs[i] = b;
    }
    std::size_t artificials = 0;
    for (std::size_t i = 0; i < m; ++i)
        if (slack_sign[i] != 1) ++artificials;

    const std::size_t ncols = nx + slacks + artificials;
    detail::Tableau<T> tab(m, ncols);
    tab.upper_ = col_upper;
    tab.upper_.resize(ncols);
    tab.at_upper_.assign(ncols, 0);
    tab.is_basic_.assign(ncols, 0);
    tab.eligible_.assign(ncols, 1);
    tab.cost_.assign(ncols, T(0));
    std::vector<char> is_artificial(ncols, 0);
    {
        std::size_t s = nx, a = nx + slacks;
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < nx; ++j) tab.at(i, j) = coeff[i][j];
            tab.beta_[i] = rhs[i];
            if (slack_sign[i] != 0) {
                tab.at(i, s) = T(slack_sign[i]);
                if (slack_sign[i] == 1) {
                    tab.basis_[i] = s;
                    tab.is_basic_[s] = 1;
                }
                ++s;
            }
            if (slack_sign[i] != 1) {
                tab.at(i, a) = T(1);
                tab.basis_[i] = a;
                tab.is_basic_[a] = 1;
                is_artificial[a] = 1;
                tab.cost_[a] = T(-1);
                ++a;
            }
        }
    }

    const std::size_t max_iter =
        options.max_iterations ? options.max_iterations : 50 * (m + ncols) + 1000;
    Result<T> result;
    std::size_t unbounded_col = 0;
    int unbounded_dir = 0;

    // Bland's rule takes over after a run of degenerate pivots and hands back on progress.
    constexpr std::size_t kStallLimit = 50;
    auto run = [&]() -> typename detail::Tableau<T>::Step {
        std::size_t stalled = 0;
        tab.bland_ = false;
        while (true) {
            if (result.iterations++ >= max_iter) return detail::Tableau<T>::Step::Moved;
            auto step = tab.iterate(unbounded_col, unbounded_dir);
            if (step != detail::Tableau<T>::Step::Moved) return step;
            stalled = tab.degenerate_ ? stalled + 1 : 0;
            tab.bland_ = stalled > kStallLimit;
        }
    };

    // Phase I
    if (artificials > 0) {
        tab.price();
        auto step = run();
        if (step == detail::Tableau<T>::Step::Moved) {
            result.status = Status::NumericalFailure;
            return result;
        }
        T infeasibility(0);
        for (std::size_t i = 0; i < m; ++i)
            if (is_artificial[tab.basis_[i]]) infeasibility += tab.beta_[i];
        if (infeasibility > tol) {
            result.status = Status::Infeasible;
            return result;
        }
        // Drive remaining artificials out of the basis where possible.
        for (std::size_t i = 0; i < m; ++i) {
            if (!is_artificial[tab.basis_[i]]) continue;
            std::size_t best = ncols;
            T best_abs(0);
            for (std::size_t j = 0; j < ncols; ++j) {
                if (is_artificial[j] || tab.is_basic_[j]) continue;
                const T v = Traits::abs(tab.at(i, j));
                if (v > Traits::pivot_tolerance() && v > best_abs) best = j, best_abs = v;
            }
            if (best == ncols) continue;
            const T value = tab.at_upper_[best] ? *tab.upper_[best] : T(0);
            tab.pivot(i, best);
            tab.beta_[i] = value;
        }
        for (std::size_t j = 0; j < ncols; ++j) {
            if (!is_artificial[j]) continue;
            tab.eligible_[j] = 0;
            tab.upper_[j] = T(0);
        }
    }

    // Phase II
    std::fill(tab.cost_.begin(), tab.cost_.end(), T(0));
    if (objective_) {
        for (std::size_t j = 0; j < n_; ++j) {
            const T& c = (*objective_)[j];
            if (c == 0) continue;
            tab.cost_[map[j].col] += map[j].sign > 0 ? c : T(-c);
            if (map[j].neg_col) tab.cost_[*map[j].neg_col] -= c;
        }
    }
    tab.price();
    auto step = run();
    if (step == detail::Tableau<T>::Step::Moved) {
        result.status = Status::NumericalFailure;
        return result;
    }

    auto to_original = [&](const std::vector<T>& y, bool with_offset) {
        std::vector<T> x(n_);
        for (std::size_t j = 0; j < n_; ++j) {
            T v = with_offset ? map[j].offset : T(0);
            v += map[j].sign > 0 ? y[map[j].col] : T(-y[map[j].col]);
            if (map[j].neg_col) v -= y[*map[j].neg_col];
            x[j] = v;
        }
        return x;
    };

    if (step == detail::Tableau<T>::Step::Unbounded) {
        std::vector<T> dy(nx);
        if (unbounded_col < nx) dy[unbounded_col] = T(unbounded_dir);
        for (std::size_t i = 0; i < m; ++i)
            if (tab.basis_[i] < nx) dy[tab.basis_[i]] = -T(unbounded_dir) * tab.at(i, unbounded_col);
        result.status = Status::Unbounded;
        result.ray = to_original(dy, false);
        return result;
    }

    std::vector<T> y(nx);
    for (std::size_t j = 0; j < nx; ++j)
        if (!tab.is_basic_[j]) y[j] = tab.at_upper_[j] ? *tab.upper_[j] : T(0);
    for (std::size_t i = 0; i < m; ++i)
        if (tab.basis_[i] < nx) y[tab.basis_[i]] = tab.beta_[i];
    result.point = to_original(y, true);
    result.value = T(0);
    if (objective_)
        for (std::size_t j = 0; j < n_; ++j) result.value += (*objective_)[j] * result.point[j];

    if constexpr (!Traits::exact) {
        // Accept the basis only if the recovered point is feasible to working precision.
        for (std::size_t j = 0; j < n_; ++j) {
            const double x = result.point[j];
            const double scale = 1e-7 * (1.0 + std::abs(x));
            if ((lower_[j] && x < *lower_[j] - scale) || (upper_[j] && x > *upper_[j] + scale)) {
                result.status = Status::NumericalFailure;
                return result;
            }
        }
        for (const auto& row : rows_) {
            double lhs = 0.0, mag = std::abs(row.rhs);
            for (std::size_t j = 0; j < n_; ++j) {
                lhs += row.coeffs[j] * result.point[j];
                mag += std::abs(row.coeffs[j] * result.point[j]);
            }
            const double slack = 1e-7 * (1.0 + mag);
            const bool ok = row.rel == Relation::LessEqual   ? lhs <= row.rhs + slack
                            : row.rel == Relation::GreaterEqual ? lhs >= row.rhs - slack
                                                                : std::abs(lhs - row.rhs) <= slack;
            if (!ok) {
                result.status = Status::NumericalFailure;
                return result;
            }
        }
    }
    result.status = Status::Optimal;
    return result;
}

/// Rows times variables above which the exact re-solve is not attempted.
inline constexpr std::size_t kExactFallbackLimit = 40000;

/// Solves in double precision and, on numerical failure, again in exact arithmetic
/// on the binary values of the data. Large programs keep the failure.
inline Result<double> solve_with_exact_fallback(const LinearProgram<double>& prog, Options options = {}) {
    auto r = prog.solve(options);
    if (r.status != Status::NumericalFailure) return r;
    if (prog.rows() * prog.variables() > kExactFallbackLimit) return r;
    const auto exact = prog.cast<Rational>().solve();
    Result<double> out;
    out.status = exact.status;
    out.iterations = r.iterations + exact.iterations;
    out.value = exact.value.convert_to<double>();
    for (const auto& x : exact.point) out.point.push_back(x.convert_to<double>());
    for (const auto& x : exact.ray) out.ray.push_back(x.convert_to<double>());
    return out;
}

}  // namespace prefcone::lp
