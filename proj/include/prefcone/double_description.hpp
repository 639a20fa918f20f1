#pragma once

// Double description method for the generators of K = {k : <k, w_j> <= 0}.
// K = lin(L) + cone(R): a lineality basis L and extreme rays R of the pointed part.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "prefcone/constraint.hpp"
#include "prefcone/errors.hpp"
#include "prefcone/scalar.hpp"
#include "prefcone/vector_ops.hpp"

namespace prefcone {

inline constexpr std::size_t kDefaultGeneratorCap = 15;

template <class T>
struct GeneratorSet {
    std::size_t dimension = 0;
    std::vector<std::vector<T>> rays;       ///< unit max-norm, reduced modulo the lineality space
    std::vector<std::vector<T>> lineality;  ///< reduced row echelon basis

    bool pointed() const { return lineality.empty(); }
};

struct GeneratorOptions {
    std::size_t cap = kDefaultGeneratorCap;
};

namespace detail {

class ZeroSet {
  public:
    ZeroSet() = default;
    explicit ZeroSet(std::size_t bits) : words_((bits + 63) / 64, 0) {}

    void set(std::size_t i) { words_[i / 64] |= std::uint64_t{1} << (i % 64); }
    void set_first(std::size_t count) {
        for (std::size_t i = 0; i < count; ++i) set(i);
    }

    std::size_t count() const {
        std::size_t c = 0;
        for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
        return c;
    }

    ZeroSet operator&(const ZeroSet& o) const {
        ZeroSet r = *this;
        for (std::size_t i = 0; i < words_.size(); ++i) r.words_[i] &= o.words_[i];
        return r;
    }

    bool subset_of(const ZeroSet& o) const {
        for (std::size_t i = 0; i < words_.size(); ++i)
            if (words_[i] & ~o.words_[i]) return false;
        return true;
    }

  private:
    std::vector<std::uint64_t> words_;
};

template <class T>
T dot_t(std::span<const T> a, std::span<const T> b) {
    T s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

template <class T>
void normalize_max(std::vector<T>& v) {
    using Tr = ScalarTraits<T>;
    T m = 0;
    for (const auto& x : v) m = std::max<T>(m, Tr::abs(x));
    if (m == T(0)) return;
    for (auto& x : v) x /= m;
}

template <class T>
int sign_of(const T& x) {
    const T tol = ScalarTraits<T>::tolerance();
    if (x > tol) return 1;
    if (x < -tol) return -1;
    return 0;
}

template <class T>
struct Ray {
    std::vector<T> v;
    ZeroSet zeros;
};

/// Reduces `basis` to reduced row echelon form in place and returns the pivot columns.
template <class T>
std::vector<std::size_t> row_reduce(std::vector<std::vector<T>>& basis, std::size_t dim) {
    using Tr = ScalarTraits<T>;
    std::vector<std::size_t> pivots;
    std::size_t row = 0;
    for (std::size_t col = 0; col < dim && row < basis.size(); ++col) {
        std::size_t best = row;
        for (std::size_t r = row + 1; r < basis.size(); ++r)
            if (Tr::abs(basis[r][col]) > Tr::abs(basis[best][col])) best = r;
        if (Tr::abs(basis[best][col]) <= Tr::pivot_tolerance()) continue;
        std::swap(basis[best], basis[row]);
        const T p = basis[row][col];
        for (auto& x : basis[row]) x /= p;
        for (std::size_t r = 0; r < basis.size(); ++r) {
            if (r == row || basis[r][col] == T(0)) continue;
            const T f = basis[r][col];
            for (std::size_t c = 0; c < dim; ++c) basis[r][c] -= f * basis[row][c];
            basis[r][col] = 0;
        }
        pivots.push_back(col);
        ++row;
    }
    basis.resize(row);
    return pivots;
}

template <class T>
void clean(std::vector<T>& v) {
    if constexpr (!ScalarTraits<T>::exact) {
        for (auto& x : v)
            if (std::abs(x) < 1e-12) x = 0.0;
    }
}

}  // namespace detail

/// Generators of {k : <k, a_j> <= 0 for all j}. Deterministic for a given input order.
template <class T>
GeneratorSet<T> dual_generators(const std::vector<std::vector<T>>& constraints, std::size_t dim,
                                GeneratorOptions options = {}) {
    using Tr = ScalarTraits<T>;
    if (dim > options.cap) throw DimensionCapExceeded(dim, options.cap);
    const std::size_t m = constraints.size();

    std::vector<std::vector<T>> lineality;
    for (std::size_t i = 0; i < dim; ++i) {
        std::vector<T> e(dim, T(0));
        e[i] = 1;
        lineality.push_back(std::move(e));
    }
    std::vector<detail::Ray<T>> rays;

    for (std::size_t j = 0; j < m; ++j) {
        std::vector<T> a = constraints[j];
        if (a.size() != dim) throw ContractViolation("constraint dimension mismatch");
        if constexpr (!Tr::exact) {
            double nrm = 0.0;
            for (double x : a) nrm += x * x;
            nrm = std::sqrt(nrm);
            if (nrm == 0.0) {
                for (auto& r : rays) r.zeros.set(j);
                continue;
            }
            for (auto& x : a) x /= nrm;
        }

        // A lineality direction not orthogonal to a turns into a ray.
        std::size_t pivot = lineality.size();
        T best = 0;
        for (std::size_t l = 0; l < lineality.size(); ++l) {
            const T s = Tr::abs(detail::dot_t<T>(a, lineality[l]));
            if (s > Tr::tolerance() && s > best) best = s, pivot = l;
        }
        if (pivot < lineality.size()) {
            std::vector<T> lp = lineality[pivot];
            const T alp = detail::dot_t<T>(a, lp);
            for (std::size_t l = 0; l < lineality.size(); ++l) {
                if (l == pivot) continue;
                const T f = detail::dot_t<T>(a, lineality[l]) / alp;
                for (std::size_t i = 0; i < dim; ++i) lineality[l][i] -= f * lp[i];
                detail::normalize_max(lineality[l]);
            }
            for (auto& r : rays) {
                const T f = detail::dot_t<T>(a, r.v) / alp;
                for (std::size_t i = 0; i < dim; ++i) r.v[i] -= f * lp[i];
                detail::normalize_max(r.v);
                r.zeros.set(j);
            }
            lineality.erase(lineality.begin() + static_cast<std::ptrdiff_t>(pivot));
            if (alp > T(0))
                for (auto& x : lp) x = -x;
            detail::normalize_max(lp);
            detail::Ray<T> fresh{std::move(lp), detail::ZeroSet(m)};
            fresh.zeros.set_first(j);
            rays.push_back(std::move(fresh));
            continue;
        }

        std::vector<T> value(rays.size());
        std::vector<std::size_t> pos, neg, zero;
        for (std::size_t r = 0; r < rays.size(); ++r) {
            value[r] = detail::dot_t<T>(a, rays[r].v);
            const int s = detail::sign_of(value[r]);
            (s > 0 ? pos : s < 0 ? neg : zero).push_back(r);
        }
        if (pos.empty()) {
            for (auto r : zero) rays[r].zeros.set(j);
            continue;
        }

        const std::size_t rank_needed = dim - lineality.size() >= 2 ? dim - lineality.size() - 2 : 0;
        std::vector<detail::Ray<T>> next;
        for (auto p : pos) {
            for (auto q : neg) {
                const auto common = rays[p].zeros & rays[q].zeros;
                if (common.count() < rank_needed) continue;
                bool adjacent = true;
                for (std::size_t o = 0; o < rays.size() && adjacent; ++o)
                    if (o != p && o != q && common.subset_of(rays[o].zeros)) adjacent = false;
                if (!adjacent) continue;
                std::vector<T> v(dim);
                for (std::size_t i = 0; i < dim; ++i) v[i] = value[p] * rays[q].v[i] - value[q] * rays[p].v[i];
                detail::normalize_max(v);
                detail::Ray<T> fresh{std::move(v), common};
                fresh.zeros.set(j);
                next.push_back(std::move(fresh));
            }
        }
        for (auto r : zero) {
            rays[r].zeros.set(j);
            next.push_back(std::move(rays[r]));
        }
        for (auto r : neg) next.push_back(std::move(rays[r]));
        rays = std::move(next);
    }

    GeneratorSet<T> out;
    out.dimension = dim;
    const auto pivots = detail::row_reduce(lineality, dim);
    for (auto& l : lineality) detail::clean(l);
    out.lineality = std::move(lineality);
    for (auto& r : rays) {
        for (std::size_t b = 0; b < pivots.size(); ++b) {
            const T f = r.v[pivots[b]];
            if (f == T(0)) continue;
            for (std::size_t i = 0; i < dim; ++i) r.v[i] -= f * out.lineality[b][i];
        }
        detail::normalize_max(r.v);
        detail::clean(r.v);
        out.rays.push_back(std::move(r.v));
    }
    std::sort(out.rays.begin(), out.rays.end());
    return out;
}

inline GeneratorSet<double> dual_generators(const ConstraintStore& w, GeneratorOptions options = {}) {
    std::vector<Vector> rows;
    for (const auto& c : w) rows.push_back(c.w);
    return dual_generators<double>(rows, w.dimension(), options);
}

/// Same enumeration in exact rational arithmetic on the binary values of the constraint vectors.
inline GeneratorSet<Rational> dual_generators_exact(const ConstraintStore& w, GeneratorOptions options = {}) {
    std::vector<std::vector<Rational>> rows;
    for (const auto& c : w) {
        std::vector<Rational> r;
        for (double x : c.w) r.push_back(ScalarTraits<Rational>::from_double(x));
        rows.push_back(std::move(r));
    }
    return dual_generators<Rational>(rows, w.dimension(), options);
}

template <class T>
GeneratorSet<double> to_double(const GeneratorSet<T>& g) {
    GeneratorSet<double> out;
    out.dimension = g.dimension;
    auto conv = [](const std::vector<T>& v) {
        Vector r;
        for (const auto& x : v) r.push_back(ScalarTraits<T>::to_double(x));
        return r;
    };
    for (const auto& r : g.rays) out.rays.push_back(conv(r));
    for (const auto& l : g.lineality) out.lineality.push_back(conv(l));
    return out;
}

inline constexpr double kGeneratorTolerance = 1e-7;

/// v is in C_W iff <r, v> <= 0 on every ray and <l, v> = 0 on the lineality space.
/// v is scaled to unit max-norm before testing.
inline bool generator_membership(const GeneratorSet<double>& g, std::span<const double> v,
                                 double tol = kGeneratorTolerance) {
    const double scale = norm_inf(v);
    if (scale == 0.0) return true;
    for (const auto& l : g.lineality)
        if (std::abs(dot(l, v)) / scale > tol) return false;
    for (const auto& r : g.rays)
        if (dot(r, v) / scale > tol) return false;
    return true;
}

}  // namespace prefcone
