#ifndef SPAPPROX_LATTICE_HPP
#define SPAPPROX_LATTICE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <unordered_set>
#include <vector>

#include "spapprox/psi_system.hpp"

namespace spapprox {

constexpr double default_count_budget = 2e8;

namespace detail {

// Visits every v in [0, m]^d accepted by keep(prefix partial state); weight 2^{#nonzero}.
inline void orthant_walk(int d, std::int64_t m, const std::function<bool(const Index&, int)>& keep,
                         const std::function<void(const Index&)>& visit)
{
    Index v(d);
    std::function<void(int)> rec = [&](int i) {
        if (i == d) {
            visit(v);
            return;
        }
        for (std::int64_t x = 0; x <= m; ++x) {
            v[i] = x;
            if (!keep(v, i + 1)) break;
            rec(i + 1);
        }
        v[i] = 0;
    };
    rec(0);
}

inline double abs_pow(std::int64_t x, double r)
{
    if (x == 0) return 0.0;
    if (r == 1.0) return double(std::llabs(x));
    if (r == 2.0) return double(x) * double(x);
    return std::pow(double(std::llabs(x)), r);
}

inline bool within_ball(const Index& k, int upto, double r, std::int64_t m)
{
    if (std::isinf(r)) {
        for (int i = 0; i < upto; ++i)
            if (std::llabs(k[i]) > m) return false;
        return true;
    }
    double s = 0.0;
    for (int i = 0; i < upto; ++i) s += abs_pow(k[i], r);
    double R = abs_pow(m, r);
    bool exact = r == 1.0 || r == 2.0;
    return exact ? s <= R : s <= R * (1.0 + 1e-12);
}

} // namespace detail

// #{k in Z^d : |k|_r <= m} by enumeration over the bounding box.
inline std::uint64_t lattice_count(int d, double r, std::int64_t m, double budget = default_count_budget)
{
    if (d < 1 || d > max_dim) fail(errc::parameter_out_of_range, "dimension must be in [1, 8]");
    if (!(r > 0)) fail(errc::parameter_out_of_range, "norm exponent must be positive");
    if (m < 0) fail(errc::parameter_out_of_range, "radius must be non-negative");
    if (std::pow(2.0 * double(m) + 1.0, d) > budget)
        fail(errc::overflow, "bounding box (2m+1)^d exceeds the enumeration budget");
    std::uint64_t total = 0;
    detail::orthant_walk(
        d, m, [&](const Index& v, int upto) { return detail::within_ball(v, upto, r, m); },
        [&](const Index& v) {
            int nz = 0;
            for (int i = 0; i < d; ++i) nz += v[i] != 0;
            total += std::uint64_t(1) << nz;
        });
    return total;
}

inline std::int64_t cross_weight(const Index& k, int upto)
{
    std::int64_t p = 1;
    for (int i = 0; i < upto; ++i) p *= std::max<std::int64_t>(1, std::llabs(k[i]));
    return p;
}

class IndexSet {
public:
    enum class kind { explicit_set, triangular, ball, cross };

    static IndexSet of(int dim, std::vector<Index> members)
    {
        IndexSet s(kind::explicit_set, dim);
        for (auto& k : members) {
            if (k.dim() != dim) fail(errc::invalid_descriptor, "index set dimension mismatch");
            s.members_.insert(k);
        }
        return s;
    }
    static IndexSet empty(int dim) { return of(dim, {}); }
    static IndexSet triangular(int dim, std::int64_t m)
    {
        if (m < 0) fail(errc::parameter_out_of_range, "triangular radius must be non-negative");
        IndexSet s(kind::triangular, dim);
        s.m_ = m;
        s.r_ = 1.0;
        return s;
    }
    static IndexSet ball(int dim, double r, std::int64_t m)
    {
        if (m < 0 || !(r > 0)) fail(errc::parameter_out_of_range, "ball needs r > 0, m >= 0");
        IndexSet s(kind::ball, dim);
        s.m_ = m;
        s.r_ = r;
        return s;
    }
    static IndexSet cross(int dim, std::int64_t n)
    {
        if (n < 1) fail(errc::parameter_out_of_range, "cross parameter must be >= 1");
        IndexSet s(kind::cross, dim);
        s.m_ = n;
        return s;
    }

    kind type() const { return kind_; }
    int dim() const { return dim_; }
    std::int64_t param() const { return m_; }
    double norm_r() const { return r_; }

    bool contains(const Index& k) const
    {
        if (k.dim() != dim_) return false;
        switch (kind_) {
        case kind::explicit_set: return members_.count(k) > 0;
        case kind::triangular: return k.norm1() <= m_;
        case kind::ball: return detail::within_ball(k, dim_, r_, m_);
        case kind::cross: return cross_weight(k, dim_) <= m_;
        }
        return false;
    }

    std::uint64_t cardinality() const
    {
        switch (kind_) {
        case kind::explicit_set: return members_.size();
        case kind::triangular: return lattice_count(dim_, 1.0, m_);
        case kind::ball: return lattice_count(dim_, r_, m_);
        case kind::cross: {
            std::uint64_t total = 0;
            detail::orthant_walk(
                dim_, m_, [&](const Index& v, int upto) { return cross_weight(v, upto) <= m_; },
                [&](const Index& v) {
                    int nz = 0;
                    for (int i = 0; i < dim_; ++i) nz += v[i] != 0;
                    total += std::uint64_t(1) << nz;
                });
            return total;
        }
        }
        return 0;
    }

    // Sorted members; predicate forms are enumerated.
    std::vector<Index> members(std::uint64_t budget = default_budget) const
    {
        std::vector<Index> out;
        if (kind_ == kind::explicit_set) {
            out.assign(members_.begin(), members_.end());
        } else {
            if (cardinality() > budget) fail(errc::budget_exceeded, "index set larger than budget");
            std::function<bool(const Index&, int)> keep;
            if (kind_ == kind::cross)
                keep = [&](const Index& v, int upto) { return cross_weight(v, upto) <= m_; };
            else
                keep = [&](const Index& v, int upto) { return detail::within_ball(v, upto, r_, m_); };
            detail::orthant_walk(dim_, m_, keep, [&](const Index& v) {
                std::vector<int> nz;
                for (int i = 0; i < dim_; ++i)
                    if (v[i]) nz.push_back(i);
                for (std::uint32_t mask = 0; mask < (1u << nz.size()); ++mask) {
                    Index c = v;
                    for (std::size_t j = 0; j < nz.size(); ++j)
                        if (mask & (1u << j)) c[nz[j]] = -c[nz[j]];
                    out.push_back(c);
                }
            });
        }
        std::sort(out.begin(), out.end());
        return out;
    }

private:
    IndexSet(kind k, int dim) : kind_(k), dim_(dim)
    {
        if (dim < 1 || dim > max_dim) fail(errc::invalid_descriptor, "dimension must be in [1, 8]");
    }

    kind kind_;
    int dim_;
    std::int64_t m_ = 0;
    double r_ = 1.0;
    std::unordered_set<Index, IndexHash> members_;
};

inline IndexSet region_triangular(int d, std::int64_t m) { return IndexSet::triangular(d, m); }
inline IndexSet region_ball(int d, double r, std::int64_t m) { return IndexSet::ball(d, r, m); }
inline IndexSet region_cross(int d, std::int64_t n) { return IndexSet::cross(d, n); }

// g_n(psi); n = 0 gives the empty set.
inline IndexSet region_gn(const PsiSystem& psi, std::size_t n)
{
    if (n == 0) return IndexSet::empty(psi.dim());
    CharSequences cs = char_sequences(psi, n);
    if (cs.epsilon.size() < n) fail(errc::parameter_out_of_range, "system has fewer than n levels");
    return IndexSet::of(psi.dim(), cs.g(n));
}

} // namespace spapprox

#endif // SPAPPROX_LATTICE_HPP
