#ifndef SPAPPROX_SP_SPACE_HPP
#define SPAPPROX_SP_SPACE_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "spapprox/lattice.hpp"
#include "spapprox/psi_system.hpp"

namespace spapprox {

constexpr double coeff_floor = 1e-300;

// Finitely supported coefficient map k -> f^(k), sorted by index, no stored zeros.
class SpElement {
public:
    using term = std::pair<Index, cplx>;

    explicit SpElement(int dim = 1) : dim_(dim) {}

    // User-facing constructor: tiny or zero coefficients are rejected.
    static SpElement from_terms(int dim, std::vector<term> terms)
    {
        std::map<Index, cplx> m;
        for (auto& [k, c] : terms) {
            if (k.dim() != dim) fail(errc::invalid_descriptor, "coefficient index dimension mismatch");
            if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
                fail(errc::invalid_descriptor, "coefficient at " + k.str() + " is not finite");
            if (std::abs(c) < coeff_floor)
                fail(errc::invalid_descriptor, "coefficient at " + k.str() + " has magnitude below 1e-300");
            if (!m.emplace(k, c).second) fail(errc::invalid_descriptor, "duplicate coefficient at " + k.str());
        }
        SpElement f(dim);
        f.terms_.assign(m.begin(), m.end());
        return f;
    }

    // Result of an operation: exact zeros (and underflowed values) are not stored.
    static SpElement from_map(int dim, const std::map<Index, cplx>& m)
    {
        SpElement f(dim);
        for (auto& [k, c] : m)
            if (std::abs(c) >= coeff_floor) f.terms_.emplace_back(k, c);
        return f;
    }

    int dim() const { return dim_; }
    bool empty() const { return terms_.empty(); }
    std::size_t size() const { return terms_.size(); }
    const std::vector<term>& terms() const { return terms_; }
    auto begin() const { return terms_.begin(); }
    auto end() const { return terms_.end(); }

    cplx coeff(const Index& k) const
    {
        auto it = std::lower_bound(terms_.begin(), terms_.end(), k,
                                   [](const term& t, const Index& x) { return t.first < x; });
        return it != terms_.end() && it->first == k ? it->second : cplx(0.0);
    }

    // Coefficientwise multiplier.
    template <class F>
    SpElement map(F&& f) const
    {
        std::map<Index, cplx> m;
        for (auto& [k, c] : terms_) m[k] = f(k, c);
        return from_map(dim_, m);
    }

    friend SpElement operator+(const SpElement& a, const SpElement& b) { return combine(a, b, 1.0); }
    friend SpElement operator-(const SpElement& a, const SpElement& b) { return combine(a, b, -1.0); }
    friend SpElement operator*(cplx s, const SpElement& a)
    {
        return a.map([&](const Index&, cplx c) { return s * c; });
    }
    friend bool operator==(const SpElement& a, const SpElement& b) { return a.dim_ == b.dim_ && a.terms_ == b.terms_; }

    std::int64_t max_norm1() const
    {
        std::int64_t m = 0;
        for (auto& t : terms_) m = std::max(m, t.first.norm1());
        return m;
    }

private:
    static SpElement combine(const SpElement& a, const SpElement& b, double sb)
    {
        if (a.dim_ != b.dim_) fail(errc::invalid_descriptor, "element dimension mismatch");
        std::map<Index, cplx> m(a.terms_.begin(), a.terms_.end());
        for (auto& [k, c] : b.terms_) m[k] += sb * c;
        return from_map(a.dim_, m);
    }

    int dim_;
    std::vector<term> terms_;
};

// (sum |c_k|^p)^{1/p}, computed with scaling by the largest modulus.
inline double sp_norm_of(const std::vector<double>& moduli, double p)
{
    if (!(p > 0)) fail(errc::parameter_out_of_range, "p must be positive");
    double mx = 0.0;
    for (double a : moduli) mx = std::max(mx, a);
    if (mx == 0.0) return 0.0;
    compensated_sum s;
    for (double a : moduli) s.add(std::pow(a / mx, p));
    return mx * std::pow(s.value(), 1.0 / p);
}

inline double sp_norm(const SpElement& f, double p)
{
    std::vector<double> m;
    m.reserve(f.size());
    for (auto& t : f) m.push_back(std::abs(t.second));
    return sp_norm_of(m, p);
}

// sum |c_k|^p
inline double sp_norm_pow(const SpElement& f, double p)
{
    compensated_sum s;
    for (auto& t : f) s.add(std::pow(std::abs(t.second), p));
    return s.value();
}

enum class direction { integrate, differentiate };

struct TransformResult {
    SpElement element;
    SpElement free_term;    // part of f on the declared zero set, dropped by differentiation
};

inline TransformResult psi_transform(const SpElement& f, const PsiSystem& psi, direction dir,
                                     const IndexSet* zero_set = nullptr)
{
    if (f.dim() != psi.dim()) fail(errc::invalid_descriptor, "element and system dimensions differ");
    std::map<Index, cplx> out, free;
    for (auto& [k, c] : f) {
        cplx w = psi.value(k);
        if (dir == direction::integrate) {
            out[k] = w * c;
            continue;
        }
        if (zero_set && zero_set->contains(k)) {
            free[k] = c;
            continue;
        }
        if (w == cplx(0.0)) fail(errc::zero_divisor, "psi vanishes at " + k.str());
        out[k] = c / w;
    }
    return {SpElement::from_map(f.dim(), out), SpElement::from_map(f.dim(), free)};
}

// (sum_{k not in G} |f^(k)|^p)^{1/p}
inline double tail_error(const SpElement& f, const IndexSet& G, double p)
{
    std::vector<double> m;
    for (auto& [k, c] : f)
        if (!G.contains(k)) m.push_back(std::abs(c));
    return sp_norm_of(m, p);
}

// Text format: one line per coefficient "k1 ... kd re im"; '#' starts a comment.
inline SpElement read_element(std::istream& in, int dim)
{
    std::vector<SpElement::term> terms;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        std::istringstream ls(line);
        std::vector<double> v;
        double x;
        while (ls >> x) v.push_back(x);
        if (v.empty()) continue;
        if (int(v.size()) != dim + 2)
            fail(errc::invalid_descriptor, "line " + std::to_string(lineno) + ": expected " + std::to_string(dim + 2) + " fields");
        Index k(dim);
        for (int i = 0; i < dim; ++i) {
            if (v[i] != std::floor(v[i])) fail(errc::invalid_descriptor, "line " + std::to_string(lineno) + ": non-integer index");
            k[i] = std::int64_t(v[i]);
        }
        terms.emplace_back(k, cplx(v[dim], v[dim + 1]));
    }
    return SpElement::from_terms(dim, std::move(terms));
}

inline void write_element(std::ostream& out, const SpElement& f)
{
    char buf[64];
    for (auto& [k, c] : f) {
        out << k.str();
        std::snprintf(buf, sizeof buf, " %.17g %.17g\n", c.real(), c.imag());
        out << buf;
    }
}

} // namespace spapprox

#endif // SPAPPROX_SP_SPACE_HPP
