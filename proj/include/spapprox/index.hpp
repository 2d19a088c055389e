#ifndef SPAPPROX_INDEX_HPP
#define SPAPPROX_INDEX_HPP

#include <array>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <initializer_list>
#include <ostream>
#include <string>
#include <vector>

#include "spapprox/error.hpp"
#include "spapprox/numeric.hpp"

namespace spapprox {

constexpr int max_dim = 8;

// Positive integer k (dim 1 over N) or lattice vector of dimension <= max_dim.
class Index {
public:
    Index() = default;

    explicit Index(int dim) : dim_(dim)
    {
        if (dim < 1 || dim > max_dim)
            fail(errc::invalid_descriptor, "index dimension must be in [1, " + std::to_string(max_dim) + "]");
    }

    Index(std::initializer_list<std::int64_t> c) : Index(int(c.size()))
    {
        int i = 0;
        for (auto v : c) c_[i++] = v;
    }

    explicit Index(const std::vector<std::int64_t>& c) : Index(int(c.size()))
    {
        for (int i = 0; i < dim_; ++i) c_[i] = c[i];
    }

    static Index scalar(std::int64_t k) { return Index{k}; }

    int dim() const { return dim_; }
    std::int64_t operator[](int i) const { return c_[i]; }
    std::int64_t& operator[](int i) { return c_[i]; }

    std::int64_t norm1() const
    {
        std::int64_t s = 0;
        for (int i = 0; i < dim_; ++i) s += std::llabs(c_[i]);
        return s;
    }

    std::int64_t norm_inf() const
    {
        std::int64_t s = 0;
        for (int i = 0; i < dim_; ++i) s = std::max<std::int64_t>(s, std::llabs(c_[i]));
        return s;
    }

    std::int64_t coord_sum() const
    {
        std::int64_t s = 0;
        for (int i = 0; i < dim_; ++i) s += c_[i];
        return s;
    }

    // |k|_r for r in (0, inf]; r = inf passed as infinity.
    double norm(double r) const
    {
        if (std::isinf(r)) return double(norm_inf());
        if (r == 1.0) return double(norm1());
        double s = 0.0;
        for (int i = 0; i < dim_; ++i)
            if (c_[i]) s += std::pow(double(std::llabs(c_[i])), r);
        return std::pow(s, 1.0 / r);
    }

    friend bool operator==(const Index& a, const Index& b)
    {
        if (a.dim_ != b.dim_) return false;
        for (int i = 0; i < a.dim_; ++i)
            if (a.c_[i] != b.c_[i]) return false;
        return true;
    }
    friend bool operator!=(const Index& a, const Index& b) { return !(a == b); }

    friend bool operator<(const Index& a, const Index& b)
    {
        if (a.dim_ != b.dim_) return a.dim_ < b.dim_;
        for (int i = 0; i < a.dim_; ++i)
            if (a.c_[i] != b.c_[i]) return a.c_[i] < b.c_[i];
        return false;
    }

    std::size_t hash() const
    {
        std::uint64_t h = fnv1a(&dim_, sizeof dim_);
        for (int i = 0; i < dim_; ++i) h = fnv1a(&c_[i], sizeof c_[i], h);
        return std::size_t(h);
    }

    std::string str() const
    {
        std::string s;
        for (int i = 0; i < dim_; ++i) {
            if (i) s += ' ';
            s += std::to_string(c_[i]);
        }
        return s;
    }

private:
    std::array<std::int64_t, max_dim> c_{};
    int dim_ = 1;
};

inline std::ostream& operator<<(std::ostream& os, const Index& k)
{
    return os << '(' << k.str() << ')';
}

struct IndexHash {
    std::size_t operator()(const Index& k) const { return k.hash(); }
};

} // namespace spapprox

#endif // SPAPPROX_INDEX_HPP
