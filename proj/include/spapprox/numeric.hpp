#ifndef SPAPPROX_NUMERIC_HPP
#define SPAPPROX_NUMERIC_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

namespace spapprox {

constexpr double inf = std::numeric_limits<double>::infinity();
constexpr double pi = 3.141592653589793238462643383279502884;

// Neumaier compensated accumulator.
class compensated_sum {
public:
    void add(double x)
    {
        double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    compensated_sum& operator+=(double x)
    {
        add(x);
        return *this;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline double sum_of(const std::vector<double>& v)
{
    compensated_sum s;
    for (double x : v) s.add(x);
    return s.value();
}

inline bool rel_close(double a, double b, double rtol)
{
    if (a == b) return true;
    return std::abs(a - b) <= rtol * std::max(std::abs(a), std::abs(b));
}

inline double rel_diff(double a, double b)
{
    if (a == b) return 0.0;
    double m = std::max(std::abs(a), std::abs(b));
    return std::abs(a - b) / m;
}

// C(n, k) in log space, n may be real.
inline double log_binomial(double n, double k)
{
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

inline double binomial(std::int64_t n, std::int64_t k)
{
    if (k < 0 || k > n) return 0.0;
    if (n > 60) return std::exp(log_binomial(double(n), double(k)));
    k = std::min(k, n - k);
    double r = 1.0;
    for (std::int64_t i = 1; i <= k; ++i) r = r * double(n - k + i) / double(i);
    return std::round(r);
}

// ln(Σ exp(x_i)).
inline double log_sum_exp(const std::vector<double>& x)
{
    double m = -inf;
    for (double v : x) m = std::max(m, v);
    if (!std::isfinite(m)) return m;
    compensated_sum s;
    for (double v : x) s.add(std::exp(v - m));
    return m + std::log(s.value());
}

// Fraction of ordered pairs (i<j) with v_j > v_i, v_j < v_i; near-ties are ignored.
struct kendall_signs {
    double up = 0.0;
    double down = 0.0;
    std::size_t pairs = 0;
};

inline kendall_signs kendall(const std::vector<double>& v, double tie_rtol = 1e-9)
{
    kendall_signs r;
    std::size_t up = 0, down = 0, all = 0;
    for (std::size_t i = 0; i < v.size(); ++i)
        for (std::size_t j = i + 1; j < v.size(); ++j) {
            ++all;
            if (rel_close(v[i], v[j], tie_rtol)) continue;
            if (v[j] > v[i]) ++up;
            else ++down;
        }
    r.pairs = all;
    if (all) {
        r.up = double(up) / double(all);
        r.down = double(down) / double(all);
    }
    return r;
}

inline std::uint64_t fnv1a(const void* data, std::size_t n, std::uint64_t h = 1469598103934665603ull)
{
    auto p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

} // namespace spapprox

#endif // SPAPPROX_NUMERIC_HPP
