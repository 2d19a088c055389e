#ifndef SPAPPROX_PSI_SYSTEM_HPP
#define SPAPPROX_PSI_SYSTEM_HPP

#include <algorithm>
#include <complex>
#include <cstdint>
#include <memory>
#include <queue>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "spapprox/decay.hpp"
#include "spapprox/error.hpp"
#include "spapprox/index.hpp"
#include "spapprox/numeric.hpp"

namespace spapprox {

using cplx = std::complex<double>;

enum class mode { table, sequence, product, radial };

inline const char* mode_name(mode m)
{
    switch (m) {
    case mode::table: return "table";
    case mode::sequence: return "sequence";
    case mode::product: return "product";
    case mode::radial: return "radial";
    }
    return "?";
}

constexpr std::uint64_t default_budget = 1000000;
constexpr double group_rtol = 1e-12;

struct Level {
    double value = 0.0;
    std::uint64_t count = 0;
};

struct IndexLevel {
    double value = 0.0;
    std::vector<Index> indices;
};

// Number of k in Z^d with |k|_r = j exactly, r in {1, inf}, j >= 1.
inline double shell_count(int d, double r, std::uint64_t j)
{
    double x = double(j);
    if (std::isinf(r)) return std::pow(2.0 * x + 1.0, d) - std::pow(2.0 * x - 1.0, d);
    double s = 0.0;
    for (int i = 1; i <= d && std::uint64_t(i) <= j; ++i)
        s += std::ldexp(1.0, i) * binomial(d, i) * std::exp(log_binomial(x - 1.0, double(i - 1)));
    return std::round(s);
}

// Real extension of shell_count used for remainder integrals.
inline double shell_count_real(int d, double r, double x)
{
    if (std::isinf(r)) return std::pow(2.0 * x + 1.0, d) - std::pow(2.0 * x - 1.0, d);
    double s = 0.0;
    for (int i = 1; i <= d; ++i) {
        double c = 1.0;
        for (int m = 1; m <= i - 1; ++m) c *= (x - double(m)) / double(m);
        s += std::ldexp(1.0, i) * binomial(d, i) * c;
    }
    return s;
}

struct SystemOptions {
    std::uint64_t budget = default_budget;
    bool require_nonzero = false;
};

class PsiSystem {
public:
    using options = SystemOptions;

    static PsiSystem table(int dim, std::vector<std::pair<Index, cplx>> entries, options opt = {})
    {
        PsiSystem s(mode::table, dim, opt);
        if (entries.empty()) fail(errc::invalid_descriptor, "table must be non-empty");
        for (auto& e : entries) {
            if (e.first.dim() != dim) fail(errc::invalid_descriptor, "table index dimension mismatch");
            if (!std::isfinite(e.second.real()) || !std::isfinite(e.second.imag()))
                fail(errc::invalid_descriptor, "table value must be finite");
            if (e.second == cplx(0.0) && opt.require_nonzero)
                fail(errc::zero_entry, "table entry at " + e.first.str() + " is zero");
            if (!s.lookup_.emplace(e.first, e.second).second)
                fail(errc::invalid_descriptor, "duplicate table index " + e.first.str());
        }
        s.entries_ = std::move(entries);
        s.build_table_levels();
        return s;
    }

    static PsiSystem sequence(DecayRule rule, options opt = {})
    {
        PsiSystem s(mode::sequence, 1, opt);
        s.rules_.push_back(rule);
        s.check_rule_decay(rule);
        return s;
    }

    static PsiSystem product(std::vector<DecayRule> rules, options opt = {})
    {
        if (rules.empty()) fail(errc::invalid_descriptor, "product needs at least one rule");
        PsiSystem s(mode::product, int(rules.size()), opt);
        for (auto& r : rules) s.check_rule_decay(r);
        s.rules_ = std::move(rules);
        return s;
    }

    static PsiSystem radial(int dim, double r, DecayRule rule, options opt = {})
    {
        if (!(r > 0)) fail(errc::invalid_descriptor, "radial norm exponent must be positive");
        PsiSystem s(mode::radial, dim, opt);
        s.r_ = r;
        s.check_rule_decay(rule);
        s.rules_.push_back(rule);
        return s;
    }

    mode kind() const { return mode_; }
    int dim() const { return dim_; }
    double norm_r() const { return r_; }
    std::uint64_t budget() const { return opt_.budget; }
    bool require_nonzero() const { return opt_.require_nonzero; }
    const std::vector<DecayRule>& rules() const { return rules_; }
    const std::vector<std::pair<Index, cplx>>& entries() const { return entries_; }
    const std::vector<IndexLevel>& table_levels() const { return *table_levels_; }
    bool exact_grouping() const { return mode_ == mode::table; }
    bool finite() const { return mode_ == mode::table; }

    // Radial with r in {1, inf} has closed-form shell counts.
    bool analytic_shells() const { return mode_ == mode::radial && (std::isinf(r_) || r_ == 1.0); }

    cplx value(const Index& k) const
    {
        if (k.dim() != dim_) fail(errc::invalid_descriptor, "index dimension mismatch");
        switch (mode_) {
        case mode::table: {
            auto it = lookup_.find(k);
            return it == lookup_.end() ? cplx(0.0) : it->second;
        }
        case mode::sequence:
            if (k[0] < 1) return 0.0;
            return rules_[0](double(k[0]));
        case mode::product: {
            double v = 1.0;
            for (int j = 0; j < dim_; ++j) v *= rules_[j](double(std::max<std::int64_t>(1, std::llabs(k[j]))));
            return v;
        }
        case mode::radial: return rules_[0](std::max(1.0, k.norm(r_)));
        }
        return 0.0;
    }

    double modulus(const Index& k) const { return std::abs(value(k)); }

    // Values compare equal for level grouping.
    bool same_level(double a, double b) const
    {
        if (exact_grouping()) return a == b;
        return rel_close(a, b, group_rtol);
    }

    std::string describe() const
    {
        std::string s = mode_name(mode_);
        s += " d=" + std::to_string(dim_);
        if (mode_ == mode::radial) s += std::isinf(r_) ? " r=inf" : " r=" + std::to_string(r_);
        for (auto& r : rules_) s += " " + r.describe();
        if (mode_ == mode::table) s += " entries=" + std::to_string(entries_.size());
        return s;
    }

private:
    PsiSystem(mode m, int dim, options opt) : mode_(m), dim_(dim), opt_(opt)
    {
        if (dim < 1 || dim > max_dim) fail(errc::invalid_descriptor, "dimension must be in [1, 8]");
        if (opt.budget < 1) fail(errc::invalid_descriptor, "budget must be positive");
    }

    static void check_rule_decay(const DecayRule& r)
    {
        double prev = r(1.0);
        if (!(prev > 0) || !std::isfinite(prev)) fail(errc::non_decaying_system, "rule value at 1 must be positive");
        for (double t = 2.0; t <= 1e12; t *= 2.0) {
            double v = r(t);
            if (v > prev) fail(errc::non_decaying_system, "rule increases at t=" + std::to_string(t));
            prev = v;
        }
        if (!(prev < r(1.0))) fail(errc::non_decaying_system, "rule does not decay");
    }

    void build_table_levels()
    {
        std::vector<std::pair<double, Index>> m;
        for (auto& e : entries_) {
            double a = std::abs(e.second);
            if (a > 0) m.emplace_back(a, e.first);
        }
        std::sort(m.begin(), m.end(), [](auto& x, auto& y) {
            if (x.first != y.first) return x.first > y.first;
            return x.second < y.second;
        });
        auto lv = std::make_shared<std::vector<IndexLevel>>();
        for (auto& [a, k] : m) {
            if (lv->empty() || lv->back().value != a) lv->push_back({a, {}});
            lv->back().indices.push_back(k);
        }
        table_levels_ = lv;
    }

    mode mode_;
    int dim_;
    options opt_;
    double r_ = inf;
    std::vector<DecayRule> rules_;
    std::vector<std::pair<Index, cplx>> entries_;
    std::unordered_map<Index, cplx, IndexHash> lookup_;
    std::shared_ptr<const std::vector<IndexLevel>> table_levels_;
};

// Levels with explicit indices, in decreasing modulus. Each cursor is independent.
class IndexCursor {
public:
    explicit IndexCursor(const PsiSystem& psi) : psi_(&psi)
    {
        if (psi.kind() == mode::sequence) {
            Index k{1};
            push(k);
        } else if (psi.kind() != mode::table) {
            Index z(psi.dim());
            push(z);
        }
    }

    std::uint64_t emitted() const { return emitted_; }

    bool next(IndexLevel& out)
    {
        if (psi_->kind() == mode::table) {
            auto& lv = psi_->table_levels();
            if (pos_ >= lv.size()) return false;
            out = lv[pos_++];
            emitted_ += out.indices.size();
            return true;
        }
        if (heap_.empty()) return false;
        double top = heap_.top().value;
        std::vector<Index> base;
        while (!heap_.empty() && psi_->same_level(heap_.top().value, top)) {
            Node n = heap_.top();
            heap_.pop();
            base.push_back(n.k);
            for (int i = 0; i < n.k.dim(); ++i) {
                Index c = n.k;
                c[i] += 1;
                push(c);
            }
        }
        out.value = top;
        out.indices.clear();
        for (auto& b : base) expand_signs(b, out.indices);
        std::sort(out.indices.begin(), out.indices.end());
        emitted_ += out.indices.size();
        if (emitted_ > psi_->budget())
            fail(errc::budget_exceeded, "enumeration needs more than " + std::to_string(psi_->budget()) + " indices");
        return true;
    }

private:
    struct Node {
        double value;
        Index k;
    };
    struct Cmp {
        bool operator()(const Node& a, const Node& b) const
        {
            if (a.value != b.value) return a.value < b.value;
            return b.k < a.k;
        }
    };

    void push(const Index& k)
    {
        if (!seen_.insert(k).second) return;
        heap_.push({psi_->modulus(k), k});
    }

    void expand_signs(const Index& b, std::vector<Index>& out) const
    {
        if (psi_->kind() == mode::sequence) {
            out.push_back(b);
            return;
        }
        std::vector<int> nz;
        for (int i = 0; i < b.dim(); ++i)
            if (b[i] != 0) nz.push_back(i);
        for (std::uint32_t mask = 0; mask < (1u << nz.size()); ++mask) {
            Index c = b;
            for (std::size_t j = 0; j < nz.size(); ++j)
                if (mask & (1u << j)) c[nz[j]] = -c[nz[j]];
            out.push_back(c);
        }
    }

    const PsiSystem* psi_;
    std::priority_queue<Node, std::vector<Node>, Cmp> heap_;
    std::unordered_set<Index, IndexHash> seen_;
    std::size_t pos_ = 0;
    std::uint64_t emitted_ = 0;
};

// Levels as (value, multiplicity); closed-form shells for radial r in {1, inf}.
class LevelCursor {
public:
    explicit LevelCursor(const PsiSystem& psi) : psi_(&psi)
    {
        if (!psi.analytic_shells() && psi.kind() != mode::sequence) idx_ = std::make_unique<IndexCursor>(psi);
    }

    // Count of rearrangement positions consumed so far.
    std::uint64_t consumed() const { return consumed_; }

    // Position in the underlying scalar parameter (k for sequences, shell radius for radial).
    std::uint64_t radius() const { return j_; }

    bool next(Level& out)
    {
        if (psi_->kind() == mode::sequence) {
            const auto& rule = psi_->rules()[0];
            ++j_;
            if (j_ > psi_->budget())
                fail(errc::budget_exceeded, "sequence enumeration exceeds budget");
            out.value = rule(double(j_));
            out.count = 1;
            if (!(out.value > 0)) return false;
            while (true) {
                double v = rule(double(j_ + 1));
                if (!psi_->same_level(v, out.value) || !(v > 0)) break;
                ++j_;
                ++out.count;
                if (j_ > psi_->budget()) fail(errc::budget_exceeded, "sequence enumeration exceeds budget");
            }
            consumed_ += out.count;
            return true;
        }
        if (psi_->analytic_shells()) {
            const auto& rule = psi_->rules()[0];
            ++j_;
            out.value = rule(double(j_));
            if (!(out.value > 0)) return false;
            out.count = std::uint64_t(shell_count(psi_->dim(), psi_->norm_r(), j_)) + (j_ == 1 ? 1 : 0);
            consumed_ += out.count;
            return true;
        }
        IndexLevel il;
        if (!idx_->next(il)) return false;
        out.value = il.value;
        out.count = il.indices.size();
        consumed_ += out.count;
        ++j_;
        return true;
    }

private:
    const PsiSystem* psi_;
    std::unique_ptr<IndexCursor> idx_;
    std::uint64_t j_ = 0;
    std::uint64_t consumed_ = 0;
};

// Lazily materialized decreasing rearrangement.
class Profile {
public:
    explicit Profile(const PsiSystem& psi) : psi_(&psi), cur_(psi) {}

    const PsiSystem& system() const { return *psi_; }

    bool extend()
    {
        if (done_) return false;
        Level l;
        if (!cur_.next(l)) {
            done_ = true;
            return false;
        }
        levels_.push_back(l);
        delta_.push_back((delta_.empty() ? 0 : delta_.back()) + l.count);
        return true;
    }

    bool ensure_levels(std::size_t n)
    {
        while (levels_.size() < n)
            if (!extend()) return false;
        return true;
    }

    bool ensure_count(std::uint64_t s)
    {
        while (delta_.empty() || delta_.back() < s)
            if (!extend()) return false;
        return true;
    }

    bool exhausted() const { return done_; }
    std::size_t levels() const { return levels_.size(); }
    const Level& level(std::size_t i) const { return levels_[i]; }
    // delta(i) = positions covered by levels 0..i (delta_{i+1} in 1-based level numbering)
    std::uint64_t delta(std::size_t i) const { return delta_[i]; }
    std::uint64_t covered() const { return delta_.empty() ? 0 : delta_.back(); }

    // 0-based level holding 1-based position k, or levels() when beyond.
    std::size_t level_of(std::uint64_t k)
    {
        ensure_count(k);
        auto it = std::lower_bound(delta_.begin(), delta_.end(), k);
        return std::size_t(it - delta_.begin());
    }

    // psi~_k, 1-based; zero beyond a finite system.
    double at(std::uint64_t k)
    {
        std::size_t i = level_of(k);
        return i < levels_.size() ? levels_[i].value : 0.0;
    }

    // Level whose value matches v within the grouping rule, extending as needed; npos if absent.
    std::size_t find_value(double v)
    {
        static constexpr std::size_t npos = std::size_t(-1);
        std::size_t i = 0;
        while (true) {
            while (i >= levels_.size())
                if (!extend()) return npos;
            const double lv = levels_[i].value;
            if (psi_->same_level(lv, v)) return i;
            if (lv < v) return npos;
            ++i;
        }
    }

private:
    const PsiSystem* psi_;
    LevelCursor cur_;
    std::vector<Level> levels_;
    std::vector<std::uint64_t> delta_;
    bool done_ = false;
};

struct CharSequences {
    std::vector<double> epsilon;
    std::vector<std::uint64_t> delta;          // delta[0] = 0, delta[n] = |g_n|
    std::vector<std::vector<Index>> g_new;     // g_n \ g_{n-1}, sorted
    std::vector<double> rearranged;            // psi~_1 .. psi~_{delta_N}

    std::vector<Index> g(std::size_t n) const
    {
        std::vector<Index> out;
        for (std::size_t i = 0; i < n && i < g_new.size(); ++i) out.insert(out.end(), g_new[i].begin(), g_new[i].end());
        std::sort(out.begin(), out.end());
        return out;
    }
};

inline CharSequences char_sequences(const PsiSystem& psi, std::size_t n_levels)
{
    if (n_levels < 1) fail(errc::parameter_out_of_range, "n_levels must be positive");
    CharSequences cs;
    cs.delta.push_back(0);
    IndexCursor cur(psi);
    IndexLevel lv;
    while (cs.epsilon.size() < n_levels && cur.next(lv)) {
        cs.epsilon.push_back(lv.value);
        cs.delta.push_back(cs.delta.back() + lv.indices.size());
        cs.rearranged.insert(cs.rearranged.end(), lv.indices.size(), lv.value);
        cs.g_new.push_back(std::move(lv.indices));
    }
    return cs;
}

inline std::vector<double> rearrangement(const PsiSystem& psi, std::uint64_t count)
{
    if (count > psi.budget())
        fail(errc::budget_exceeded, "rearrangement count exceeds budget");
    std::vector<double> out;
    out.reserve(count);
    LevelCursor cur(psi);
    Level l;
    while (out.size() < count && cur.next(l)) {
        std::uint64_t take = std::min<std::uint64_t>(l.count, count - out.size());
        out.insert(out.end(), take, l.value);
    }
    return out;
}

} // namespace spapprox

#endif // SPAPPROX_PSI_SYSTEM_HPP
