#pragma once

#include <map>
#include <string>

#include "linlam/rational.hpp"
#include "linlam/term.hpp"

namespace linlam {

// Finite-support subdistribution over terms, keyed by alpha-canonical form
// so alpha-equal terms accumulate into one entry. P is Rational (exact) or
// double (quantum pipelines).
template <class P>
class TermDist {
public:
    using Entry = std::pair<TermPtr, P>;

    TermDist() = default;

    static TermDist dirac(const TermPtr& t) {
        TermDist d;
        d.add(t, P(1));
        return d;
    }

    void add(const TermPtr& t, const P& p) {
        if (p == P(0)) return;
        auto key = canonical_key(t);
        auto it = entries_.find(key);
        if (it == entries_.end())
            entries_.emplace(std::move(key), Entry{t, p});
        else
            it->second.second += p;
    }

    // this += scale * other
    void add_scaled(const TermDist& other, const P& scale) {
        if (scale == P(0)) return;
        for (const auto& [k, e] : other.entries_) {
            (void)k;
            add(e.first, e.second * scale);
        }
    }

    P mass() const {
        P m(0);
        for (const auto& [k, e] : entries_) {
            (void)k;
            m += e.second;
        }
        return m;
    }

    bool empty() const { return entries_.empty(); }
    size_t size() const { return entries_.size(); }
    const std::map<std::string, Entry>& entries() const { return entries_; }

    P prob_of(const TermPtr& t) const {
        auto it = entries_.find(canonical_key(t));
        return it == entries_.end() ? P(0) : it->second.second;
    }

private:
    std::map<std::string, Entry> entries_;
};

using RatDist = TermDist<Rational>;

} // namespace linlam
