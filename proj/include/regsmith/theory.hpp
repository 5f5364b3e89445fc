#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "regsmith/abelian.hpp"

namespace regsmith::theory {

using abelian::GroupType;
using abelian::Int;
using Rat = mpq_class;

/// Rigorous enclosure of a real value.
struct Interval {
    Rat lo, hi;

    double mid() const { return (lo.get_d() + hi.get_d()) / 2; }
    double halfwidth() const {
        Rat d = hi - lo;
        return d.get_d() / 2;
    }
    bool contains(const Rat& x) const { return lo <= x && x <= hi; }

    Interval scaled(const Rat& c) const {  // c >= 0
        return {lo * c, hi * c};
    }
    Interval operator*(const Interval& o) const {  // both nonnegative
        return {lo * o.lo, hi * o.hi};
    }
    Interval operator+(const Interval& o) const { return {lo + o.lo, hi + o.hi}; }
    Interval reciprocal() const {  // requires lo > 0
        return {Rat(1) / hi, Rat(1) / lo};
    }
    Interval operator-(const Interval& o) const { return {lo - o.hi, hi - o.lo}; }
};

enum class ProductStyle {
    AllK,          // prod_{k>=1} (1 - p^-k)
    OddExponents,  // prod_{k>=0} (1 - p^-(2k+1))
};

/// Truncated Euler product with a rigorous tail bound: the true value lies in
/// [partial * (1 - tail), partial].
struct EulerProduct {
    std::int64_t p;
    ProductStyle style;
    int terms;
    Interval value;

    static EulerProduct evaluate(std::int64_t p, ProductStyle style, int terms = 64);
};

inline constexpr int kDefaultEulerTerms = 64;

/// Cohen-Lenstra limiting probability of V at the prime set P:
/// (1/|Aut V|) * prod_{p in P} prod_{k>=1} (1 - p^-k).
/// Requires |V| supported on P.
Interval cl_probability(const GroupType& v, const std::vector<std::int64_t>& primes,
                        int terms = kDefaultEulerTerms);

/// Symmetric-matrix limiting probability of V at the odd prime set P:
/// (#pairings(V) / (|V| |Aut V|)) * prod_{p in P} prod_{k>=0} (1 - p^-(2k+1)).
Interval sym_probability(const GroupType& v, const std::vector<std::int64_t>& primes,
                         int terms = kDefaultEulerTerms,
                         const abelian::EnumerationBudget& budget = {});

/// Limiting E|Sur(cok D_n, V)| for gcd(r, |V|) = 1: always 1. Directs the
/// caller to predicted_moment_rm otherwise.
Int predicted_moment_directed(const GroupType& v, const Int& r);

/// Limiting E|Sur(cok C_n, V)| for |V| odd, gcd(r, |V|) = 1: |wedge^2 V|.
Int predicted_moment_symmetric(const GroupType& v, const Int& r);

/// Limiting E|Sur(cok D_n, V)| along n with n_P = m: the sum of |H[r]| over
/// all (r,m)-pairs (V, gamma+H).
Int predicted_moment_rm(const GroupType& v, const Int& r, const Int& m,
                        const abelian::EnumerationBudget& budget = {});

enum class MeasureStyle { DirectedCL, Symmetric };

/// All group types supported on P with order <= cutoff, ordered by (order,
/// partition data).
std::vector<GroupType> enumerate_group_types(const std::vector<std::int64_t>& primes,
                                             const Int& order_cutoff);

struct MassResult {
    Interval mass;
    long long group_count = 0;
};

/// Partial mass of the limiting measure over groups of order <= cutoff.
MassResult mass_total(MeasureStyle style, const std::vector<std::int64_t>& primes,
                      const Int& order_cutoff, int terms = kDefaultEulerTerms,
                      const abelian::EnumerationBudget& budget = {});

/// Per-group-type probabilities of the limiting measure, in deterministic
/// (order, partition) order, with rigorous bounds.
struct MeasureTable {
    MeasureStyle style;
    std::vector<std::int64_t> primes;
    std::vector<std::pair<GroupType, Interval>> entries;
    Interval total;  // running mass of the listed entries
};

MeasureTable measure_table(MeasureStyle style, const std::vector<std::int64_t>& primes,
                           const Int& order_cutoff, int terms = kDefaultEulerTerms,
                           const abelian::EnumerationBudget& budget = {});

/// prod_{k>=0}(1-p^-(2k-1))^{-1} minus the partial pairing-mass sum
/// sum_{|W| <= cutoff} #pairings(W) / (|W| |Aut W|); positive, decreasing in
/// the cutoff.
Interval pairing_mass_identity_residual(std::int64_t p, const Int& order_cutoff,
                                        int terms = kDefaultEulerTerms,
                                        const abelian::EnumerationBudget& budget = {});

}  // namespace regsmith::theory
