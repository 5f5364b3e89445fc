#include "regsmith/theory.hpp"

#include <algorithm>
#include <mutex>
#include <stdexcept>

#include "regsmith/errors.hpp"

namespace regsmith::theory {

namespace {

Rat pow_rat_inv(std::int64_t p, long long e) {  // p^-e
    Int q;
    mpz_ui_pow_ui(q.get_mpz_t(), static_cast<unsigned long>(p), static_cast<unsigned long>(e));
    return Rat(1) / Rat(q);
}

void require_supported(const GroupType& v, const std::vector<std::int64_t>& primes,
                       const char* who) {
    for (std::int64_t q : v.primes())
        if (std::find(primes.begin(), primes.end(), q) == primes.end())
            throw std::invalid_argument(std::string(who) + ": |V| has prime " +
                                        std::to_string(q) + " outside the prime set");
}

// Pairing counts and Aut orders are memoized; both appear inside mass sums.
const Int& cached_pairings(const GroupType& g, const abelian::EnumerationBudget& budget) {
    static std::mutex mu;
    static std::map<GroupType, Int> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(g);
    if (it == cache.end())
        it = cache.emplace(g, abelian::count_perfect_symmetric_pairings(g, budget)).first;
    return it->second;
}

}  // namespace

EulerProduct EulerProduct::evaluate(std::int64_t p, ProductStyle style, int terms) {
    if (p < 2) throw std::invalid_argument("EulerProduct: p must be >= 2");
    if (terms < 1) throw std::invalid_argument("EulerProduct: need at least one term");
    Rat partial = 1;
    for (int k = 0; k < terms; ++k) {
        long long e = style == ProductStyle::AllK ? k + 1 : 2 * k + 1;
        partial *= Rat(1) - pow_rat_inv(p, e);
    }
    // Tail sum of the omitted exponents, as a geometric majorant:
    //   AllK: sum_{k > K} p^-k = p^-K / (p-1)
    //   Odd:  sum_{k >= K} p^-(2k+1) = p^-(2K+1) * p^2/(p^2-1)
    Rat tail;
    if (style == ProductStyle::AllK)
        tail = pow_rat_inv(p, terms) / Rat(p - 1);
    else
        tail = pow_rat_inv(p, 2LL * terms + 1) * Rat(Int(p) * p) / Rat(Int(p) * p - 1);
    if (tail >= 1) throw std::invalid_argument("EulerProduct: truncation too coarse");
    EulerProduct out;
    out.p = p;
    out.style = style;
    out.terms = terms;
    out.value = Interval{partial * (Rat(1) - tail), partial};
    return out;
}

Interval cl_probability(const GroupType& v, const std::vector<std::int64_t>& primes, int terms) {
    require_supported(v, primes, "cl_probability");
    Interval prod{1, 1};
    for (std::int64_t p : primes)
        prod = prod * EulerProduct::evaluate(p, ProductStyle::AllK, terms).value;
    return prod.scaled(Rat(1) / Rat(abelian::aut_order(v)));
}

Interval sym_probability(const GroupType& v, const std::vector<std::int64_t>& primes, int terms,
                         const abelian::EnumerationBudget& budget) {
    for (std::int64_t p : primes)
        if (p == 2)
            throw std::invalid_argument("sym_probability: the prime set must be odd primes");
    require_supported(v, primes, "sym_probability");
    Interval prod{1, 1};
    for (std::int64_t p : primes)
        prod = prod * EulerProduct::evaluate(p, ProductStyle::OddExponents, terms).value;
    Rat coeff = Rat(cached_pairings(v, budget)) /
                (Rat(v.order()) * Rat(abelian::aut_order(v)));
    return prod.scaled(coeff);
}

Int predicted_moment_directed(const GroupType& v, const Int& r) {
    if (r < 1) throw std::invalid_argument("predicted_moment_directed: r must be >= 1");
    Int g;
    mpz_gcd(g.get_mpz_t(), v.order().get_mpz_t(), r.get_mpz_t());
    if (g != 1)
        throw std::invalid_argument(
            "predicted_moment_directed: gcd(r, |V|) != 1; use predicted_moment_rm for primes "
            "dividing r");
    return 1;
}

Int predicted_moment_symmetric(const GroupType& v, const Int& r) {
    if (r < 1) throw std::invalid_argument("predicted_moment_symmetric: r must be >= 1");
    if (v.order() % 2 == 0)
        throw std::invalid_argument("predicted_moment_symmetric: |V| must be odd");
    Int g;
    mpz_gcd(g.get_mpz_t(), v.order().get_mpz_t(), r.get_mpz_t());
    if (g != 1)
        throw std::invalid_argument("predicted_moment_symmetric: gcd(r, |V|) must be 1");
    return abelian::exterior_square(v).order();
}

Int predicted_moment_rm(const GroupType& v, const Int& r, const Int& m,
                        const abelian::EnumerationBudget& budget) {
    Int total = 0;
    for (const abelian::RMPair& pair : abelian::enumerate_rm_pairs(v, r, m, budget))
        total += abelian::torsion_count(pair.subgroup_type(), r);
    return total;
}

namespace {

void enum_types_rec(const std::vector<std::int64_t>& primes, std::size_t idx, const Int& cutoff,
                    std::map<std::int64_t, std::vector<int>>& current,
                    std::vector<GroupType>& out) {
    if (idx == primes.size()) {
        out.push_back(GroupType::from_partitions(current));
        return;
    }
    const std::int64_t p = primes[idx];
    std::vector<int> part;  // weakly decreasing as built
    auto rec = [&](auto&& self, const Int& left, int max_e) -> void {
        if (part.empty())
            current.erase(p);
        else
            current[p] = part;
        enum_types_rec(primes, idx + 1, left, current, out);
        for (int e = 1; e <= max_e; ++e) {
            Int q;
            mpz_ui_pow_ui(q.get_mpz_t(), static_cast<unsigned long>(p),
                          static_cast<unsigned long>(e));
            if (q > left) break;
            part.push_back(e);
            self(self, left / q, e);
            part.pop_back();
        }
    };
    rec(rec, cutoff, 64);
    current.erase(p);
}

}  // namespace

std::vector<GroupType> enumerate_group_types(const std::vector<std::int64_t>& primes,
                                             const Int& order_cutoff) {
    if (order_cutoff < 1) throw std::invalid_argument("enumerate_group_types: cutoff must be >= 1");
    std::map<std::int64_t, std::vector<int>> current;
    std::vector<GroupType> out;
    std::vector<std::int64_t> ps = primes;
    std::sort(ps.begin(), ps.end());
    ps.erase(std::unique(ps.begin(), ps.end()), ps.end());
    enum_types_rec(ps, 0, order_cutoff, current, out);
    std::sort(out.begin(), out.end(), [](const GroupType& a, const GroupType& b) {
        Int oa = a.order(), ob = b.order();
        if (oa != ob) return oa < ob;
        return a.partitions() < b.partitions();
    });
    return out;
}

MeasureTable measure_table(MeasureStyle style, const std::vector<std::int64_t>& primes,
                           const Int& order_cutoff, int terms,
                           const abelian::EnumerationBudget& budget) {
    MeasureTable table;
    table.style = style;
    table.primes = primes;
    table.total = Interval{0, 0};
    for (const GroupType& g : enumerate_group_types(primes, order_cutoff)) {
        Interval p = style == MeasureStyle::DirectedCL ? cl_probability(g, primes, terms)
                                                       : sym_probability(g, primes, terms, budget);
        table.entries.emplace_back(g, p);
        table.total = table.total + p;
    }
    return table;
}

MassResult mass_total(MeasureStyle style, const std::vector<std::int64_t>& primes,
                      const Int& order_cutoff, int terms,
                      const abelian::EnumerationBudget& budget) {
    MeasureTable table = measure_table(style, primes, order_cutoff, terms, budget);
    MassResult res;
    res.mass = table.total;
    res.group_count = static_cast<long long>(table.entries.size());
    return res;
}

Interval pairing_mass_identity_residual(std::int64_t p, const Int& order_cutoff, int terms,
                                        const abelian::EnumerationBudget& budget) {
    if (p < 3) throw std::invalid_argument("pairing_mass_identity_residual: p must be an odd prime");
    Interval inv = EulerProduct::evaluate(p, ProductStyle::OddExponents, terms).value.reciprocal();
    Rat sum = 0;
    for (const GroupType& g : enumerate_group_types({p}, order_cutoff))
        sum += Rat(cached_pairings(g, budget)) / (Rat(g.order()) * Rat(abelian::aut_order(g)));
    return inv - Interval{sum, sum};
}

}  // namespace regsmith::theory
