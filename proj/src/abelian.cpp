#include "regsmith/abelian.hpp"

#include <algorithm>
#include <mutex>
#include <set>
#include <stdexcept>

#include "regsmith/errors.hpp"
#include "regsmith/padic.hpp"

namespace regsmith::abelian {

namespace {

Int pow_int(std::int64_t p, long long e) {
    Int q;
    mpz_ui_pow_ui(q.get_mpz_t(), static_cast<unsigned long>(p), static_cast<unsigned long>(e));
    return q;
}

std::uint64_t mod_of(const Int& k, std::uint64_t m) {
    return mpz_fdiv_ui(k.get_mpz_t(), static_cast<unsigned long>(m));
}

}  // namespace

// ---------------------------------------------------------------------------
// Group

Group::Group(GroupType type, std::uint64_t max_order) : type_(std::move(type)) {
    order_ = 1;
    for (auto& [p, part] : type_.partitions()) {
        for (int e : part) {
            Int q = pow_int(p, e);
            if (!q.fits_ulong_p())
                throw CapacityError("Group: cyclic factor exceeds 64 bits");
            std::uint64_t m = q.get_ui();
            if (m > max_order || order_ > max_order / m)
                throw CapacityError("Group: order exceeds enumeration budget of " +
                                    std::to_string(max_order));
            mods_.push_back(m);
            primes_.push_back(p);
            exps_.push_back(e);
            order_ *= m;
        }
    }
}

Group::Element Group::add(const Element& a, const Element& b) const {
    Element r(mods_.size());
    for (std::size_t i = 0; i < mods_.size(); ++i) {
        std::uint64_t s = a[i] + b[i];
        r[i] = s >= mods_[i] ? s - mods_[i] : s;
    }
    return r;
}

Group::Element Group::sub(const Element& a, const Element& b) const {
    Element r(mods_.size());
    for (std::size_t i = 0; i < mods_.size(); ++i)
        r[i] = a[i] >= b[i] ? a[i] - b[i] : a[i] + mods_[i] - b[i];
    return r;
}

Group::Element Group::neg(const Element& a) const { return sub(zero(), a); }

Group::Element Group::scale(const Int& k, const Element& a) const {
    Element r(mods_.size());
    for (std::size_t i = 0; i < mods_.size(); ++i)
        r[i] = mod_of(k, mods_[i]) * a[i] % mods_[i];
    return r;
}

bool Group::is_zero(const Element& a) const {
    for (std::uint64_t c : a)
        if (c != 0) return false;
    return true;
}

Group::Element Group::make(const std::vector<std::int64_t>& coords) const {
    if (coords.size() != mods_.size())
        throw std::invalid_argument("element coordinate count mismatch (want " +
                                    std::to_string(mods_.size()) + ")");
    Element r(mods_.size());
    for (std::size_t i = 0; i < mods_.size(); ++i) {
        std::int64_t m = static_cast<std::int64_t>(mods_[i]);
        std::int64_t c = coords[i] % m;
        if (c < 0) c += m;
        r[i] = static_cast<std::uint64_t>(c);
    }
    return r;
}

std::uint64_t Group::encode(const Element& a) const {
    std::uint64_t idx = 0;
    for (std::size_t i = 0; i < mods_.size(); ++i) idx = idx * mods_[i] + a[i];
    return idx;
}

Group::Element Group::decode(std::uint64_t idx) const {
    Element a(mods_.size());
    for (std::size_t i = mods_.size(); i-- > 0;) {
        a[i] = idx % mods_[i];
        idx /= mods_[i];
    }
    return a;
}

std::vector<std::uint64_t> Group::closure(const std::vector<Element>& gens) const {
    std::set<std::uint64_t> elems{encode(zero())};
    for (const Element& g : gens) {
        if (elems.count(encode(g))) continue;
        // <S, g> = union of S + k*g until k*g lands back in S
        std::vector<std::uint64_t> base(elems.begin(), elems.end());
        Element kg = g;
        while (!elems.count(encode(kg))) {
            for (std::uint64_t s : base) elems.insert(encode(add(decode(s), kg)));
            kg = add(kg, g);
        }
    }
    return {elems.begin(), elems.end()};
}

// ---------------------------------------------------------------------------
// Subgroup, Coset, RMPair

Subgroup::Subgroup(std::shared_ptr<const Group> ambient, std::vector<Group::Element> generators)
    : ambient_(std::move(ambient)), gens_(std::move(generators)) {
    elems_ = ambient_->closure(gens_);
}

bool Subgroup::contains(const Group::Element& x) const {
    return contains_encoded(ambient_->encode(x));
}

bool Subgroup::contains_encoded(std::uint64_t idx) const {
    return std::binary_search(elems_.begin(), elems_.end(), idx);
}

GroupType Subgroup::type() const {
    std::map<std::int64_t, std::vector<int>> parts;
    std::vector<std::int64_t> primes;
    for (int i = 0; i < ambient_->num_factors(); ++i)
        if (primes.empty() || primes.back() != ambient_->factor_prime(i))
            primes.push_back(ambient_->factor_prime(i));
    for (std::int64_t p : primes) {
        int emax = 0;
        for (int i = 0; i < ambient_->num_factors(); ++i)
            if (ambient_->factor_prime(i) == p) emax = std::max(emax, ambient_->factor_exponent(i));
        // N_k = #{x in S : p^k x = 0}; t_k = log_p(N_k / N_{k-1}) = #parts >= k
        std::vector<long long> count(emax + 1, 0);
        for (std::uint64_t enc : elems_) {
            Group::Element x = ambient_->decode(enc);
            for (int k = 0; k <= emax; ++k) {
                if (ambient_->is_zero(ambient_->scale(pow_int(p, k), x))) {
                    count[k] += 1;
                    break;  // killed by p^k => killed by larger powers too
                }
            }
        }
        // prefix sums give N_k
        std::vector<long long> nk(emax + 1);
        long long acc = 0;
        for (int k = 0; k <= emax; ++k) {
            acc += count[k];
            nk[k] = acc;
        }
        std::vector<int> t(emax + 1, 0);
        for (int k = 1; k <= emax; ++k) {
            long long ratio = nk[k] / nk[k - 1];
            int tk = 0;
            while (ratio > 1) {
                ratio /= p;
                ++tk;
            }
            t[k] = tk;
        }
        std::vector<int> part;
        for (int i = 0; i < t[1]; ++i) {
            int lambda = 0;
            for (int k = 1; k <= emax; ++k)
                if (t[k] > i) lambda = k;
            part.push_back(lambda);
        }
        if (!part.empty()) parts[p] = part;
    }
    return GroupType::from_partitions(std::move(parts));
}

Subgroup Subgroup::scaled(const Int& k) const {
    std::vector<Group::Element> g2;
    g2.reserve(gens_.size());
    for (const auto& g : gens_) g2.push_back(ambient_->scale(k, g));
    return Subgroup(ambient_, std::move(g2));
}

Coset::Coset(Subgroup sub, Group::Element rep) : sub_(std::move(sub)), rep_(std::move(rep)) {}

bool Coset::contains(const Group::Element& x) const {
    return sub_.contains(sub_.ambient().sub(x, rep_));
}

bool Coset::operator==(const Coset& o) const {
    return sub_.same_set(o.sub_) && sub_.contains(sub_.ambient().sub(rep_, o.rep_));
}

std::uint64_t Coset::canonical_rep_encoded() const {
    const Group& g = sub_.ambient();
    std::uint64_t best = UINT64_MAX;
    for (std::uint64_t h : sub_.elements())
        best = std::min(best, g.encode(g.add(rep_, g.decode(h))));
    return best;
}

RMPair::RMPair(GroupType group, Coset coset, Int r, Int m)
    : group_(std::move(group)), coset_(std::move(coset)), r_(std::move(r)), m_(std::move(m)) {
    if (r_ < 1 || m_ < 1) throw std::invalid_argument("RMPair: r and m must be >= 1");
    const Group& amb = coset_.subgroup().ambient();
    if (amb.type() != group_)
        throw std::invalid_argument("RMPair: coset ambient group mismatch");
    const Subgroup& h = coset_.subgroup();
    // (1) r*(V/H) = 0, i.e. r*V contained in H
    for (int i = 0; i < amb.num_factors(); ++i) {
        Group::Element e = amb.zero();
        e[i] = 1;
        if (!h.contains(amb.scale(r_, e)))
            throw std::invalid_argument("RMPair: condition (1) fails: r*(G/H) != 0");
    }
    // (2) gamma generates V/H
    std::vector<Group::Element> gens = h.generators();
    gens.push_back(coset_.representative());
    if (amb.closure(gens).size() != amb.order())
        throw std::invalid_argument("RMPair: condition (2) fails: gamma does not generate G/H");
    // (3) m*r*gamma in r*H
    Subgroup rh = h.scaled(r_);
    if (!rh.contains(amb.scale(m_ * r_, coset_.representative())))
        throw std::invalid_argument("RMPair: condition (3) fails: m*r*gamma not in r*H");
}

// ---------------------------------------------------------------------------
// Counting operations

GroupType canonicalize(const std::vector<Int>& cyclic_orders) {
    return GroupType::from_cyclic_orders(cyclic_orders);
}

Int aut_order(const GroupType& g) {
    Int total = 1;
    for (auto& [p, part] : g.partitions()) {
        // ascending exponents
        std::vector<int> e(part.rbegin(), part.rend());
        int n = static_cast<int>(e.size());
        std::vector<int> d(n), c(n);
        for (int k = 0; k < n; ++k) {
            int dk = k, ck = k;
            while (dk + 1 < n && e[dk + 1] == e[k]) ++dk;
            while (ck - 1 >= 0 && e[ck - 1] == e[k]) --ck;
            d[k] = dk + 1;  // 1-based
            c[k] = ck + 1;
        }
        Int f = 1;
        for (int k = 0; k < n; ++k) f *= pow_int(p, d[k]) - pow_int(p, k);
        for (int j = 0; j < n; ++j) f *= pow_int(p, static_cast<long long>(e[j]) * (n - d[j]));
        for (int i = 0; i < n; ++i)
            f *= pow_int(p, static_cast<long long>(e[i] - 1) * (n - c[i] + 1));
        total *= f;
    }
    return total;
}

SourceProfile profile_of(const GroupType& g) {
    SourceProfile prof;
    for (auto& [p, part] : g.partitions()) prof[p] = PPartProfile{part, 0};
    return prof;
}

Int hom_count_profile(const SourceProfile& src, const GroupType& h) {
    Int total = 1;
    for (auto& [p, mu] : h.partitions()) {
        long long exp = 0;
        auto it = src.find(p);
        for (int mj : mu) {
            if (it != src.end()) {
                for (int li : it->second.exponents) exp += std::min(li, mj);
                exp += it->second.unbounded * mj;
            }
        }
        total *= pow_int(p, exp);
    }
    return total;
}

Int hom_count(const GroupType& g, const GroupType& h) {
    return hom_count_profile(profile_of(g), h);
}

namespace {

// Moebius data for the subgroup lattice of a fixed target type: aggregated
// (subgroup type, sum of Moebius coefficients) pairs.
struct SurjectionCounter {
    std::vector<std::pair<GroupType, Int>> terms;
};

SurjectionCounter build_counter(const GroupType& target, const EnumerationBudget& budget) {
    std::vector<Coset> subs = enumerate_subgroups(target, budget);
    std::size_t m = subs.size();
    if (m > 20000)
        throw CapacityError("count_surjections: subgroup lattice too large (" +
                            std::to_string(m) + " subgroups)");
    // subs sorted ascending by (order, elements); the full group is last.
    std::vector<Int> mob(m);
    mob[m - 1] = 1;
    for (std::size_t i = m - 1; i-- > 0;) {
        Int s = 0;
        const auto& ei = subs[i].subgroup().elements();
        for (std::size_t j = i + 1; j < m; ++j) {
            const auto& ej = subs[j].subgroup().elements();
            if (ej.size() % ei.size() != 0) continue;
            if (std::includes(ej.begin(), ej.end(), ei.begin(), ei.end())) s += mob[j];
        }
        mob[i] = -s;
    }
    std::map<GroupType, Int> agg;
    for (std::size_t i = 0; i < m; ++i) agg[subs[i].subgroup().type()] += mob[i];
    SurjectionCounter counter;
    for (auto& [t, c] : agg)
        if (c != 0) counter.terms.emplace_back(t, c);
    return counter;
}

const SurjectionCounter& cached_counter(const GroupType& target, const EnumerationBudget& budget) {
    static std::mutex mu;
    static std::map<GroupType, std::unique_ptr<SurjectionCounter>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(target);
    if (it == cache.end()) {
        auto counter = std::make_unique<SurjectionCounter>(build_counter(target, budget));
        it = cache.emplace(target, std::move(counter)).first;
    }
    return *it->second;
}

}  // namespace

Int sur_count_profile(const SourceProfile& src, const GroupType& h, const EnumerationBudget& budget) {
    if (h.is_trivial()) return 1;
    Int total = 1;
    for (std::int64_t p : h.primes()) {
        const SurjectionCounter& counter = cached_counter(h.p_part(p), budget);
        Int s = 0;
        for (auto& [sub_type, coeff] : counter.terms)
            s += coeff * hom_count_profile(src, sub_type);
        if (s == 0) return 0;
        total *= s;
    }
    return total;
}

Int count_surjections(const GroupType& g, const GroupType& h, const EnumerationBudget& budget) {
    return sur_count_profile(profile_of(g), h, budget);
}

Int torsion_count(const GroupType& g, const Int& r) {
    if (r < 1) throw std::invalid_argument("torsion_count: r must be >= 1");
    Int total = 1;
    for (auto& [p, part] : g.partitions()) {
        int v = 0;
        Int rr = r;
        while (rr % p == 0) {
            rr /= p;
            ++v;
        }
        long long exp = 0;
        for (int li : part) exp += std::min(li, v);
        total *= pow_int(p, exp);
    }
    return total;
}

GroupType exterior_square(const GroupType& g) {
    std::map<std::int64_t, std::vector<int>> parts;
    for (auto& [p, part] : g.partitions()) {
        std::vector<int> out;
        for (std::size_t j = 1; j < part.size(); ++j)
            for (std::size_t i = 0; i < j; ++i) out.push_back(part[j]);  // min(l_i, l_j) = l_j
        if (!out.empty()) parts[p] = out;
    }
    return GroupType::from_partitions(std::move(parts));
}

Int count_perfect_symmetric_pairings(const GroupType& g, const EnumerationBudget& budget) {
    Int total = 1;
    for (auto& [p, part] : g.partitions()) {
        const int k = static_cast<int>(part.size());
        // Gram entry (i,j), i <= j, ranges over Z/p^{part[j]} (partition descending).
        std::vector<std::pair<int, int>> cells;
        std::vector<std::uint64_t> cell_mod;
        std::uint64_t gram_count = 1;
        for (int j = 0; j < k; ++j)
            for (int i = 0; i <= j; ++i) {
                Int q = pow_int(p, part[j]);
                cells.emplace_back(i, j);
                cell_mod.push_back(q.get_ui());
                if (gram_count > budget.max_pairing_grams / cell_mod.back())
                    throw CapacityError(
                        "count_perfect_symmetric_pairings: Gram enumeration exceeds budget of " +
                        std::to_string(budget.max_pairing_grams));
                gram_count *= cell_mod.back();
            }
        padic::SmithEngine engine(p, part[0] + 1);
        std::vector<std::uint64_t> gram(cells.size(), 0);
        std::vector<std::uint64_t> mat(static_cast<std::size_t>(k) * 2 * k);
        std::vector<std::uint64_t> ppow(part[0] + 1, 1);
        for (int e = 1; e <= part[0]; ++e) ppow[e] = ppow[e - 1] * static_cast<std::uint64_t>(p);
        std::vector<int> val;
        Int found = 0;
        while (true) {
            // adjoint matrix: row j, col i gets gram(i,j) * p^{part[j]-min(part[i],part[j])},
            // augmented with the coordinate moduli diag(p^{part[j]}).
            std::fill(mat.begin(), mat.end(), 0);
            for (std::size_t c = 0; c < cells.size(); ++c) {
                auto [i, j] = cells[c];
                std::uint64_t a = gram[c];
                mat[static_cast<std::size_t>(j) * 2 * k + i] = a;  // min = part[j]
                if (i != j)
                    mat[static_cast<std::size_t>(i) * 2 * k + j] =
                        a % ppow[part[i]] * ppow[part[i] - part[j]] % engine.modulus();
            }
            for (int j = 0; j < k; ++j)
                mat[static_cast<std::size_t>(j) * 2 * k + k + j] = ppow[part[j]];
            engine.run_inplace(mat.data(), k, 2 * k, val, nullptr);
            bool perfect = true;
            for (int v : val)
                if (v != 0) {
                    perfect = false;
                    break;
                }
            if (perfect) found += 1;
            // odometer
            std::size_t c = 0;
            while (c < cells.size()) {
                if (++gram[c] < cell_mod[c]) break;
                gram[c] = 0;
                ++c;
            }
            if (c == cells.size()) break;
        }
        total *= found;
    }
    return total;
}

namespace {

std::vector<Subgroup> enumerate_subgroups_impl(std::shared_ptr<const Group> amb,
                                               const EnumerationBudget& budget) {
    const Group& g = *amb;
    std::map<std::vector<std::uint64_t>, std::vector<Group::Element>> seen;  // elements -> gens
    std::vector<std::vector<std::uint64_t>> queue;
    std::vector<std::uint64_t> triv{g.encode(g.zero())};
    seen.emplace(triv, std::vector<Group::Element>{});
    queue.push_back(triv);
    while (!queue.empty()) {
        std::vector<std::uint64_t> cur = std::move(queue.back());
        queue.pop_back();
        std::vector<Group::Element> cur_gens = seen.at(cur);
        for (std::uint64_t idx = 1; idx < g.order(); ++idx) {
            if (std::binary_search(cur.begin(), cur.end(), idx)) continue;
            Group::Element v = g.decode(idx);
            // <cur, v> = union of cur + k*v
            std::set<std::uint64_t> grown(cur.begin(), cur.end());
            Group::Element kv = v;
            while (!grown.count(g.encode(kv))) {
                for (std::uint64_t s : cur) grown.insert(g.encode(g.add(g.decode(s), kv)));
                kv = g.add(kv, v);
            }
            std::vector<std::uint64_t> key(grown.begin(), grown.end());
            if (seen.count(key)) continue;
            if (seen.size() >= budget.max_subgroups)
                throw CapacityError("enumerate_subgroups: more than " +
                                    std::to_string(budget.max_subgroups) + " subgroups");
            std::vector<Group::Element> gens = cur_gens;
            gens.push_back(v);
            seen.emplace(key, gens);
            queue.push_back(std::move(key));
        }
    }
    std::vector<std::pair<std::vector<std::uint64_t>, std::vector<Group::Element>>> items(
        seen.begin(), seen.end());
    std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
        if (a.first.size() != b.first.size()) return a.first.size() < b.first.size();
        return a.first < b.first;
    });
    std::vector<Subgroup> out;
    out.reserve(items.size());
    for (auto& [elems, gens] : items) out.emplace_back(amb, gens);
    return out;
}

}  // namespace

std::vector<Coset> enumerate_subgroups(const GroupType& g, const EnumerationBudget& budget) {
    auto amb = std::make_shared<const Group>(g, budget.max_order);
    std::vector<Coset> out;
    for (Subgroup& s : enumerate_subgroups_impl(amb, budget))
        out.emplace_back(std::move(s), amb->zero());
    return out;
}

std::vector<RMPair> enumerate_rm_pairs(const GroupType& v, const Int& r, const Int& m,
                                       const EnumerationBudget& budget) {
    if (r < 1 || m < 1) throw std::invalid_argument("enumerate_rm_pairs: r, m must be >= 1");
    auto amb = std::make_shared<const Group>(v, budget.max_order);
    const Group& g = *amb;
    std::vector<RMPair> out;
    for (Subgroup& h : enumerate_subgroups_impl(amb, budget)) {
        // condition (1): r*V inside H
        bool cond1 = true;
        for (int i = 0; i < g.num_factors() && cond1; ++i) {
            Group::Element e = g.zero();
            e[i] = 1;
            cond1 = h.contains(g.scale(r, e));
        }
        if (!cond1) continue;
        Subgroup rh = h.scaled(r);
        std::vector<bool> marked(g.order(), false);
        for (std::uint64_t idx = 0; idx < g.order(); ++idx) {
            if (marked[idx]) continue;
            Group::Element rep = g.decode(idx);
            for (std::uint64_t henc : h.elements())
                marked[g.encode(g.add(rep, g.decode(henc)))] = true;
            // condition (2): gamma generates V/H
            std::vector<Group::Element> gens = h.generators();
            gens.push_back(rep);
            if (g.closure(gens).size() != g.order()) continue;
            // condition (3): m*r*gamma in r*H
            if (!rh.contains(g.scale(m * r, rep))) continue;
            out.emplace_back(v, Coset(h, rep), r, m);
        }
    }
    return out;
}

Int largest_divisor_supported(const Int& n, const std::vector<std::int64_t>& primes) {
    if (n < 1) throw std::invalid_argument("largest_divisor_supported: n must be >= 1");
    Int d = 1, rest = n;
    for (std::int64_t p : primes) {
        while (rest % p == 0) {
            rest /= p;
            d *= p;
        }
    }
    return d;
}

}  // namespace regsmith::abelian
