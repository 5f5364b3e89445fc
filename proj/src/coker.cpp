#include "regsmith/coker.hpp"

#include <algorithm>
#include <stdexcept>

#include "regsmith/errors.hpp"
#include "regsmith/padic.hpp"
#include "regsmith/snf.hpp"

namespace regsmith::coker {

namespace {

void require_square(const IntMat& a, const char* who) {
    if (!a.is_square()) throw std::invalid_argument(std::string(who) + ": matrix must be square");
}

Int pow_int(std::int64_t p, long long e) {
    Int q;
    mpz_ui_pow_ui(q.get_mpz_t(), static_cast<unsigned long>(p), static_cast<unsigned long>(e));
    return q;
}

struct PadicPart {
    padic::SmithResult sm;
    long long free_rank = 0;
    bool exact_fallback = false;
};

// Adaptive-precision Sylow-p elimination. Terminates when the slots at the
// precision ceiling are exactly the free ones and every finite exponent sits
// at least 2 below the ceiling. free_rank_of is only consulted when slots
// persist at the ceiling.
template <typename FreeRankFn>
PadicPart padic_part(const IntMat& a, std::int64_t p, int e_hint, bool want_left,
                     FreeRankFn&& free_rank_of) {
    require_square(a, "cokernel_p_part");
    const int n = a.rows;
    int cap = std::max(2, e_hint);
    const int cap_limit = padic::max_cap(p);
    long long free_rank = -1;  // unknown
    for (;;) {
        if (cap > cap_limit) {
            PadicPart out;
            out.exact_fallback = true;
            return out;  // caller falls back to the exact SNF route
        }
        padic::SmithEngine engine(p, cap);
        padic::SmithResult sm = engine.run(a.residues(engine.modulus()), n, n, want_left);
        int at_cap = sm.count_at_least(cap);
        if (at_cap > 0 && free_rank < 0) free_rank = free_rank_of();
        int max_finite = 0;
        for (int v : sm.val)
            if (v < cap) max_finite = std::max(max_finite, v);
        bool stable = (at_cap == std::max<long long>(free_rank, 0)) && (max_finite + 2 <= cap);
        if (stable) {
            PadicPart out;
            out.sm = std::move(sm);
            out.free_rank = std::max<long long>(free_rank, 0);
            return out;
        }
        cap *= 2;
    }
}

template <typename FreeRankFn>
PPartReport p_part_report(const IntMat& a, std::int64_t p, int e_hint, FreeRankFn&& frk) {
    if (p < 2) throw std::invalid_argument("cokernel_p_part: p must be a prime >= 2");
    PadicPart part = padic_part(a, p, e_hint, false, frk);
    PPartReport rep;
    rep.p = p;
    if (part.exact_fallback) {
        exact::SmithDecomposition snf = exact::smith_normal_form(a);
        std::vector<int> exps;
        long long free_rank = 0;
        int max_e = 0;
        for (const Int& d : snf.invariant_factors) {
            if (d == 0) {
                ++free_rank;
            } else if (d > 1) {
                int v = 0;
                Int m = d;
                while (m % p == 0) {
                    m /= p;
                    ++v;
                }
                if (v > 0) exps.push_back(v);
                max_e = std::max(max_e, v);
            }
        }
        std::sort(exps.begin(), exps.end(), std::greater<int>());
        rep.group = GroupType::p_group(p, exps);
        rep.free_rank = free_rank;
        rep.cap_used = max_e + 2;
        return rep;
    }
    rep.group = GroupType::p_group(p, part.sm.finite_exponents());
    rep.free_rank = part.free_rank;
    rep.cap_used = part.sm.cap;
    return rep;
}

}  // namespace

CokernelReport cokernel(const IntMat& a) {
    require_square(a, "cokernel");
    const int n = a.rows;
    exact::SmithDecomposition snf = exact::smith_normal_form(a);
    CokernelReport rep;
    rep.n = n;
    rep.invariant_factors = snf.invariant_factors;
    std::vector<int> torsion_idx, free_idx;
    for (int j = 0; j < n; ++j) {
        const Int& d = snf.invariant_factors[j];
        if (d == 0)
            free_idx.push_back(j);
        else if (d > 1)
            torsion_idx.push_back(j);
    }
    rep.free_rank = static_cast<long long>(free_idx.size());
    for (int j : torsion_idx) rep.torsion_orders.push_back(snf.invariant_factors[j]);
    rep.torsion = abelian::canonicalize(rep.torsion_orders);
    rep.basis_images.assign(n, {});
    for (int i = 0; i < n; ++i) {
        auto& img = rep.basis_images[i];
        img.reserve(torsion_idx.size() + free_idx.size());
        for (int j : torsion_idx) {
            Int c;
            mpz_fdiv_r(c.get_mpz_t(), snf.left.at(j, i).get_mpz_t(),
                       snf.invariant_factors[j].get_mpz_t());
            img.push_back(c);
        }
        for (int j : free_idx) img.push_back(snf.left.at(j, i));
    }
    return rep;
}

PPartReport cokernel_p_part(const IntMat& a, std::int64_t p, int e_hint) {
    return p_part_report(a, p, e_hint, [&] { return a.rows - exact::rank_exact(a); });
}

bool is_singular(const IntMat& a) {
    require_square(a, "is_singular");
    // full-rank certificate mod a fixed prime first; suspected-singular
    // matrices get the exact CRT determinant certificate
    const std::uint64_t q = 2147483647ull;
    if (padic::rank_mod_prime(a.residues(q), a.rows, a.cols, q) == a.rows) return false;
    return exact::det_is_zero(a);
}

namespace {

void require_regular_sums(const IntMat& a, const Int& r, const char* who) {
    require_square(a, who);
    for (int i = 0; i < a.rows; ++i) {
        Int rs = 0, cs = 0;
        for (int j = 0; j < a.cols; ++j) {
            rs += a.at(i, j);
            cs += a.at(j, i);
        }
        if (rs != r || cs != r)
            throw std::invalid_argument(std::string(who) +
                                        ": all row and column sums must equal r");
    }
}

}  // namespace

PairStructure pair_structure(const IntMat& a, const Int& r) {
    require_regular_sums(a, r, "pair_structure");
    const int n = a.rows;
    exact::SmithDecomposition snf = exact::smith_normal_form(a);
    PairStructure ps;
    ps.n = n;
    ps.r = r;
    ps.p = 0;
    ps.cond_m = n;
    for (int j = 0; j < n; ++j) {
        const Int& d = snf.invariant_factors[j];
        if (d == 1) continue;
        PairSlot slot;
        slot.order = d;
        slot.coeff.resize(n);
        for (int i = 0; i < n; ++i) {
            if (d == 0)
                slot.coeff[i] = snf.left.at(j, i);
            else
                mpz_fdiv_r(slot.coeff[i].get_mpz_t(), snf.left.at(j, i).get_mpz_t(),
                           d.get_mpz_t());
        }
        if (d == 0) ++ps.free_rank;
        ps.slots.push_back(std::move(slot));
    }

    // Conditions of the (r,n)-pair on (cok A, e1+E), checked as lattice
    // membership over Z. Lattice for cok/E adds the columns e1 - ej.
    IntMat aug(n, 2 * n - 1);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) aug.at(i, j) = a.at(i, j);
    for (int j = 1; j < n; ++j) {
        aug.at(0, n + j - 1) = 1;
        aug.at(j, n + j - 1) = -1;
    }
    // (1) r*(cok/E) = 0: r*e1 in the augmented lattice.
    std::vector<Int> re1(n, 0);
    re1[0] = r;
    ps.cond1 = exact::in_column_span(aug, re1);
    // (2) e1 generates cok/E: cok/E must be cyclic; every generator of cok
    // is congruent to e1 mod E, so cyclic implies e1 generates.
    exact::SmithDecomposition qsnf = exact::smith_normal_form(aug);
    int nontrivial = 0;
    for (const Int& d : qsnf.invariant_factors)
        if (d != 1) ++nontrivial;
    ps.cond2 = nontrivial <= 1;
    // (3) n*r*e1 in r*E + A Z^n.
    IntMat aug3(n, 2 * n - 1);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) aug3.at(i, j) = a.at(i, j);
    for (int j = 1; j < n; ++j) {
        aug3.at(0, n + j - 1) = r;
        aug3.at(j, n + j - 1) = -r;
    }
    std::vector<Int> nre1(n, 0);
    nre1[0] = r * n;
    ps.cond3 = exact::in_column_span(aug3, nre1);
    ps.conditions_checked = true;
    return ps;
}

PairStructure pair_structure_p_part(const IntMat& a, const Int& r, std::int64_t p, int e_hint) {
    require_regular_sums(a, r, "pair_structure_p_part");
    const int n = a.rows;
    PadicPart part =
        padic_part(a, p, e_hint, true, [&] { return a.rows - exact::rank_exact(a); });
    if (part.exact_fallback) {
        // exponent outgrew the word-size ceiling; restrict the exact structure
        PairStructure full = pair_structure(a, r);
        PairStructure ps;
        ps.n = n;
        ps.r = r;
        ps.p = p;
        ps.free_rank = full.free_rank;
        ps.cond_m = full.cond_m;
        for (const PairSlot& slot : full.slots) {
            if (slot.order == 0) {
                ps.slots.push_back(slot);
                continue;
            }
            int v = 0;
            Int m = slot.order;
            while (m % p == 0) {
                m /= p;
                ++v;
            }
            if (v == 0) continue;
            PairSlot s2;
            s2.order = pow_int(p, v);
            s2.coeff.resize(n);
            for (int i = 0; i < n; ++i)
                mpz_fdiv_r(s2.coeff[i].get_mpz_t(), slot.coeff[i].get_mpz_t(),
                           s2.order.get_mpz_t());
            ps.slots.push_back(std::move(s2));
        }
        return ps;
    }
    PairStructure ps;
    ps.n = n;
    ps.r = r;
    ps.p = p;
    ps.free_rank = part.free_rank;
    ps.cond_m = n;
    const auto& sm = part.sm;
    for (int k = 0; k < static_cast<int>(sm.val.size()); ++k) {
        int v = sm.val[k];
        if (v == 0) continue;
        PairSlot slot;
        bool free_slot = (v >= sm.cap);  // at termination these are the free slots
        slot.order = free_slot ? Int(0) : pow_int(p, v);
        slot.coeff.resize(n);
        std::uint64_t ord = free_slot ? sm.modulus : slot.order.get_ui();
        for (int i = 0; i < n; ++i)
            slot.coeff[i] = static_cast<unsigned long>(
                sm.left[static_cast<std::size_t>(k) * n + i] % ord);
        ps.slots.push_back(std::move(slot));
    }
    return ps;
}

Int count_pair_surjections(const PairStructure& ps, const abelian::RMPair& target,
                           const abelian::EnumerationBudget& budget) {
    const GroupType& vt = target.group();
    if (ps.p != 0) {
        for (std::int64_t q : vt.primes())
            if (q != ps.p)
                throw std::invalid_argument(
                    "count_pair_surjections: structure is restricted to p = " +
                    std::to_string(ps.p) + " but target has prime " + std::to_string(q));
    }
    auto amb = target.coset().subgroup().ambient_ptr();
    const abelian::Group& v = *amb;
    const abelian::Subgroup& h = target.coset().subgroup();
    const auto& b_rep = target.coset().representative();
    const int n = ps.n;

    // Finite slots only; free slots factor through the torsion quotient.
    std::vector<const PairSlot*> slots;
    for (const PairSlot& s : ps.slots)
        if (s.order != 0) slots.push_back(&s);

    // Allowed images per slot: V[order].
    std::vector<std::vector<abelian::Group::Element>> allowed(slots.size());
    double assignments = 1;
    for (std::size_t j = 0; j < slots.size(); ++j) {
        for (std::uint64_t idx = 0; idx < v.order(); ++idx) {
            abelian::Group::Element x = v.decode(idx);
            if (v.is_zero(v.scale(slots[j]->order, x))) allowed[j].push_back(x);
        }
        assignments *= static_cast<double>(allowed[j].size());
        if (assignments > static_cast<double>(budget.max_hom_assignments))
            throw CapacityError("count_pair_surjections: assignment budget of " +
                                std::to_string(budget.max_hom_assignments) + " exceeded");
    }

    std::vector<std::size_t> pick(slots.size(), 0);
    Int count = 0;
    for (;;) {
        // q_i = sum_j coeff[j][i] * x_j
        std::vector<abelian::Group::Element> q(n, v.zero());
        std::vector<abelian::Group::Element> xs(slots.size());
        for (std::size_t j = 0; j < slots.size(); ++j) xs[j] = allowed[j][pick[j]];
        for (int i = 0; i < n; ++i)
            for (std::size_t j = 0; j < slots.size(); ++j)
                q[i] = v.add(q[i], v.scale(slots[j]->coeff[i], xs[j]));
        // surjectivity: the slot images generate V
        if (v.closure(xs).size() == v.order()) {
            // MinCos_q = q1 + <q_i - q_1> must equal B exactly
            std::vector<abelian::Group::Element> diffs;
            diffs.reserve(n - 1);
            for (int i = 1; i < n; ++i) diffs.push_back(v.sub(q[i], q[0]));
            std::vector<std::uint64_t> hq = v.closure(diffs);
            if (hq == h.elements() && h.contains(v.sub(q[0], b_rep))) count += 1;
        }
        // odometer
        std::size_t j = 0;
        while (j < slots.size()) {
            if (++pick[j] < allowed[j].size()) break;
            pick[j] = 0;
            ++j;
        }
        if (j == slots.size()) break;
    }
    return count;
}

long long TrialAnalyzer::free_rank() {
    if (free_ < 0) free_ = a_.rows - exact::rank_exact(a_);
    return free_;
}

const PPartReport& TrialAnalyzer::p_part(std::int64_t p, int e_hint) {
    auto it = parts_.find(p);
    if (it == parts_.end())
        it = parts_.emplace(p, p_part_report(a_, p, e_hint, [&] { return free_rank(); })).first;
    return it->second;
}

PairStructure TrialAnalyzer::pair_p_part(const Int& r, std::int64_t p, int e_hint) {
    return pair_structure_p_part(a_, r, p, e_hint);
}

}  // namespace regsmith::coker
