#pragma once

// Brute-force oracles used only by the test suites. Each one recomputes a
// quantity by direct enumeration, independent of the library's closed-form
// or elimination-based implementation paths.

#include <algorithm>
#include <map>
#include <set>
#include <vector>

#include "regsmith/abelian.hpp"
#include "regsmith/coker.hpp"
#include "regsmith/matrix.hpp"
#include "regsmith/snf.hpp"

namespace oracles {

using regsmith::Int;
using regsmith::IntMat;
using regsmith::abelian::Group;
using regsmith::abelian::GroupType;

// |Sur(G, H)| by enumerating every generator assignment.
inline Int brute_sur_count(const GroupType& gt, const GroupType& ht) {
    Group g(gt), h(ht);
    const int k = g.num_factors();
    if (k == 0) return ht.is_trivial() ? 1 : 0;
    // images of generator i must be killed by its order
    std::vector<std::vector<Group::Element>> allowed(k);
    for (int i = 0; i < k; ++i) {
        Int ord(static_cast<long>(g.factor_order(i)));
        for (std::uint64_t idx = 0; idx < h.order(); ++idx) {
            Group::Element x = h.decode(idx);
            if (h.is_zero(h.scale(ord, x))) allowed[i].push_back(x);
        }
    }
    std::vector<std::size_t> pick(k, 0);
    Int count = 0;
    for (;;) {
        std::vector<Group::Element> images;
        images.reserve(k);
        for (int i = 0; i < k; ++i) images.push_back(allowed[i][pick[i]]);
        if (h.closure(images).size() == h.order()) count += 1;
        int j = 0;
        while (j < k) {
            if (++pick[j] < allowed[j].size()) break;
            pick[j] = 0;
            ++j;
        }
        if (j == k) break;
    }
    return count;
}

inline Int brute_aut_order(const GroupType& gt) { return brute_sur_count(gt, gt); }

// Exterior square via its presentation: (V tensor V) / <v tensor v>,
// computed as the cokernel of [diag(orders) | columns v tensor v].
inline GroupType presentation_exterior_square(const GroupType& gt) {
    Group g(gt);
    const int k = g.num_factors();
    if (k <= 1) return GroupType::trivial();
    auto cell = [&](int a, int b) { return a * k + b; };
    std::vector<Int> orders(k * k);
    for (int a = 0; a < k; ++a)
        for (int b = 0; b < k; ++b)
            orders[cell(a, b)] =
                Int(static_cast<long>(std::min(g.factor_order(a), g.factor_order(b))));
    const long long nels = static_cast<long long>(g.order());
    IntMat rel(k * k, k * k + static_cast<int>(nels));
    for (int c = 0; c < k * k; ++c) rel.at(c, c) = orders[c];
    for (long long idx = 0; idx < nels; ++idx) {
        Group::Element v = g.decode(static_cast<std::uint64_t>(idx));
        for (int a = 0; a < k; ++a)
            for (int b = 0; b < k; ++b) {
                Int c = Int(static_cast<long>(v[a])) * Int(static_cast<long>(v[b]));
                rel.at(cell(a, b), k * k + static_cast<int>(idx)) = c % orders[cell(a, b)];
            }
    }
    auto snf = regsmith::exact::smith_normal_form(rel);
    std::vector<Int> torsion;
    for (const Int& d : snf.invariant_factors)
        if (d > 1) torsion.push_back(d);
    return regsmith::abelian::canonicalize(torsion);
}

// k x k integer determinant by cofactor expansion (k <= 6).
inline Int det_small(const std::vector<std::vector<Int>>& m) {
    const int k = static_cast<int>(m.size());
    if (k == 0) return 1;
    if (k == 1) return m[0][0];
    Int total = 0;
    for (int j = 0; j < k; ++j) {
        if (m[0][j] == 0) continue;
        std::vector<std::vector<Int>> minor;
        for (int i = 1; i < k; ++i) {
            std::vector<Int> row;
            for (int c = 0; c < k; ++c)
                if (c != j) row.push_back(m[i][c]);
            minor.push_back(row);
        }
        Int term = m[0][j] * det_small(minor);
        if (j % 2) term = -term;
        total += term;
    }
    return total;
}

// gcd of all k x k minors (0 if all vanish).
inline Int minor_gcd(const IntMat& a, int k) {
    std::vector<int> rows(k), cols(k);
    Int g = 0;
    std::vector<int> rsel, csel;
    // enumerate k-subsets of rows and columns
    std::vector<int> ridx(k), cidx(k);
    auto next_subset = [](std::vector<int>& s, int n) {
        int k2 = static_cast<int>(s.size());
        for (int i = k2 - 1; i >= 0; --i) {
            if (s[i] < n - (k2 - i)) {
                ++s[i];
                for (int j = i + 1; j < k2; ++j) s[j] = s[j - 1] + 1;
                return true;
            }
        }
        return false;
    };
    for (int i = 0; i < k; ++i) ridx[i] = i;
    do {
        for (int i = 0; i < k; ++i) cidx[i] = i;
        do {
            std::vector<std::vector<Int>> sub(k, std::vector<Int>(k));
            for (int i = 0; i < k; ++i)
                for (int j = 0; j < k; ++j) sub[i][j] = a.at(ridx[i], cidx[j]);
            Int d = det_small(sub);
            mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), d.get_mpz_t());
        } while (next_subset(cidx, a.cols));
    } while (next_subset(ridx, a.rows));
    return abs(g);
}

}  // namespace oracles
