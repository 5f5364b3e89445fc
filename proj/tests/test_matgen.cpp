#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "regsmith/errors.hpp"
#include "regsmith/matgen.hpp"
#include "regsmith/padic.hpp"

using namespace regsmith;
using namespace regsmith::matgen;

namespace {

void check_row_col_sums(const IntMat& m, long r, bool cols_too) {
    for (int i = 0; i < m.rows; ++i) {
        Int rs = 0, cs = 0;
        for (int j = 0; j < m.cols; ++j) {
            rs += m.at(i, j);
            cs += m.at(j, i);
        }
        CHECK(rs == r);
        if (cols_too) CHECK(cs == r);
    }
}

double binomial_z(long hits, long trials, double p) {
    double se = std::sqrt(p * (1 - p) / trials);
    return (static_cast<double>(hits) / trials - p) / se;
}

}  // namespace

TEST_CASE("seed policy and stream determinism") {
    SeedPolicy a{123, 7}, b{123, 7}, c{123, 8};
    CHECK(a.stream_seed() == b.stream_seed());
    CHECK(a.stream_seed() != c.stream_seed());
    Xoshiro256 r1(a), r2(b);
    for (int i = 0; i < 100; ++i) CHECK(r1.next() == r2.next());

    IntMat m1, m2;
    Xoshiro256 s1(SeedPolicy{5, 0}), s2(SeedPolicy{5, 0});
    sample_perm_sum(30, 3, s1, m1);
    sample_perm_sum(30, 3, s2, m2);
    CHECK(m1 == m2);
}

TEST_CASE("bounded draw is unbiased at 3 sigma") {
    Xoshiro256 rng(99);
    const int trials = 30000;
    long counts[3] = {0, 0, 0};
    for (int i = 0; i < trials; ++i) counts[rng.below(3)]++;
    for (long c : counts) CHECK(std::abs(binomial_z(c, trials, 1.0 / 3)) <= 3.5);
}

TEST_CASE("perm_sum: shape and edge cases") {
    Xoshiro256 rng(1);
    IntMat m;
    sample_perm_sum(1, 5, rng, m);
    CHECK(m.at(0, 0) == 5);  // the only permutation of one point

    for (int t = 0; t < 300; ++t) {
        int n = 2 + static_cast<int>(rng.below(12));
        int r = 1 + static_cast<int>(rng.below(5));
        sample_perm_sum(n, r, rng, m);
        check_row_col_sums(m, r, true);
    }
    CHECK_THROWS_AS(sample_perm_sum(0, 1, rng, m), std::invalid_argument);
}

TEST_CASE("perm_sum: uniform over S_2 at 3 sigma") {
    const int trials = 10000;
    long identity = 0;
    IntMat m;
    for (int t = 0; t < trials; ++t) {
        Xoshiro256 rng(SeedPolicy{42, static_cast<std::uint64_t>(t)});
        sample_perm_sum(2, 1, rng, m);
        if (m.at(0, 0) == 1) ++identity;
    }
    CHECK(std::abs(binomial_z(identity, trials, 0.5)) <= 3.0);
}

TEST_CASE("perm_sum: transpose-matched statistic at 3 sigma") {
    // f(A) = sum_j (j+1) A[0][j]; A and A^T must give matching means
    const int trials = 20000, n = 8, r = 3;
    double s1 = 0, s2 = 0, q1 = 0, q2 = 0;
    IntMat m;
    for (int t = 0; t < trials; ++t) {
        Xoshiro256 rng(SeedPolicy{7, static_cast<std::uint64_t>(t)});
        sample_perm_sum(n, r, rng, m);
        double f = 0, g = 0;
        for (int j = 0; j < n; ++j) {
            f += (j + 1) * m.at(0, j).get_d();
            g += (j + 1) * m.at(j, 0).get_d();
        }
        s1 += f;
        q1 += f * f;
        s2 += g;
        q2 += g * g;
    }
    double m1 = s1 / trials, m2 = s2 / trials;
    double v1 = q1 / trials - m1 * m1, v2 = q2 / trials - m2 * m2;
    double z = (m1 - m2) / std::sqrt((v1 + v2) / trials);
    CHECK(std::abs(z) <= 3.0);
}

TEST_CASE("matching_union: shape, parity, uniqueness at n=2") {
    Xoshiro256 rng(3);
    IntMat m;
    sample_matching_union(2, 3, rng, m);
    CHECK(m.at(0, 0) == 0);
    CHECK(m.at(1, 1) == 0);
    CHECK(m.at(0, 1) == 3);
    CHECK(m.at(1, 0) == 3);
    CHECK_THROWS_AS(sample_matching_union(5, 3, rng, m), std::invalid_argument);

    for (int t = 0; t < 300; ++t) {
        int n = 2 * (1 + static_cast<int>(rng.below(8)));
        int r = 1 + static_cast<int>(rng.below(4));
        sample_matching_union(n, r, rng, m);
        check_row_col_sums(m, r, false);
        for (int i = 0; i < n; ++i) {
            CHECK(m.at(i, i) == 0);
            for (int j = 0; j < n; ++j) CHECK(m.at(i, j) == m.at(j, i));
        }
    }
}

TEST_CASE("matching_union: uniform over the 3 matchings of K4 at 3 sigma") {
    const int trials = 10000;
    std::map<std::string, long> freq;
    IntMat m;
    for (int t = 0; t < trials; ++t) {
        Xoshiro256 rng(SeedPolicy{11, static_cast<std::uint64_t>(t)});
        sample_matching_union(4, 1, rng, m);
        std::string key;
        for (int i = 0; i < 4; ++i)
            for (int j = i + 1; j < 4; ++j) key += m.at(i, j) == 1 ? '1' : '0';
        freq[key]++;
    }
    CHECK(freq.size() == 3);
    for (auto& [k, c] : freq) CHECK(std::abs(binomial_z(c, trials, 1.0 / 3)) <= 3.5);
}

TEST_CASE("config model: row sums count loops twice") {
    Xoshiro256 rng(17);
    IntMat m;
    for (int t = 0; t < 300; ++t) {
        int n = 2 + static_cast<int>(rng.below(8));
        int r = 1 + static_cast<int>(rng.below(4));
        if ((n * r) % 2) continue;
        sample_config_model(n, r, rng, m, ConfigCondition::None);
        check_row_col_sums(m, r, false);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) CHECK(m.at(i, j) == m.at(j, i));
    }
    CHECK_THROWS_AS(sample_config_model(3, 3, rng, m, ConfigCondition::None),
                    std::invalid_argument);
}

TEST_CASE("config model: impossible simple case hits the retry cap") {
    Xoshiro256 rng(19);
    IntMat m;
    CHECK_THROWS_AS(sample_config_model(2, 2, rng, m, ConfigCondition::Simple, 2000),
                    CapacityError);
}

TEST_CASE("config model: n=4, r=3 simple is always K4") {
    IntMat m;
    for (int t = 0; t < 50; ++t) {
        Xoshiro256 rng(SeedPolicy{23, static_cast<std::uint64_t>(t)});
        sample_config_model(4, 3, rng, m, ConfigCondition::Simple);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) CHECK(m.at(i, j) == (i == j ? 0 : 1));
    }
}

TEST_CASE("config model simple matches exhaustive labelled enumeration, (6,3)") {
    // brute-force enumeration of all simple 3-regular graphs on 6 vertices,
    // bucketed by isomorphism class
    const int n = 6;
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) edges.emplace_back(i, j);
    auto canonical = [&](std::uint32_t mask) {
        std::vector<int> perm(n);
        for (int i = 0; i < n; ++i) perm[i] = i;
        std::uint32_t best = UINT32_MAX;
        do {
            std::uint32_t relabeled = 0;
            for (std::size_t e = 0; e < edges.size(); ++e) {
                if (!(mask & (1u << e))) continue;
                int a = perm[edges[e].first], b = perm[edges[e].second];
                if (a > b) std::swap(a, b);
                for (std::size_t e2 = 0; e2 < edges.size(); ++e2)
                    if (edges[e2] == std::make_pair(a, b)) relabeled |= 1u << e2;
            }
            best = std::min(best, relabeled);
        } while (std::next_permutation(perm.begin(), perm.end()));
        return best;
    };
    std::map<std::uint32_t, long> labelled_by_class;
    long total_labelled = 0;
    for (std::uint32_t mask = 0; mask < (1u << edges.size()); ++mask) {
        if (__builtin_popcount(mask) != 9) continue;
        int deg[n] = {0};
        for (std::size_t e = 0; e < edges.size(); ++e)
            if (mask & (1u << e)) {
                deg[edges[e].first]++;
                deg[edges[e].second]++;
            }
        bool cubic = true;
        for (int i = 0; i < n; ++i) cubic = cubic && deg[i] == 3;
        if (!cubic) continue;
        labelled_by_class[canonical(mask)]++;
        ++total_labelled;
    }
    CHECK(total_labelled == 70);           // labelled cubic graphs on 6 vertices
    CHECK(labelled_by_class.size() == 2);  // K_{3,3} and the prism

    const int trials = 6000;
    std::map<std::uint32_t, long> sampled;
    IntMat m;
    for (int t = 0; t < trials; ++t) {
        Xoshiro256 rng(SeedPolicy{29, static_cast<std::uint64_t>(t)});
        sample_config_model(n, 3, rng, m, ConfigCondition::Simple);
        std::uint32_t mask = 0;
        for (std::size_t e = 0; e < edges.size(); ++e)
            if (m.at(edges[e].first, edges[e].second) == 1) mask |= 1u << e;
        sampled[canonical(mask)]++;
    }
    for (auto& [cls, labelled] : labelled_by_class) {
        double p = static_cast<double>(labelled) / total_labelled;
        CHECK(std::abs(binomial_z(sampled[cls], trials, p)) <= 3.5);
    }
}

TEST_CASE("directed union: derangements, zero diagonal, conditioning") {
    Xoshiro256 rng(31);
    IntMat m;
    sample_directed_union(2, 1, rng, m);
    CHECK(m.at(0, 1) == 1);
    CHECK(m.at(1, 0) == 1);

    for (int t = 0; t < 200; ++t) {
        int n = 2 + static_cast<int>(rng.below(10));
        int r = 1 + static_cast<int>(rng.below(3));
        sample_directed_union(n, r, rng, m);
        check_row_col_sums(m, r, true);
        for (int i = 0; i < n; ++i) CHECK(m.at(i, i) == 0);
    }
    // no_multi with n=2, r=2 is impossible
    CHECK_THROWS_AS(sample_directed_union(2, 2, rng, m, DirectedCondition::NoMulti, 2000),
                    CapacityError);
    // no_multi produces 0/1 entries
    for (int t = 0; t < 30; ++t) {
        sample_directed_union(6, 3, rng, m, DirectedCondition::NoMulti);
        for (const Int& x : m.a) CHECK(x <= 1);
    }
}

TEST_CASE("directed union: uniform over the 2 derangements of 3 points") {
    const int trials = 10000;
    long cyclic = 0;
    IntMat m;
    for (int t = 0; t < trials; ++t) {
        Xoshiro256 rng(SeedPolicy{37, static_cast<std::uint64_t>(t)});
        sample_directed_union(3, 1, rng, m);
        if (m.at(0, 1) == 1) ++cyclic;  // (012) vs (021)
    }
    CHECK(std::abs(binomial_z(cyclic, trials, 0.5)) <= 3.0);
}

TEST_CASE("haar symmetric: symmetry and uniform entries") {
    Xoshiro256 rng(41);
    IntMat m;
    sample_haar_symmetric(10, 5, 4, rng, m);
    for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 10; ++j) {
            CHECK(m.at(i, j) == m.at(j, i));
            CHECK(m.at(i, j) >= 0);
            CHECK(m.at(i, j) < 625);
        }
    const int trials = 10000;
    long ones = 0;
    for (int t = 0; t < trials; ++t) {
        Xoshiro256 r2(SeedPolicy{43, static_cast<std::uint64_t>(t)});
        sample_haar_symmetric(1, 2, 1, r2, m);
        if (m.at(0, 0) == 1) ++ones;
    }
    CHECK(std::abs(binomial_z(ones, trials, 0.5)) <= 3.0);
}

TEST_CASE("row and column sums divisible by p force rank deficiency mod p") {
    // p | r makes the matrix singular mod p: rank_p <= n-1
    IntMat m;
    for (int t = 0; t < 40; ++t) {
        Xoshiro256 rng(SeedPolicy{47, static_cast<std::uint64_t>(t)});
        sample_perm_sum(12, 4, rng, m);
        auto res = m.residues(2);
        CHECK(padic::rank_mod_prime(std::move(res), 12, 12, 2) <= 11);
    }
}

TEST_CASE("model spec validation") {
    ModelSpec spec;
    spec.kind = ModelKind::MatchingUnion;
    spec.n = 7;
    spec.r = 3;
    CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
    spec.n = 8;
    CHECK_NOTHROW(spec.validate());
    CHECK(parse_model_kind(model_kind_name(ModelKind::DirectedUnionSimple)) ==
          ModelKind::DirectedUnionSimple);
    CHECK_THROWS_AS(parse_model_kind("nope"), std::invalid_argument);
}
