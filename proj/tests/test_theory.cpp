#include <doctest.h>

#include "regsmith/errors.hpp"
#include "regsmith/theory.hpp"

using namespace regsmith;
using namespace regsmith::theory;
using abelian::GroupType;

namespace {

bool within(const Interval& iv, double lo, double hi) {
    return iv.lo.get_d() >= lo && iv.hi.get_d() <= hi;
}

}  // namespace

TEST_CASE("euler products carry rigorous enclosures") {
    auto p2 = EulerProduct::evaluate(2, ProductStyle::AllK);
    // prod_{k>=1} (1 - 2^-k) = 0.2887880950866...
    CHECK(within(p2.value, 0.2887880950, 0.2887880951));

    auto p5 = EulerProduct::evaluate(5, ProductStyle::OddExponents);
    // prod_{k>=0} (1 - 5^-(2k+1)) = 0.79333547...
    CHECK(within(p5.value, 0.793335469, 0.793335471));

    SUBCASE("doubling the terms stays within the reported bound") {
        for (std::int64_t p : {2, 3, 5}) {
            for (ProductStyle style : {ProductStyle::AllK, ProductStyle::OddExponents}) {
                auto coarse = EulerProduct::evaluate(p, style, 8);
                auto fine = EulerProduct::evaluate(p, style, 16);
                CHECK(coarse.value.lo <= fine.value.lo);
                CHECK(fine.value.hi <= coarse.value.hi);
            }
        }
    }
}

TEST_CASE("cl_probability examples") {
    CHECK(within(cl_probability(GroupType::trivial(), {2}), 0.288788094, 0.288788096));
    // |Aut(Z/2)| = 1: same value
    CHECK(within(cl_probability(GroupType::parse("Z2"), {2}), 0.288788094, 0.288788096));
    // (1/2) * prod_{k>=1}(1 - 3^-k) = 0.560126077.../2
    CHECK(within(cl_probability(GroupType::parse("Z3"), {3}), 0.280063038, 0.280063040));
    CHECK_THROWS_AS(cl_probability(GroupType::parse("Z5"), {2}), std::invalid_argument);
}

TEST_CASE("sym_probability examples") {
    CHECK(within(sym_probability(GroupType::trivial(), {5}), 0.793335469, 0.793335471));
    // (2 / (3*2)) * prod_{k>=0}(1 - 3^-(2k+1)) = 0.6390046... / 3
    CHECK(within(sym_probability(GroupType::parse("Z3"), {3}), 0.213001, 0.213002));
    // two primes multiply
    auto two = sym_probability(GroupType::parse("Z5"), {3, 5});
    auto via3 = EulerProduct::evaluate(3, ProductStyle::OddExponents).value;
    auto via5 = EulerProduct::evaluate(5, ProductStyle::OddExponents).value;
    Rat coeff = Rat(4) / Rat(20);  // #pairings(Z5)=4, |V||Aut| = 5*4
    CHECK(two.lo == (via3 * via5).scaled(coeff).lo);
    CHECK_THROWS_AS(sym_probability(GroupType::parse("Z2"), {2}), std::invalid_argument);
}

TEST_CASE("predicted moments") {
    CHECK(predicted_moment_directed(GroupType::parse("Z5"), Int(3)) == 1);
    CHECK(predicted_moment_directed(GroupType::trivial(), Int(7)) == 1);
    CHECK_THROWS_AS(predicted_moment_directed(GroupType::parse("Z2"), Int(4)),
                    std::invalid_argument);

    CHECK(predicted_moment_symmetric(GroupType::parse("Z5"), Int(3)) == 1);
    CHECK(predicted_moment_symmetric(GroupType::parse("Z5^2"), Int(3)) == 5);
    CHECK(predicted_moment_symmetric(GroupType::parse("Z3^3"), Int(2)) == 27);
    CHECK_THROWS_AS(predicted_moment_symmetric(GroupType::parse("Z2"), Int(3)),
                    std::invalid_argument);

    CHECK(predicted_moment_rm(GroupType::parse("Z2"), Int(4), Int(1)) == 3);
    CHECK(predicted_moment_rm(GroupType::parse("Z2"), Int(4), Int(2)) == 3);
    CHECK(predicted_moment_rm(GroupType::parse("Z4"), Int(2), Int(1)) == 2);
    CHECK(predicted_moment_rm(GroupType::parse("Z4"), Int(2), Int(2)) == 4);
    CHECK(predicted_moment_rm(GroupType::parse("Z5"), Int(3), Int(1)) == 1);
}

TEST_CASE("rm moments reduce to 1 in the coprime case for all |V| <= 64") {
    for (const GroupType& v : enumerate_group_types({2, 3, 5, 7}, Int(64))) {
        for (long r : {3, 5, 7}) {
            Int g;
            mpz_gcd(g.get_mpz_t(), v.order().get_mpz_t(), Int(r).get_mpz_t());
            if (g != 1) continue;
            for (long m : {1, 2, 3}) CHECK(predicted_moment_rm(v, Int(r), Int(m)) == 1);
        }
    }
}

TEST_CASE("group type enumeration is ordered and complete") {
    auto types = enumerate_group_types({2}, Int(8));
    // triv, Z2, Z4, Z2^2, Z8, Z4*Z2, Z2^3
    CHECK(types.size() == 7);
    CHECK(types.front().is_trivial());
    for (std::size_t i = 1; i < types.size(); ++i)
        CHECK(types[i - 1].order() <= types[i].order());

    auto mixed = enumerate_group_types({2, 3}, Int(12));
    // orders 1,2,3,4(x2),6,8(x3),9(x2),12(x2): 1+1+1+2+1+3+2+2 = 13
    CHECK(mixed.size() == 13);
}

TEST_CASE("mass totals") {
    auto cl = mass_total(MeasureStyle::DirectedCL, {2}, Int(256));
    CHECK(cl.group_count == 67);
    CHECK(cl.mass.lo.get_d() >= 0.99);
    CHECK(cl.mass.hi.get_d() <= 1.0);

    auto cl1 = mass_total(MeasureStyle::DirectedCL, {2}, Int(1));
    CHECK(cl1.group_count == 1);
    CHECK(within(cl1.mass, 0.288788094, 0.288788096));

    auto sym1 = mass_total(MeasureStyle::Symmetric, {5}, Int(1));
    CHECK(within(sym1.mass, 0.793335469, 0.793335471));

    auto sym = mass_total(MeasureStyle::Symmetric, {5}, Int(125));
    CHECK(sym.mass.lo.get_d() >= 0.99);
    CHECK(sym.mass.hi.get_d() <= 1.0);
}

TEST_CASE("measure tables list per-type probabilities in canonical order") {
    auto table = measure_table(MeasureStyle::DirectedCL, {2}, Int(8));
    REQUIRE(table.entries.size() == 7);
    CHECK(table.entries.front().first.is_trivial());
    // P(triv) = P(Z2) for the CL measure (|Aut(Z2)| = 1)
    CHECK(table.entries[0].second.lo == table.entries[1].second.lo);
    // consistent with the aggregate
    auto mass = mass_total(MeasureStyle::DirectedCL, {2}, Int(8));
    CHECK(table.total.lo == mass.mass.lo);
    for (std::size_t i = 1; i < table.entries.size(); ++i)
        CHECK(table.entries[i - 1].first.order() <= table.entries[i].first.order());
}

TEST_CASE("cl measure at p=2 brackets 1 with its tail") {
    // partial mass through order 2^8 plus a crude tail must reach past 0.995
    auto part = mass_total(MeasureStyle::DirectedCL, {2}, Int(256));
    CHECK(part.mass.hi.get_d() < 1.0);
    CHECK(part.mass.lo.get_d() > 0.995);
}

TEST_CASE("pairing mass identity residual") {
    auto r1 = pairing_mass_identity_residual(3, Int(1));
    // 1/prod - 1 = 0.5649340...
    CHECK(r1.lo.get_d() > 0.564933);
    CHECK(r1.hi.get_d() < 0.564935);

    auto r27 = pairing_mass_identity_residual(3, Int(27));
    CHECK(r27.lo.get_d() > 0.02789);
    CHECK(r27.hi.get_d() < 0.02790);

    auto r81 = pairing_mass_identity_residual(3, Int(81));
    CHECK(r81.hi.get_d() < 0.02);  // falls below 0.02 one cutoff later
    CHECK(r81.lo.get_d() > 0);

    // strictly decreasing in the cutoff
    CHECK(r27.hi < r1.lo);
    CHECK(r81.hi < r27.lo);
    CHECK_THROWS_AS(pairing_mass_identity_residual(2, Int(8)), std::invalid_argument);
}
