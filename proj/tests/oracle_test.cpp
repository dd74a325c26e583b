#include "attrition/oracle.hpp"

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <doctest.h>

#include "helpers.hpp"

using namespace attrition;
using attrition::testing::rat;

namespace {

std::vector<Rat> point(std::size_t id, std::size_t m = 2) {
    std::vector<Rat> d(m, Rat(0));
    d[id] = 1;
    return d;
}

std::vector<Rat> uniform(std::size_t m = 2) { return std::vector<Rat>(m, ratio(1, m)); }

RoundStrategy shirk_say(std::size_t id) {
    return RoundStrategy(Rat(0), point(id), point(0), point(0));
}

RoundStrategy work_say(std::size_t id) {
    return RoundStrategy(Rat(1), point(0), point(id), point(id));
}

// Two agents, two messages, a guaranteed pair of signals nobody can profit
// from finding: both are paid 4 when their messages agree and 0 otherwise,
// so the message tuple alone settles everything.
FiniteGame coordination_game(const Rat& c = Rat(1)) {
    const std::vector<Rat> agree{rat("4"), rat("0"), rat("0"), rat("4")};
    return FiniteGame(2, 2, SupplySpec::pmf({rat("0"), rat("0"), rat("1")}), rat("1"), c,
                      rat("10"), rat("10"), {PayTable(2, 2, agree), PayTable(2, 2, agree)});
}

OracleProfile matching_profile(const std::vector<Rat>& opener) {
    OracleProfile p(2, 2);
    p.at(0, {}) = RoundStrategy(Rat(0), opener, point(0), point(0));
    p.at(1, {0}) = shirk_say(0);
    p.at(1, {1}) = shirk_say(1);
    return p;
}

}  // namespace

TEST_CASE("pay tables address tuples with round one most significant") {
    const PayTable t(2, 2, {rat("1"), rat("2"), rat("3"), rat("4")});
    CHECK(t.value({0, 0}) == 1);
    CHECK(t.value({0, 1}) == 2);
    CHECK(t.value({1, 0}) == 3);
    CHECK(t.value({1, 1}) == 4);
    CHECK(t.flat().size() == 4);

    CHECK_THROWS_AS(PayTable(0, 2, {}), std::invalid_argument);
    CHECK_THROWS_AS(PayTable(1, 1, {rat("0")}), std::invalid_argument);
    CHECK_THROWS_AS(PayTable(2, 2, {rat("0"), rat("1")}), std::invalid_argument);
    CHECK_THROWS_AS(t.value({0}), std::invalid_argument);
    CHECK_THROWS_AS(t.value({0, 2}), std::invalid_argument);
}

TEST_CASE("finite game validation") {
    const auto supply = SupplySpec::pmf({rat("0"), rat("1")});
    const PayTable t1(1, 2, {rat("0"), rat("0")});
    CHECK_THROWS_AS(FiniteGame(5, 2, supply, rat("1"), rat("1"), rat("1"), rat("1"), {}),
                    std::invalid_argument);
    CHECK_THROWS_AS(FiniteGame(1, 5, supply, rat("1"), rat("1"), rat("1"), rat("1"), {t1}),
                    std::invalid_argument);
    CHECK_THROWS_AS(FiniteGame(1, 2, SupplySpec::unlimited(), rat("1"), rat("1"), rat("1"),
                               rat("1"), {t1}),
                    std::invalid_argument);
    const auto deep = SupplySpec::pmf(
        {rat("0"), rat("0"), rat("0"), rat("0"), rat("0"), rat("1")});
    CHECK_THROWS_AS(FiniteGame(1, 2, deep, rat("1"), rat("1"), rat("1"), rat("1"), {t1}),
                    std::invalid_argument);
    CHECK_THROWS_AS(FiniteGame(1, 2, supply, rat("0"), rat("1"), rat("1"), rat("1"), {t1}),
                    std::invalid_argument);
    CHECK_THROWS_AS(FiniteGame(1, 2, supply, rat("1"), rat("-1"), rat("1"), rat("1"), {t1}),
                    std::invalid_argument);
    CHECK_THROWS_AS(FiniteGame(1, 2, supply, rat("1"), rat("1"), rat("-1"), rat("1"), {t1}),
                    std::invalid_argument);
    CHECK_THROWS_AS(FiniteGame(1, 2, supply, rat("1"), rat("1"), rat("1"), rat("1"), {t1, t1}),
                    std::invalid_argument);
    const PayTable rich(1, 2, {rat("5"), rat("0")});
    CHECK_THROWS_AS(FiniteGame(1, 2, supply, rat("1"), rat("1"), rat("1"), rat("1"), {rich}),
                    std::invalid_argument);
    // c = 0 is a legal boundary case.
    const FiniteGame free(1, 2, supply, rat("1"), rat("0"), rat("1"), rat("1"), {t1});
    CHECK(free.c == 0);
}

TEST_CASE("profiles validate their addressing and classify purity") {
    OracleProfile p(2, 2);
    CHECK(p.horizon() == 2);
    CHECK(p.message_count() == 2);
    CHECK(p.pure());
    CHECK(!p.anywhere_working());
    CHECK_THROWS_AS(p.at(2, {}), std::invalid_argument);
    CHECK_THROWS_AS(p.at(1, {}), std::invalid_argument);
    CHECK_THROWS_AS(p.at(1, {2}), std::invalid_argument);

    p.at(0, {}) = RoundStrategy(Rat(0), uniform(), point(0), point(0));
    CHECK(!p.pure());
    p.at(0, {}) = work_say(0);
    CHECK(p.pure());
    CHECK(p.anywhere_working());
    // A working round with a mixed found report is mixed even though gamma
    // is an endpoint.
    p.at(0, {}) = RoundStrategy(Rat(1), point(0), uniform(), point(0));
    CHECK(!p.pure());

    CHECK(matching_profile(point(0)) == matching_profile(point(0)));
    CHECK(!(matching_profile(point(0)) == matching_profile(point(1))));
}

TEST_CASE("expected payoffs by hand, one and two agents") {
    SUBCASE("single agent, certain discovery") {
        const auto supply = SupplySpec::pmf({rat("0"), rat("1")});
        const FiniteGame game(1, 2, supply, rat("1"), rat("1"), rat("10"), rat("10"),
                              {PayTable(1, 2, {rat("2"), rat("-2")})});
        OracleProfile p(1, 2);
        p.at(0, {}) = shirk_say(0);
        CHECK(expected_payoff(game, p, 0) == 2);
        p.at(0, {}) = shirk_say(1);
        CHECK(expected_payoff(game, p, 0) == -2);
        p.at(0, {}) = work_say(0);  // the table ignores the find; the cost stays
        CHECK(expected_payoff(game, p, 0) == 1);
        CHECK_THROWS_AS(expected_payoff(game, p, 1), std::invalid_argument);
    }

    SUBCASE("single agent, coin-flip discovery routes the report branches") {
        const auto supply = SupplySpec::pmf({rat("1/2"), rat("1/2")});
        const FiniteGame game(1, 2, supply, rat("1/2"), rat("1"), rat("10"), rat("10"),
                              {PayTable(1, 2, {rat("2"), rat("-2")})});
        OracleProfile p(1, 2);
        // Work: find with probability lambda * f1 = 1/4, then say 0; the
        // empty branch says 1. Payoff = 1/4*2 + 3/4*(-2) - 1 = -2.
        p.at(0, {}) = RoundStrategy(Rat(1), point(0), point(0), point(1));
        CHECK(expected_payoff(game, p, 0) == -2);
    }

    SUBCASE("two agents read the joint message tuple") {
        const auto game = coordination_game();
        auto p = matching_profile(point(0));
        CHECK(expected_payoff(game, p, 0) == 4);
        CHECK(expected_payoff(game, p, 1) == 4);
        p.at(1, {0}) = shirk_say(1);  // mismatch on path
        CHECK(expected_payoff(game, p, 0) == 0);
        CHECK(expected_payoff(game, p, 1) == 0);
        const auto mixed = matching_profile(uniform());
        CHECK(expected_payoff(game, mixed, 0) == 4);
        CHECK(expected_payoff(game, mixed, 1) == 4);
    }
}

TEST_CASE("shifting one agent's table shifts nothing but their level") {
    const auto game = coordination_game();
    std::vector<Rat> shifted = game.tables[0].flat();
    for (Rat& v : shifted) v += 3;
    const FiniteGame moved(2, 2, game.supply, game.lambda, game.c, game.reward_cap,
                           game.punish_cap, {PayTable(2, 2, shifted), game.tables[1]});

    for (const auto& opener : {point(0), point(1), uniform()}) {
        const auto p = matching_profile(opener);
        CHECK(expected_payoff(moved, p, 0) == expected_payoff(game, p, 0) + 3);
        CHECK(expected_payoff(moved, p, 1) == expected_payoff(game, p, 1));
        const auto a = check_equilibrium(game, p, kMixedTolerance);
        const auto b = check_equilibrium(moved, p, kMixedTolerance);
        CHECK(a.is_equilibrium == b.is_equilibrium);
        CHECK(a.worst_gap == b.worst_gap);
    }
    const auto doma = dominance_scan(game);
    const auto domb = dominance_scan(moved);
    CHECK(doma.min_margin == domb.min_margin);
}

TEST_CASE("work buys nothing against message-only tables") {
    SUBCASE("positive effort cost certifies unraveling with margin c") {
        const auto game = coordination_game();
        const auto dom = dominance_scan(game);
        CHECK(dom.certified);
        CHECK(dom.min_margin == 1);
        REQUIRE(dom.agent_margin.size() == 2);
        CHECK(dom.agent_margin[0] == 1);
        CHECK(dom.agent_margin[1] == 1);

        const auto costly = coordination_game(rat("3/2"));
        CHECK(dominance_scan(costly).min_margin == rat("3/2"));
    }

    SUBCASE("free effort breaks the certificate") {
        const auto dom = dominance_scan(coordination_game(rat("0")));
        CHECK(!dom.certified);
        CHECK(dom.min_margin == 0);
    }

    SUBCASE("three rounds keep the margin") {
        const std::vector<Rat> flat(8, rat("1"));
        const FiniteGame game(3, 2, SupplySpec::pmf({rat("0"), rat("0"), rat("1")}), rat("1"),
                              rat("1"), rat("10"), rat("10"),
                              {PayTable(3, 2, flat), PayTable(3, 2, flat), PayTable(3, 2, flat)});
        const auto dom = dominance_scan(game);
        CHECK(dom.certified);
        CHECK(dom.min_margin == 1);
    }
}

TEST_CASE("one-shot deviation audit on the coordination game") {
    const auto game = coordination_game();

    SUBCASE("coordinated reports are an equilibrium") {
        const auto check = check_equilibrium(game, matching_profile(point(0)), Rat(0));
        CHECK(check.is_equilibrium);
        CHECK(check.worst_gap == 0);
        CHECK(!check.informative);
        // Agent 1's history after an opener of 1 is unreached, so a
        // supporting off-path convention is reported.
        REQUIRE(check.supporting.has_value());
        CHECK(check.supporting->describe() == "prior-carry-forward");
    }

    SUBCASE("an indifferent mixed opener passes at the mixed tolerance") {
        const auto check = check_equilibrium(game, matching_profile(uniform()), kMixedTolerance);
        CHECK(check.is_equilibrium);
        CHECK(check.worst_gap == 0);
        CHECK(!check.supporting.has_value());  // both histories are on path
    }

    SUBCASE("a miscoordinated unreached branch is still audited") {
        auto p = matching_profile(point(0));
        p.at(1, {1}) = shirk_say(0);  // would mismatch if it ever fired
        const auto check = check_equilibrium(game, p, Rat(0));
        CHECK(!check.is_equilibrium);
        CHECK(check.worst_gap == 4);
        REQUIRE(!check.failures.empty());
        bool mentions_unreached = false;
        for (const auto& line : check.failures)
            if (line.find("unreached") != std::string::npos) mentions_unreached = true;
        CHECK(mentions_unreached);
    }

    SUBCASE("working is a strict one-shot loss") {
        auto p = matching_profile(point(0));
        p.at(0, {}) = work_say(0);
        const auto check = check_equilibrium(game, p, Rat(0));
        CHECK(!check.is_equilibrium);
        CHECK(check.worst_gap == 1);  // exactly the wasted effort cost
    }
}

TEST_CASE("off-path conventions cover the prior and every supported count") {
    const auto game = coordination_game();
    const auto family = off_path_family(game);
    REQUIRE(family.size() == 3);
    CHECK(family[0].describe() == "prior-carry-forward");
    CHECK(family[1].describe() == "point-mass-0");
    CHECK(family[2].describe() == "point-mass-2");

    const FiniteGame spread(1, 2, SupplySpec::pmf({rat("1/4"), rat("1/4"), rat("1/4"), rat("1/4")}),
                            rat("1"), rat("1"), rat("1"), rat("1"),
                            {PayTable(1, 2, {rat("0"), rat("0")})});
    const auto wide = off_path_family(spread);
    REQUIRE(wide.size() == 5);
    CHECK(wide[1].atom == 0);
    CHECK(wide[4].atom == 3);
}

TEST_CASE("exhaustive enumeration of the coordination game") {
    const auto game = coordination_game();
    const auto result = enumerate_equilibria(game, rat("1/4"));

    // One strategy slot per agent-history; with c = 1 every working candidate
    // is filtered, leaving the five quarter-grid report distributions per
    // slot: 5^3 profiles.
    CHECK(result.profiles_checked == 125);
    CHECK(!result.any_informative);
    // Matching is strictly optimal for agent 1 at both histories; agent 0 is
    // then indifferent, so exactly the five openers survive.
    REQUIRE(result.certificates.size() == 5);
    for (const auto& cert : result.certificates) {
        CHECK(cert.gap == 0);
        CHECK(!cert.informative);
        CHECK(!cert.profile.anywhere_working());
        CHECK(cert.profile.at(1, {0}).shirk_report == point(0));
        CHECK(cert.profile.at(1, {1}).shirk_report == point(1));
        // Independent re-audit of the stored witness.
        const auto again =
            check_equilibrium(game, cert.profile, cert.profile.pure() ? Rat(0) : kMixedTolerance);
        CHECK(again.is_equilibrium);
    }
}

TEST_CASE("free effort admits informative equilibria, and the scan knows it") {
    const auto supply = SupplySpec::pmf({rat("0"), rat("1")});
    const FiniteGame game(1, 2, supply, rat("1"), rat("0"), rat("1"), rat("1"),
                          {PayTable(1, 2, {rat("1"), rat("0")})});
    const auto result = enumerate_equilibria(game, rat("1/2"));
    CHECK(result.any_informative);
    CHECK(!dominance_scan(game).certified);
    bool saw_full_work = false;
    for (const auto& cert : result.certificates) {
        if (cert.informative) CHECK(cert.profile.anywhere_working());
        if (cert.profile.at(0, {}).gamma == 1) saw_full_work = true;
    }
    CHECK(saw_full_work);

    // The unraveling gate pairs the two facts: a certified scan with an
    // informative certificate would be a contradiction, here and everywhere.
    const auto costly = coordination_game();
    const auto enumerated = enumerate_equilibria(costly, rat("1/4"));
    CHECK(!(dominance_scan(costly).certified && enumerated.any_informative));
    CHECK(!(dominance_scan(game).certified && result.any_informative));
}

TEST_CASE("enumeration guards its tractability limits") {
    const auto supply = SupplySpec::pmf({rat("0"), rat("1")});
    const PayTable t1(1, 2, {rat("0"), rat("0")});
    const FiniteGame small(1, 2, supply, rat("1"), rat("1"), rat("1"), rat("1"), {t1});
    CHECK_THROWS_AS(enumerate_equilibria(small, rat("1/16")), std::invalid_argument);
    CHECK_THROWS_AS(enumerate_equilibria(small, rat("2/3")), std::invalid_argument);
    CHECK_THROWS_AS(enumerate_equilibria(small, rat("0")), std::invalid_argument);

    const std::vector<Rat> zeros16(16, rat("0"));
    const FiniteGame deep(4, 2, supply, rat("1"), rat("1"), rat("1"), rat("1"),
                          {PayTable(4, 2, zeros16), PayTable(4, 2, zeros16),
                           PayTable(4, 2, zeros16), PayTable(4, 2, zeros16)});
    CHECK_THROWS_AS(enumerate_equilibria(deep, rat("1/2")), std::invalid_argument);

    // Within the shape limits but over the profile cap.
    const std::vector<Rat> zeros27(27, rat("0"));
    const FiniteGame wide(3, 3, supply, rat("1"), rat("1"), rat("1"), rat("1"),
                          {PayTable(3, 3, zeros27), PayTable(3, 3, zeros27),
                           PayTable(3, 3, zeros27)});
    CHECK_THROWS_AS(enumerate_equilibria(wide, rat("1/2")), std::invalid_argument);
}

TEST_CASE("structural bounds hold along reached histories") {
    SUBCASE("idle profiles sit exactly on the supermartingale") {
        const auto game = coordination_game();
        const auto report = bound_checks(game, matching_profile(point(0)));
        CHECK(report.all_hold);
        REQUIRE(report.entries.size() == 2);  // root and the reached reply
        for (const auto& e : report.entries) {
            CHECK(e.supermartingale_ok);
            CHECK(e.supermartingale_slack == 0);
            CHECK(!e.empty_value_slack.has_value());  // skipped at lambda = 1
            CHECK(e.discovery_ok);
        }
    }

    SUBCASE("a working round consumes survival strictly") {
        const auto supply = SupplySpec::pmf({rat("0"), rat("1")});
        const FiniteGame game(1, 2, supply, rat("1"), rat("0"), rat("1"), rat("1"),
                              {PayTable(1, 2, {rat("1"), rat("0")})});
        OracleProfile p(1, 2);
        p.at(0, {}) = work_say(0);
        const auto report = bound_checks(game, p);
        CHECK(report.all_hold);
        REQUIRE(report.entries.size() == 1);
        CHECK(report.entries[0].supermartingale_ok);
        CHECK(report.entries[0].supermartingale_slack == 1);  // f(1): 1 -> 0
        CHECK(!report.entries[0].discovery_slack.has_value());  // skipped at c = 0
    }

    SUBCASE("the empty-find allowance appears below certain discovery") {
        const auto supply = SupplySpec::pmf({rat("1/2"), rat("1/2")});
        const FiniteGame game(1, 2, supply, rat("1/2"), rat("1"), rat("10"), rat("10"),
                              {PayTable(1, 2, {rat("2"), rat("-2")})});
        OracleProfile p(1, 2);
        p.at(0, {}) = RoundStrategy(Rat(0), uniform(), point(0), point(0));
        const auto report = bound_checks(game, p);
        CHECK(report.all_hold);
        REQUIRE(report.entries.size() == 1);
        REQUIRE(report.entries[0].empty_value_slack.has_value());
        CHECK(report.entries[0].empty_value_ok);
        CHECK(*report.entries[0].empty_value_slack >= 20);
    }
}
