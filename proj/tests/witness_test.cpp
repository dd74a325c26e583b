#include "attrition/witness.hpp"

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include <doctest.h>

#include "attrition/thresholds.hpp"
#include "helpers.hpp"

using namespace attrition;
using attrition::testing::rat;

namespace {

// Two messages, wide flat shocks, small informative stakes. The shock width
// dominates the value gaps, so informative rounds are rare.
WitnessSpec quiet_spec() {
    return WitnessSpec({ShockDensity::uniform(rat("10")), ShockDensity::uniform(rat("10"))},
                       {{rat("1"), rat("0")}, {rat("0"), rat("1")}}, {rat("1/2"), rat("1/2")},
                       rat("1"), rat("1/2"));
}

}  // namespace

TEST_CASE("shock densities: shapes, bounds, and validation") {
    SUBCASE("uniform") {
        const auto d = ShockDensity::uniform(rat("2"));
        CHECK(d.kind() == ShockDensity::Kind::Uniform);
        CHECK(d.lo() == 0);
        CHECK(d.hi() == 2);
        CHECK(d.fbar() == rat("1/2"));
        CHECK(d.density(rat("1")) == rat("1/2"));
        CHECK(d.density(rat("0")) == rat("1/2"));
        CHECK(d.density(rat("2")) == rat("1/2"));
        CHECK(d.density(rat("-1")) == 0);
        CHECK(d.density(rat("3")) == 0);
        CHECK_THROWS_AS(ShockDensity::uniform(rat("0")), std::invalid_argument);
        CHECK_THROWS_AS(ShockDensity::uniform(rat("-1")), std::invalid_argument);
    }

    SUBCASE("triangle peaks at two over the width") {
        const auto d = ShockDensity::triangular(rat("2"));
        CHECK(d.kind() == ShockDensity::Kind::PiecewiseLinear);
        CHECK(d.fbar() == 1);
        CHECK(d.density(rat("1")) == 1);
        CHECK(d.density(rat("1/2")) == rat("1/2"));
        CHECK(d.density(rat("3/2")) == rat("1/2"));
        CHECK(d.density(rat("0")) == 0);
        CHECK(d.density(rat("2")) == 0);
    }

    SUBCASE("piecewise interpolation stays rational") {
        const auto wedge = ShockDensity::piecewise_linear({rat("0"), rat("3")},
                                                          {rat("2/3"), rat("0")});
        CHECK(wedge.fbar() == rat("2/3"));
        CHECK(wedge.density(rat("3/2")) == rat("1/3"));
        CHECK(wedge.density(rat("1")) == rat("4/9"));
    }

    SUBCASE("piecewise validation") {
        using SD = ShockDensity;
        CHECK_THROWS_AS(SD::piecewise_linear({rat("0")}, {rat("1")}), std::invalid_argument);
        CHECK_THROWS_AS(SD::piecewise_linear({rat("0"), rat("1")}, {rat("1")}),
                        std::invalid_argument);
        CHECK_THROWS_AS(SD::piecewise_linear({rat("1"), rat("1")}, {rat("1"), rat("1")}),
                        std::invalid_argument);
        CHECK_THROWS_AS(SD::piecewise_linear({rat("0"), rat("1")}, {rat("-1"), rat("3")}),
                        std::invalid_argument);
        // trapezoid area 3/2, not a density
        CHECK_THROWS_AS(SD::piecewise_linear({rat("0"), rat("1")}, {rat("2"), rat("1")}),
                        std::invalid_argument);
    }
}

TEST_CASE("shock sampling is exact, in range, and deterministic per stream") {
    const auto tri = ShockDensity::triangular(rat("2"));
    Stream a(99, 3);
    Stream b(99, 3);
    for (int i = 0; i < 5; ++i) {
        const Rat x = tri.sample(a);
        CHECK(x == tri.sample(b));  // same substream, same rejection path
        CHECK(x >= 0);
        CHECK(x <= 2);
    }

    SUBCASE("uniform sample mean") {
        const auto d = ShockDensity::uniform(rat("2"));
        Stream s(2024, 11);
        double sum = 0;
        const int n = 20000;
        for (int i = 0; i < n; ++i) {
            const Rat x = d.sample(s);
            CHECK(x >= 0);
            CHECK(x < 2);
            sum += x.get_d();
        }
        // mean 1, sd of the mean (2/sqrt(12))/sqrt(n); allow four sigma
        CHECK(std::abs(sum / n - 1.0) < 0.0164);
    }

    SUBCASE("triangular sample mean") {
        Stream s(7, 5);
        double sum = 0;
        const int n = 20000;
        for (int i = 0; i < n; ++i) sum += tri.sample(s).get_d();
        // mean 1, variance width^2/24 = 1/6
        CHECK(std::abs(sum / n - 1.0) < 0.0116);
    }
}

TEST_CASE("witness spec validates its tables") {
    const auto u = ShockDensity::uniform(rat("1"));
    const std::vector<std::vector<Rat>> iv{{rat("1"), rat("0")}, {rat("0"), rat("1")}};
    const std::vector<Rat> base{rat("1/2"), rat("1/2")};

    const WitnessSpec ok({u, u}, iv, base, rat("1"), rat("1/2"));
    CHECK(ok.message_count() == 2);
    CHECK(ok.fbar() == 1);

    CHECK_THROWS_AS(WitnessSpec({u}, {{rat("0"), rat("0")}}, {rat("0")}, rat("1"), rat("0")),
                    std::invalid_argument);
    CHECK_THROWS_AS(WitnessSpec({u, u}, {iv[0]}, base, rat("1"), rat("0")),
                    std::invalid_argument);
    CHECK_THROWS_AS(WitnessSpec({u, u}, {{rat("1")}, iv[1]}, base, rat("1"), rat("0")),
                    std::invalid_argument);
    CHECK_THROWS_AS(WitnessSpec({u, u}, {{rat("2"), rat("0")}, iv[1]}, base, rat("1"), rat("0")),
                    std::invalid_argument);
    CHECK_THROWS_AS(WitnessSpec({u, u}, iv, {rat("1/2"), rat("3/2")}, rat("1"), rat("0")),
                    std::invalid_argument);
    CHECK_THROWS_AS(WitnessSpec({u, u}, iv, base, rat("0"), rat("0")), std::invalid_argument);
    CHECK_THROWS_AS(WitnessSpec({u, u}, iv, base, rat("1"), rat("2")), std::invalid_argument);
    CHECK_THROWS_AS(WitnessSpec({u, u}, iv, base, rat("1"), rat("-1/2")), std::invalid_argument);

    // the bound takes the widest density across messages
    const WitnessSpec mixed_widths({ShockDensity::uniform(rat("2")),
                                    ShockDensity::triangular(rat("1"))},
                                   iv, base, rat("1"), rat("0"));
    CHECK(mixed_widths.fbar() == 2);
}

TEST_CASE("conditional survival after confirmed discoveries") {
    SUBCASE("bounded pmf") {
        const auto spec = SupplySpec::pmf({rat("1/4"), rat("1/4"), rat("1/2")});
        CHECK(hat_survival(spec, 0, 1) == spec.survival(1));
        CHECK(hat_survival(spec, 0, 2) == rat("1/2"));
        CHECK(hat_survival(spec, 1, 1) == rat("2/3"));
        CHECK(hat_survival(spec, 1, 2) == 0);
        CHECK(hat_survival(spec, 2, 1) == 0);
        CHECK(hat_survival(spec, 2, 0) == 1);
        CHECK_THROWS_AS(hat_survival(spec, 3, 1), std::invalid_argument);
    }

    SUBCASE("geometric tails forget the count") {
        const auto spec = SupplySpec::geometric(rat("1/2"), rat("1/2"));
        CHECK(hat_survival(spec, 0, 1) == rat("1/2"));
        CHECK(hat_survival(spec, 1, 1) == rat("1/2"));
        CHECK(hat_survival(spec, 3, 2) == rat("1/4"));
        CHECK(hat_survival(spec, 7, 3) == rat("1/8"));

        const auto table = hat_survival_table(spec, 2, 3);
        CHECK(table.consumed == 2);
        REQUIRE(table.values.size() == 3);
        CHECK(table.values[0] == rat("1/2"));
        CHECK(table.values[1] == rat("1/4"));
        CHECK(table.values[2] == rat("1/8"));
    }

    SUBCASE("unlimited supply never gets more pessimistic") {
        const auto spec = SupplySpec::unlimited();
        CHECK(hat_survival(spec, 0, 5) == 1);
        CHECK(hat_survival(spec, 9, 4) == 1);
    }
}

TEST_CASE("hazard monotonicity probe") {
    SUBCASE("an increasing hazard passes both parts") {
        const auto spec = SupplySpec::pmf({rat("1/3"), rat("1/3"), rat("1/3")});
        const auto report = ihr_monotonicity_check(spec);
        CHECK(report.monotone_in_discoveries);
        CHECK(report.mixture_bound_holds);
        CHECK(!report.first_violation.has_value());
    }

    SUBCASE("a gap in the support flips the conditional ordering") {
        // Hazard drops to zero at two known signals, then spikes: after two
        // confirmed finds the third is certain, after one it is unlikely.
        const auto spec = SupplySpec::pmf({rat("0"), rat("3/4"), rat("0"), rat("1/4")});
        CHECK(hat_survival(spec, 2, 1) == 1);
        CHECK(hat_survival(spec, 1, 1) == rat("1/4"));
        const auto report = ihr_monotonicity_check(spec);
        CHECK(!report.monotone_in_discoveries);
        CHECK(!report.mixture_bound_holds);
        REQUIRE(report.first_violation.has_value());
        CHECK(report.first_violation->first == 1);
        CHECK(report.first_violation->second == 1);
    }

    SUBCASE("geometric supplies split on the first-step mass") {
        const auto ok = ihr_monotonicity_check(SupplySpec::geometric(rat("1/2"), rat("1/4")), 6);
        CHECK(ok.monotone_in_discoveries);
        CHECK(ok.mixture_bound_holds);

        const auto bad = ihr_monotonicity_check(SupplySpec::geometric(rat("1/4"), rat("1/2")), 6);
        CHECK(!bad.monotone_in_discoveries);
        REQUIRE(bad.first_violation.has_value());
        CHECK(bad.first_violation->first == 0);
        CHECK(bad.first_violation->second == 1);
    }

    SUBCASE("degenerate probes") {
        CHECK(ihr_monotonicity_check(SupplySpec::unlimited(), 5).monotone_in_discoveries);
        const auto empty = ihr_monotonicity_check(SupplySpec::pmf({rat("1/3"), rat("2/3")}), 0);
        CHECK(empty.monotone_in_discoveries);
        CHECK(empty.mixture_bound_holds);
    }
}

TEST_CASE("pairwise collision bound") {
    CHECK(order_stat_bound(2, rat("1"), rat("1/10")) == rat("1/5"));
    CHECK(order_stat_bound(3, rat("1/2"), rat("1/5")) == rat("3/5"));
    CHECK_THROWS_AS(order_stat_bound(1, rat("1"), rat("1")), std::invalid_argument);
    CHECK_THROWS_AS(order_stat_bound(2, rat("0"), rat("1")), std::invalid_argument);
    CHECK_THROWS_AS(order_stat_bound(2, rat("1"), rat("-1")), std::invalid_argument);

    // For two standard uniform draws the collision probability is exactly
    // 2*eps - eps^2, strictly inside the bound.
    const Rat exact = rat("19/100");
    CHECK(exact == 2 * rat("1/10") - rat("1/10") * rat("1/10"));
    CHECK(exact < order_stat_bound(2, rat("1"), rat("1/10")));

    SUBCASE("simulated collisions agree with the closed form") {
        const auto d = ShockDensity::uniform(rat("1"));
        Stream s(5150, 0);
        const int n = 20000;
        int hits = 0;
        for (int i = 0; i < n; ++i) {
            const Rat x = d.sample(s);
            const Rat y = d.sample(s);
            const Rat gap = x > y ? x - y : y - x;
            if (gap <= rat("1/10")) ++hits;
        }
        const double phat = static_cast<double>(hits) / n;
        CHECK(std::abs(phat - 0.19) < 0.0111);  // four sigma
    }
}

TEST_CASE("contraction coefficient") {
    CHECK(contraction_coefficient(rat("1/2"), 2, rat("1"), rat("1")) == 16);
    CHECK(contraction_coefficient(rat("0"), 2, rat("1"), rat("5")) == 0);
    CHECK(contraction_coefficient(rat("1/4"), 2, rat("1"), rat("1")) <
          contraction_coefficient(rat("1/2"), 2, rat("1"), rat("1")));
    CHECK_THROWS_AS(contraction_coefficient(rat("-1/10"), 2, rat("1"), rat("1")),
                    std::invalid_argument);
    CHECK_THROWS_AS(contraction_coefficient(rat("1"), 2, rat("1"), rat("1")),
                    std::invalid_argument);
    CHECK_THROWS_AS(contraction_coefficient(rat("1/2"), 1, rat("1"), rat("1")),
                    std::invalid_argument);

    // The solver's root is exactly where the coefficient crosses one.
    const Rat f = witness_threshold(2, rat("1"), rat("10"));
    const Rat coeff = contraction_coefficient(f, 2, rat("1"), rat("10"));
    CHECK(std::abs(coeff.get_d() - 1.0) < 1e-11);
}

TEST_CASE("informative-event union bound") {
    const auto spec = quiet_spec();
    CHECK(informative_event_bound(spec, {rat("1/10"), rat("1/10")}) == rat("1/25"));
    CHECK(informative_event_bound(spec, {rat("0"), rat("0")}) == 0);
    CHECK_THROWS_AS(informative_event_bound(spec, {rat("1/10")}), std::invalid_argument);

    // Three messages: every unordered pair contributes, so each z shows up
    // twice: 2*fbar*R*2*(z0+z1+z2).
    const auto u = ShockDensity::uniform(rat("10"));
    const WitnessSpec three({u, u, u},
                            {{rat("1"), rat("0")}, {rat("0"), rat("1")}, {rat("1/2"), rat("1/2")}},
                            {rat("1/2"), rat("1/2"), rat("1/2")}, rat("1"), rat("0"));
    const std::vector<Rat> z{rat("1/8"), rat("1/4"), rat("1/2")};
    CHECK(informative_event_bound(three, z) == 4 * rat("1/10") * (z[0] + z[1] + z[2]));
}

TEST_CASE("witness rounds") {
    const auto spec = quiet_spec();
    const auto belief = SurvivalBelief::from_supply(SupplySpec::unlimited());
    const std::vector<Rat> z{rat("1/10"), rat("1/10")};

    SUBCASE("validation") {
        Stream s(1, 0);
        const auto spent = SurvivalBelief::from_supply(SupplySpec::pmf({rat("1")}));
        CHECK_THROWS_AS(witness_round(spec, spent, z, State::H, s), std::invalid_argument);
        CHECK_THROWS_AS(witness_round(spec, belief, {rat("1/10")}, State::H, s),
                        std::invalid_argument);
        CHECK_THROWS_AS(witness_round(spec, belief, {rat("1/10"), rat("3/2")}, State::H, s),
                        std::invalid_argument);
    }

    SUBCASE("the reported message is the argmax for the realized signal") {
        Stream s(314, 2);
        for (int i = 0; i < 200; ++i) {
            const State sig = (i % 2 == 0) ? State::H : State::L;
            const auto res = witness_round(spec, belief, z, sig, s);
            REQUIRE(res.shocks.size() == 2);
            CHECK(res.message == (sig == State::H ? res.best_on_high : res.best_on_low));
            CHECK(res.informative == (res.best_on_high != res.best_on_low));

            // Recompute both argmaxes from the recorded shocks, ties toward
            // the lower message id.
            for (std::size_t sidx = 0; sidx < 2; ++sidx) {
                std::size_t arg = 0;
                Rat bestv;
                for (std::size_t m = 0; m < 2; ++m) {
                    const Rat u = z[m] * spec.informative_value[m][sidx] +
                                  (1 - z[m]) * spec.baseline_value[m] + res.shocks[m];
                    if (m == 0 || u > bestv) {
                        bestv = u;
                        arg = m;
                    }
                }
                CHECK(arg == (sidx == 0 ? res.best_on_high : res.best_on_low));
            }
        }
    }

    SUBCASE("zero continuation weight blinds the witness") {
        Stream s(11, 4);
        for (int i = 0; i < 50; ++i) {
            const auto res =
                witness_round(spec, belief, {rat("0"), rat("0")}, State::L, s);
            CHECK(!res.informative);
            CHECK(res.best_on_high == res.best_on_low);
        }
    }

    SUBCASE("informative frequency stays under the union bound") {
        // With flat shocks on [0,10] and stakes of 1/10 the exact informative
        // probability is 199/10000; the bound gives 1/25.
        Stream s(777, 1);
        const int n = 20000;
        int informative = 0;
        for (int i = 0; i < n; ++i)
            if (witness_round(spec, belief, z, State::H, s).informative) ++informative;
        const double phat = static_cast<double>(informative) / n;
        CHECK(std::abs(phat - 0.0199) < 0.004);  // four sigma
        CHECK(ratio(informative, n) < informative_event_bound(spec, z));
    }
}
