#include "attrition/sim.hpp"

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>

#include <doctest.h>

#include "helpers.hpp"

using namespace attrition;
using attrition::testing::bench_grid;
using attrition::testing::rat;

namespace {

SimConfig bench_config(SupplySpec supply) {
    const auto grid = bench_grid();
    const auto ep = exit_probabilities(grid);
    return SimConfig{GameParams(rat("10"), rat("4"), rat("1"), rat("1")), std::move(supply),
                     SignalModel(rat("1/2"), rat("3/4")), design_scheme(grid, ep, rat("4"))};
}

void check_equal(const EpisodeStats& a, const EpisodeStats& b) {
    CHECK(a.episodes == b.episodes);
    CHECK(a.exit_top == b.exit_top);
    CHECK(a.exit_bottom == b.exit_bottom);
    CHECK(a.stopped == b.stopped);
    CHECK(a.truncated == b.truncated);
    CHECK(a.total_rounds == b.total_rounds);
    CHECK(a.total_discoveries == b.total_discoveries);
    CHECK(a.omega_high == b.omega_high);
    CHECK(a.total_net == b.total_net);
    REQUIRE(a.per_point.size() == b.per_point.size());
    for (std::size_t i = 0; i < a.per_point.size(); ++i) {
        CHECK(a.per_point[i].visits == b.per_point[i].visits);
        CHECK(a.per_point[i].worked == b.per_point[i].worked);
        CHECK(a.per_point[i].discoveries == b.per_point[i].discoveries);
        CHECK(a.per_point[i].net_sum == b.per_point[i].net_sum);
        CHECK(a.per_point[i].drift_sum == b.per_point[i].drift_sum);
    }
}

}  // namespace

TEST_CASE("episodes replay identically from the same seed") {
    const auto cfg = bench_config(SupplySpec::unlimited());
    for (std::uint64_t e = 0; e < 8; ++e) {
        const auto a = run_episode(cfg, 123, e);
        const auto b = run_episode(cfg, 123, e);
        REQUIRE(a.rows.size() == b.rows.size());
        CHECK(a.terminal == b.terminal);
        CHECK(a.omega == b.omega);
        for (std::size_t i = 0; i < a.rows.size(); ++i) {
            CHECK(a.rows[i].point_index == b.rows[i].point_index);
            CHECK(a.rows[i].message == b.rows[i].message);
            CHECK(a.rows[i].payment == b.rows[i].payment);
            CHECK(a.rows[i].f1 == b.rows[i].f1);
        }
    }
}

TEST_CASE("aggregation is identical for any job count") {
    const auto cfg = bench_config(SupplySpec::geometric(rat("9/10"), rat("4/5")));
    const auto one = monte_carlo(cfg, 400, 77, 1);
    const auto four = monte_carlo(cfg, 400, 77, 4);
    const auto nine = monte_carlo(cfg, 400, 77, 9);
    check_equal(one, four);
    check_equal(one, nine);
    CHECK(one.episodes == 400);
    CHECK(one.exit_top + one.exit_bottom + one.stopped + one.truncated == 400);
}

TEST_CASE("payments settle from the terminal outcome") {
    const auto cfg = bench_config(SupplySpec::unlimited());
    for (std::uint64_t e = 0; e < 200; ++e) {
        const auto t = run_episode(cfg, 5, e);
        // Unlimited supply and certain discovery: every round reports.
        REQUIRE((t.terminal == Terminal::ExitTop || t.terminal == Terminal::ExitBottom));
        Rat total = 0;
        for (const auto& row : t.rows) {
            CHECK(row.worked);
            REQUIRE(row.discovery.has_value());
            if (row.message == SimMessage::High) {
                if (t.terminal == Terminal::ExitTop)
                    CHECK(row.payment == cfg.scheme.reward_h[row.point_index]);
                else
                    CHECK(row.payment == -cfg.scheme.punishment);
            } else if (row.message == SimMessage::Low) {
                if (t.terminal == Terminal::ExitBottom)
                    CHECK(row.payment == cfg.scheme.reward_l[row.point_index]);
                else
                    CHECK(row.payment == -cfg.scheme.punishment);
            }
            total += row.payment;
        }
        CHECK(t.total_payments() == total);
        CHECK(t.total_net(cfg.params.c) ==
              total - Rat(static_cast<unsigned long>(t.rows.size())));
    }
}

TEST_CASE("silent halts settle to zero payments") {
    // Two signals exist for sure; with certain discovery the third worked
    // round comes up empty, the walk halts, and nobody is paid unless the
    // walk exited first.
    const auto cfg = bench_config(SupplySpec::pmf({rat("0"), rat("0"), rat("1")}));
    bool saw_stop = false, saw_exit = false;
    for (std::uint64_t e = 0; e < 64; ++e) {
        const auto t = run_episode(cfg, 31, e);
        CHECK(t.rows.size() <= 3);
        if (t.terminal == Terminal::Stopped) {
            saw_stop = true;
            CHECK(t.rows.size() == 3);
            CHECK(t.rows.back().message == SimMessage::Silent);
            for (const auto& row : t.rows) CHECK(row.payment == 0);
            CHECK(t.total_net(cfg.params.c) == -3);
        } else {
            saw_exit = true;
            CHECK(t.rows.size() == 2);
        }
    }
    CHECK(saw_stop);
    CHECK(saw_exit);
}

TEST_CASE("shirkers who stay silent freeze the game") {
    SUBCASE("never-decaying tails keep silence on path to the horizon") {
        auto cfg = bench_config(SupplySpec::unlimited());
        cfg.profile = SimProfile::all_shirk();
        cfg.horizon_cap = 50;
        const auto t = run_episode(cfg, 9, 0);
        CHECK(t.terminal == Terminal::Truncated);
        REQUIRE(t.rows.size() == 50);
        for (const auto& row : t.rows) {
            CHECK(!row.worked);
            CHECK(row.message == SimMessage::Silent);
            CHECK(row.point_index == cfg.scheme.grid.prior_index());
            CHECK(row.f1 == 1);  // the observer learns nothing from shirkers
            CHECK(row.payment == 0);
        }
        CHECK(t.total_net(cfg.params.c) == 0);
    }

    SUBCASE("decaying tails make silence terminal") {
        auto cfg = bench_config(SupplySpec::geometric(rat("1/2"), rat("1/2")));
        cfg.profile = SimProfile::all_shirk();
        const auto t = run_episode(cfg, 9, 0);
        CHECK(t.terminal == Terminal::Stopped);
        CHECK(t.rows.size() == 1);
    }
}

TEST_CASE("a chorus of high reports marches the walk off the top") {
    auto cfg = bench_config(SupplySpec::pmf({rat("0"), rat("0"), rat("1")}));
    cfg.profile = SimProfile::all_shirk(SimMessage::High);
    const auto t = run_episode(cfg, 4, 0);
    CHECK(t.terminal == Terminal::ExitTop);
    REQUIRE(t.rows.size() == 2);
    CHECK(t.rows[0].point_index == 2);
    CHECK(t.rows[1].point_index == 3);
    // Rewards at the visited points: 28/13 then 0 at the edge.
    CHECK(t.rows[0].payment == rat("28/13"));
    CHECK(t.rows[1].payment == 0);
    CHECK(t.total_payments() == rat("28/13"));
}

TEST_CASE("the observer belief snaps to the memoryless tail after one find") {
    // Geometric(1, 1/2) supply under certain discovery: the first signal is
    // guaranteed, and every confirmed find afterwards leaves the conditional
    // next-signal probability at the tail ratio 1/2 exactly.
    const auto cfg = bench_config(SupplySpec::geometric(rat("1"), rat("1/2")));
    for (std::uint64_t e = 0; e < 32; ++e) {
        const auto t = run_episode(cfg, 13, e);
        for (std::size_t i = 0; i < t.rows.size(); ++i) {
            CHECK(t.rows[i].f1 == (i == 0 ? Rat(1) : rat("1/2")));
            if (t.rows[i].message == SimMessage::Silent) CHECK(i + 1 == t.rows.size());
        }
    }
}

TEST_CASE("the public point drifts like a martingale under designed play") {
    const auto cfg = bench_config(SupplySpec::unlimited());
    const std::size_t episodes = 4000;
    const auto stats = monte_carlo(cfg, episodes, 2026, 4);
    CHECK(stats.episodes == episodes);
    CHECK(stats.truncated == 0);
    CHECK(stats.stopped == 0);

    // Exits split evenly: the prior sits in the middle of a symmetric ladder.
    const double n = static_cast<double>(episodes);
    const double share = to_double(stats.exit_top_share());
    CHECK(std::abs(share - 0.5) < 3 * std::sqrt(0.25 / n));

    // Per-point drift: each visit is a mean-zero step of at most the local
    // rung gap, so three sigma of the visit count bounds the running sum.
    for (std::size_t k = 1; k <= 3; ++k) {
        const auto& ps = stats.per_point[k];
        REQUIRE(ps.visits > 100);
        CHECK(ps.worked == ps.visits);
        CHECK(ps.discoveries == ps.visits);
        const double gap = to_double(cfg.scheme.grid.point(k + 1) - cfg.scheme.grid.point(k));
        CHECK(std::abs(to_double(ps.drift_sum)) <
              3 * gap * std::sqrt(static_cast<double>(ps.visits)));
    }

    // The designed scheme nets zero per round in expectation (gross Q/4 = c),
    // so the realized mean net stays within a crude three-sigma band.
    const double bound = to_double(cfg.scheme.reward_h[1] + cfg.params.c);
    for (std::size_t k = 1; k <= 3; ++k) {
        const auto& ps = stats.per_point[k];
        CHECK(std::abs(to_double(ps.net_sum)) <
              3 * bound * std::sqrt(static_cast<double>(ps.visits)));
    }
}

TEST_CASE("deviation episodes share their prefix with designed play") {
    const auto cfg = bench_config(SupplySpec::unlimited());
    const auto dev = Deviation::shirk(SimMessage::High);
    for (std::uint64_t e = 0; e < 16; ++e) {
        Stream base_stream(99, e);
        const auto base = run_episode(cfg, base_stream);
        Stream dev_stream(99, e);
        const auto out = deviation_episode(cfg, dev, 3, dev_stream);
        CHECK(out.transcript.deviation_round == 3);
        if (base.rows.size() < 3) {
            CHECK(!out.reached);
            CHECK(out.deviator_net == 0);
            continue;
        }
        REQUIRE(out.reached);
        for (std::size_t i = 0; i < 2; ++i) {
            CHECK(out.transcript.rows[i].point_index == base.rows[i].point_index);
            CHECK(out.transcript.rows[i].message == base.rows[i].message);
            CHECK(out.transcript.rows[i].discovery == base.rows[i].discovery);
        }
        const auto& row = out.transcript.rows[2];
        CHECK(!row.worked);
        CHECK(row.message == SimMessage::High);
        CHECK(out.deviator_net == row.payment);
    }
}

TEST_CASE("deviations past the end of the episode never fire") {
    const auto cfg = bench_config(SupplySpec::pmf({rat("0"), rat("0"), rat("1")}));
    Stream stream(7, 0);
    const auto out = deviation_episode(cfg, Deviation::shirk(SimMessage::High), 100, stream);
    CHECK(!out.reached);
    CHECK(out.deviator_net == 0);
    CHECK(out.transcript.rows.size() <= 3);
}

TEST_CASE("fabricated high reports break even on average") {
    const auto cfg = bench_config(SupplySpec::unlimited());
    const auto dev = Deviation::shirk(SimMessage::High);
    const auto stats = deviation_monte_carlo(cfg, dev, 1, 2000, 41, 4);
    CHECK(stats.episodes == 2000);
    CHECK(stats.reached == 2000);  // round one always runs
    // Zero expected value by design; the Monte Carlo mean must sit within
    // three standard errors of it.
    CHECK(std::abs(to_double(stats.mean())) < 3 * stats.standard_error());
    CHECK(stats.standard_error() < 0.1);

    // Job count does not move the exact accumulators.
    const auto again = deviation_monte_carlo(cfg, dev, 1, 2000, 41, 1);
    CHECK(again.net_sum == stats.net_sum);
    CHECK(again.reached == stats.reached);
    CHECK(again.mean() == stats.mean());
}

TEST_CASE("a truthful work deviation is no deviation at all") {
    const auto cfg = bench_config(SupplySpec::unlimited());
    const auto dev = Deviation::work_map(SimMessage::High, SimMessage::Low);
    for (std::uint64_t e = 0; e < 12; ++e) {
        Stream a(55, e), b(55, e);
        const auto base = run_episode(cfg, a);
        const auto out = deviation_episode(cfg, dev, 2, b);
        REQUIRE(out.transcript.rows.size() == base.rows.size());
        CHECK(out.transcript.terminal == base.terminal);
        for (std::size_t i = 0; i < base.rows.size(); ++i) {
            CHECK(out.transcript.rows[i].message == base.rows[i].message);
            CHECK(out.transcript.rows[i].payment == base.rows[i].payment);
        }
    }
}

TEST_CASE("simulation input validation") {
    auto cfg = bench_config(SupplySpec::unlimited());
    cfg.model = SignalModel(rat("3/4"), rat("3/4"));  // prior off the grid anchor
    CHECK_THROWS_AS(run_episode(cfg, 1, 0), std::invalid_argument);

    auto cfg2 = bench_config(SupplySpec::unlimited());
    cfg2.horizon_cap = 0;
    CHECK_THROWS_AS(run_episode(cfg2, 1, 0), std::invalid_argument);

    auto cfg3 = bench_config(SupplySpec::unlimited());
    Stream s(1, 1);
    CHECK_THROWS_AS(deviation_episode(cfg3, Deviation::shirk(SimMessage::High), 0, s),
                    std::invalid_argument);
    cfg3.profile = SimProfile::all_shirk();
    CHECK_THROWS_AS(deviation_episode(cfg3, Deviation::shirk(SimMessage::High), 1, s),
                    std::invalid_argument);

    const EpisodeStats empty;
    CHECK(empty.exit_top_share() == 0);
    CHECK(empty.mean_rounds() == 0);
    CHECK(empty.mean_net() == 0);
}
