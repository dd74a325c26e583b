#include "attrition/run.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "attrition/config.hpp"
#include "attrition/designer.hpp"
#include "attrition/grid.hpp"
#include "attrition/io.hpp"
#include "attrition/oracle.hpp"
#include "attrition/sim.hpp"
#include "attrition/thresholds.hpp"
#include "attrition/witness.hpp"

namespace attrition {

namespace {

namespace fs = std::filesystem;

constexpr const char* kToolName = "attrition-lab";
constexpr const char* kToolVersion = "1.0.0";

struct StageResult {
    ojson report;
    std::optional<std::string> failure;
};

const char* message_name(SimMessage m) {
    switch (m) {
        case SimMessage::High: return "high";
        case SimMessage::Low: return "low";
        case SimMessage::Silent: return "silent";
    }
    return "?";
}

const char* terminal_name(Terminal t) {
    switch (t) {
        case Terminal::ExitTop: return "top";
        case Terminal::ExitBottom: return "bottom";
        case Terminal::Stopped: return "stopped";
        case Terminal::Truncated: return "truncated";
    }
    return "?";
}

const char* state_name(State s) { return s == State::H ? "H" : "L"; }

ojson rats_json(const std::vector<Rat>& values, std::size_t from) {
    ojson arr = ojson::array();
    for (std::size_t i = from; i < values.size(); ++i) arr.push_back(rat_json(values[i]));
    return arr;
}

ojson supply_json(const SupplySpec& spec) {
    ojson j;
    switch (spec.kind()) {
        case SupplySpec::Kind::Unlimited: j["kind"] = "unlimited"; break;
        case SupplySpec::Kind::Geometric:
            j["kind"] = "geometric";
            j["f1"] = rat_json(spec.f1());
            j["rho"] = rat_json(spec.rho());
            break;
        case SupplySpec::Kind::Pmf: {
            j["kind"] = "pmf";
            ojson w = ojson::array();
            for (const Rat& r : spec.weights()) w.push_back(to_string(r));
            j["weights"] = w;
            break;
        }
    }
    return j;
}

// ---------------------------------------------------------------- thresholds

StageResult stage_thresholds(const ExperimentConfig& cfg, const fs::path& dir,
                             const std::string& prefix, std::vector<std::string>& artifacts) {
    const GameParams& params = cfg.params;
    const ProofConstants pc = proof_constants(params);
    const AttritionCertificate cert = attrition_certificate(cfg.supply, params);

    ojson j;
    j["schema"] = "attrition-lab/thresholds/1";
    j["params"] = {{"R", rat_json(params.R)},
                   {"P", rat_json(params.P)},
                   {"c", rat_json(params.c)},
                   {"lambda", rat_json(params.lambda)}};
    j["work_floor"] = rat_json(work_floor(params));
    j["ratio_constant"] = rat_json(pc.C);
    j["per_find_gain"] = rat_json(pc.g);
    j["drift_bound"] = rat_json(pc.B);
    j["sqrt_G"] = rat_json(pc.sqrt_G);
    j["G"] = rat_json(pc.G);
    j["eta"] = rat_json(pc.eta);
    j["bound_terms"] = {{"term1", rat_json(pc.term1)},
                        {"term2", rat_json(pc.term2)},
                        {"term3", rat_json(pc.term3)},
                        {"term4", rat_json(pc.term4)},
                        {"quarter_bound", rat_json(pc.quarter_bound)},
                        {"sum", rat_json(pc.term_sum)}};
    j["each_term_strictly_below_quarter"] = pc.each_term_strictly_below_quarter;
    j["sum_strictly_below_work_floor"] = pc.sum_strictly_below_work_floor;

    std::optional<Rat> wit_threshold;
    if (cfg.witness) {
        Rat fbar = 0;
        for (const ShockDensity& d : cfg.witness->densities) fbar = std::max(fbar, d.fbar());
        wit_threshold = witness_threshold(cfg.witness->densities.size(), fbar, params.R);
        j["witness_threshold"] = rat_json(*wit_threshold);
    } else {
        j["witness_threshold"] = nullptr;
    }

    ojson cj;
    cj["kind"] = cert.label();
    if (cert.zero_tail_at) cj["zero_tail_at"] = *cert.zero_tail_at;
    if (cert.f1) cj["f1"] = rat_json(*cert.f1);
    if (cert.floor) cj["floor"] = rat_json(*cert.floor);
    if (cert.kind == AttritionCertificate::Kind::Diagnostic) {
        cj["ratio_gap_all_k"] = cert.ratio_gap_all_k;
        if (cert.ratio_gap_largest_k) cj["ratio_gap_largest_k"] = *cert.ratio_gap_largest_k;
    }
    j["certificate"] = cj;

    std::vector<std::vector<std::string>> rows;
    auto add = [&rows](const char* name, const Rat& v) {
        rows.push_back({name, to_string(v), format_double(to_double(v))});
    };
    add("work_floor", work_floor(params));
    add("ratio_constant", pc.C);
    add("per_find_gain", pc.g);
    add("drift_bound", pc.B);
    add("sqrt_G", pc.sqrt_G);
    add("G", pc.G);
    add("eta", pc.eta);
    add("term1", pc.term1);
    add("term2", pc.term2);
    add("term3", pc.term3);
    add("term4", pc.term4);
    add("quarter_bound", pc.quarter_bound);
    add("term_sum", pc.term_sum);
    if (wit_threshold) add("witness_threshold", *wit_threshold);
    write_csv(dir / "constants.csv", {"name", "exact", "approx"}, rows);
    artifacts.push_back(prefix + "constants.csv");

    write_json_file(dir / "report.json", j);
    artifacts.push_back(prefix + "report.json");
    return {j, std::nullopt};
}

// ---------------------------------------------------------------------- grid

StageResult stage_grid(const GridArgs& args, const fs::path& dir, const std::string& prefix,
                       std::vector<std::string>& artifacts) {
    const BeliefGrid grid = build_grid(args.p0, args.p_lo, args.p_hi, args.pi);
    const ExitProbabilities ep = exit_probabilities(grid);

    std::vector<std::vector<std::string>> rows;
    for (std::size_t k = 0; k < grid.size(); ++k)
        rows.push_back({to_string(grid.point(k)), to_string(ep.top_h[k]), to_string(ep.top_l[k])});
    write_csv(dir / "grid.csv", {"point", "hH", "hL"}, rows);
    artifacts.push_back(prefix + "grid.csv");

    ojson j;
    j["schema"] = "attrition-lab/grid/1";
    j["pi"] = rat_json(grid.pi());
    j["kappa"] = rat_json(ep.kappa);
    j["interior_points"] = grid.n();
    j["prior_index"] = grid.prior_index();
    ojson pts = ojson::array();
    for (std::size_t k = 0; k < grid.size(); ++k) {
        ojson p;
        p["index"] = k;
        p["point"] = rat_json(grid.point(k));
        p["kind"] = (k == 0 || k == grid.size() - 1) ? "boundary" : "interior";
        p["top_h"] = rat_json(ep.top_h[k]);
        p["top_l"] = rat_json(ep.top_l[k]);
        p["bot_h"] = rat_json(ep.bot_h[k]);
        p["bot_l"] = rat_json(ep.bot_l[k]);
        pts.push_back(p);
    }
    j["points"] = pts;
    write_json_file(dir / "report.json", j);
    artifacts.push_back(prefix + "report.json");
    return {j, std::nullopt};
}

GridArgs grid_args_from_config(const ExperimentConfig& cfg, const std::string& sub) {
    if (!cfg.grid) throw ConfigError(sub + ": config needs a grid section");
    return {cfg.model.p0, cfg.grid->p_lo, cfg.grid->p_hi, cfg.model.pi};
}

// -------------------------------------------------------------------- design

struct BuiltScheme {
    BeliefGrid grid;
    ExitProbabilities ep;
    MinimalQ minimal;
    std::optional<CompensationScheme> scheme;  ///< nullopt when auto-Q is infeasible
    Rat rho;
    std::optional<Rat> chosen_q;
};

BuiltScheme build_scheme(const ExperimentConfig& cfg, const std::string& sub) {
    if (!cfg.grid || !cfg.scheme) throw ConfigError(sub + ": config needs grid and scheme sections");
    BeliefGrid grid = build_grid(cfg.model.p0, cfg.grid->p_lo, cfg.grid->p_hi, cfg.model.pi);
    ExitProbabilities ep = exit_probabilities(grid);
    const Rat rho = effective_rho(cfg);
    const PayoffBox box{cfg.params.R, cfg.params.P};
    MinimalQ mq = minimal_q(grid, ep, cfg.params.c, cfg.params.lambda, rho, box);
    BuiltScheme out{grid, ep, mq, std::nullopt, rho, std::nullopt};
    if (cfg.scheme->q) {
        out.chosen_q = *cfg.scheme->q;
    } else if (mq.feasible) {
        out.chosen_q = mq.q_star;
    }
    if (out.chosen_q) out.scheme = design_scheme(out.grid, out.ep, *out.chosen_q);
    return out;
}

StageResult stage_design(const ExperimentConfig& cfg, const fs::path& dir,
                         const std::string& prefix, std::vector<std::string>& artifacts) {
    BuiltScheme built = build_scheme(cfg, "design");
    const std::size_t n = built.grid.n();

    ojson j;
    j["schema"] = "attrition-lab/design/1";
    j["rho"] = rat_json(built.rho);
    j["kappa"] = rat_json(cfg.params.lambda * built.rho);
    ojson mj;
    mj["feasible"] = built.minimal.feasible;
    mj["q_star"] = built.minimal.feasible ? rat_json(built.minimal.q_star) : ojson(nullptr);
    mj["binding_k"] = built.minimal.binding_k;
    if (built.minimal.violation) mj["violation"] = *built.minimal.violation;
    mj["unit_margin"] = rats_json(built.minimal.unit_margin, 1);
    j["minimal"] = mj;

    std::optional<std::string> failure;
    if (!built.scheme) {
        j["chosen_q"] = nullptr;
        failure = built.minimal.violation.value_or("no feasible punishment scale");
        write_json_file(dir / "report.json", j);
        artifacts.push_back(prefix + "report.json");
        return {j, failure};
    }

    const CompensationScheme& scheme = *built.scheme;
    j["chosen_q"] = rat_json(*built.chosen_q);
    const PayoffBox box{cfg.params.R, cfg.params.P};
    const IcReport ic = verify_ic(scheme, cfg.params, built.rho, box);

    ojson fab = ojson::array(), workj = ojson::array(), net = ojson::array();
    for (std::size_t k = 1; k <= n; ++k) {
        fab.push_back(rat_json(shirk_payoff(scheme, k)));
        workj.push_back(rat_json(work_payoff(scheme, k)));
        net.push_back(rat_json(ic.truthful[k]));
    }
    j["fabrication_payoff"] = fab;
    j["work_payoff"] = workj;
    j["truthful_net"] = net;
    j["incentive_compatible"] = ic.incentive_compatible;
    j["box_violation"] = ic.box_violation ? ojson(*ic.box_violation) : ojson(nullptr);

    // Worst deviation margin per interior point, for the CSV margin column.
    std::vector<std::optional<Rat>> min_margin(n + 1);
    ojson margins = ojson::array();
    std::optional<Rat> overall;
    for (const DeviationMargin& m : ic.margins) {
        ojson e;
        e["k"] = m.k;
        e["deviation"] = m.deviation;
        e["value"] = rat_json(m.value);
        e["margin"] = rat_json(m.margin);
        margins.push_back(e);
        auto& slot = min_margin[m.k];
        if (!slot || m.margin < *slot) slot = m.margin;
        if (!overall || m.margin < *overall) overall = m.margin;
    }
    j["margins"] = margins;
    j["min_margin"] = overall ? rat_json(*overall) : ojson(nullptr);

    std::vector<std::vector<std::string>> rows;
    for (std::size_t k = 1; k <= n; ++k)
        rows.push_back({std::to_string(k), to_string(scheme.grid.point(k)),
                        to_string(scheme.reward_h[k]), to_string(scheme.reward_l[k]),
                        to_string(scheme.punishment),
                        min_margin[k] ? to_string(*min_margin[k]) : std::string()});
    write_csv(dir / "scheme.csv", {"k", "q_k", "RH", "RL", "Q", "margin"}, rows);
    artifacts.push_back(prefix + "scheme.csv");

    if (ic.box_violation)
        failure = "payment box violated: " + *ic.box_violation;
    else if (!ic.incentive_compatible)
        failure = "incentive compatibility failed: some one-round deviation margin is negative";

    write_json_file(dir / "report.json", j);
    artifacts.push_back(prefix + "report.json");
    return {j, failure};
}

// ------------------------------------------------------------------ simulate

StageResult stage_simulate(const ExperimentConfig& cfg, const RunOptions& opts,
                           const fs::path& dir, const std::string& prefix,
                           std::vector<std::string>& artifacts) {
    BuiltScheme built = build_scheme(cfg, "simulate");
    const SimSection sim = cfg.sim.value_or(SimSection{});
    const std::size_t episodes = opts.episodes.value_or(sim.episodes);
    const std::uint64_t seed = opts.seed.value_or(sim.seed);

    ojson j;
    j["schema"] = "attrition-lab/simulate/1";
    j["episodes"] = episodes;
    j["seed"] = seed;
    j["horizon_cap"] = sim.horizon_cap;
    j["profile"] = sim.profile.kind == SimProfile::Kind::Designed ? "designed" : "all-shirk";
    if (sim.profile.kind == SimProfile::Kind::AllShirk)
        j["shirk_message"] = message_name(sim.profile.shirk_message);

    if (!built.scheme) {
        j["chosen_q"] = nullptr;
        write_json_file(dir / "stats.json", j);
        artifacts.push_back(prefix + "stats.json");
        return {j, built.minimal.violation.value_or("no feasible punishment scale")};
    }
    j["chosen_q"] = rat_json(*built.chosen_q);
    const IcReport ic = verify_ic(*built.scheme, cfg.params, built.rho,
                                  PayoffBox{cfg.params.R, cfg.params.P});
    j["incentive_compatible"] = ic.incentive_compatible;

    SimConfig sc{cfg.params, cfg.supply, cfg.model, *built.scheme, sim.profile, sim.horizon_cap};
    const EpisodeStats stats = monte_carlo(sc, episodes, seed, opts.jobs);

    j["terminals"] = {{"top", stats.exit_top},
                      {"bottom", stats.exit_bottom},
                      {"stopped", stats.stopped},
                      {"truncated", stats.truncated}};
    j["omega_high"] = stats.omega_high;
    j["total_rounds"] = stats.total_rounds;
    j["total_discoveries"] = stats.total_discoveries;
    const bool empty = episodes == 0;
    j["exit_top_share"] = empty ? ojson(nullptr) : rat_json(stats.exit_top_share());
    j["mean_rounds"] = empty ? ojson(nullptr) : rat_json(stats.mean_rounds());
    j["mean_net"] = empty ? ojson(nullptr) : rat_json(stats.mean_net());
    j["total_net"] = rat_json(stats.total_net);

    ojson pts = ojson::array();
    for (std::size_t k = 1; k + 1 < built.grid.size(); ++k) {
        PointStats ps;
        if (k < stats.per_point.size()) ps = stats.per_point[k];
        ojson p;
        p["index"] = k;
        p["point"] = rat_json(built.grid.point(k));
        p["visits"] = ps.visits;
        p["worked"] = ps.worked;
        p["discoveries"] = ps.discoveries;
        p["net_sum"] = rat_json(ps.net_sum);
        p["drift_sum"] = rat_json(ps.drift_sum);
        p["mean_drift"] = ps.visits == 0
                              ? ojson(nullptr)
                              : rat_json(ps.drift_sum / static_cast<long>(ps.visits));
        pts.push_back(p);
    }
    j["per_point"] = pts;
    write_json_file(dir / "stats.json", j);
    artifacts.push_back(prefix + "stats.json");

    // Transcript sample: the leading episodes replayed on their own
    // substreams, identical to what the aggregate pass consumed.
    std::vector<std::vector<std::string>> rows;
    const std::size_t sample = std::min(episodes, sim.transcript_episodes);
    for (std::size_t e = 0; e < sample; ++e) {
        const Transcript t = run_episode(sc, seed, e);
        for (const TranscriptRow& r : t.rows)
            rows.push_back({std::to_string(e), std::to_string(r.round),
                            std::to_string(r.point_index), to_string(r.p),
                            format_double(to_double(r.f1)), r.worked ? "1" : "0",
                            r.discovery ? state_name(*r.discovery) : "",
                            message_name(r.message), to_string(r.payment),
                            terminal_name(t.terminal), state_name(t.omega)});
    }
    write_csv(dir / "transcripts.csv",
              {"episode", "round", "point_index", "point", "f1", "worked", "discovery", "message",
               "payment", "terminal", "omega"},
              rows);
    artifacts.push_back(prefix + "transcripts.csv");
    return {j, std::nullopt};
}

// -------------------------------------------------------------------- oracle

Rat table_rat(const ojson& v, const std::string& where) {
    if (v.is_string()) {
        try {
            return parse_rational(v.get<std::string>());
        } catch (const std::invalid_argument& e) {
            throw ConfigError(where + ": " + e.what());
        }
    }
    if (v.is_number_integer()) return Rat(static_cast<long>(v.get<std::int64_t>()));
    throw ConfigError(where + ": expected a rational literal");
}

std::vector<std::vector<PayTable>> load_table_sets(const std::string& source, std::size_t horizon,
                                                   std::size_t messages, const GameParams& params,
                                                   std::uint64_t seed,
                                                   std::vector<std::string>& labels) {
    std::size_t entries = 1;
    for (std::size_t t = 0; t < horizon; ++t) entries *= messages;

    std::vector<std::vector<PayTable>> sets;
    if (source.rfind("random:", 0) == 0) {
        const std::string count_text = source.substr(7);
        std::size_t count = 0;
        try {
            count = std::stoul(count_text);
        } catch (const std::exception&) {
            throw ConfigError("oracle tables: bad count in '" + source + "'");
        }
        // Values are quantized to a 1/16 lattice of the payoff box so the
        // games stay exactly representable and cheap to print.
        Stream stream(seed, 0x7AB1E5ULL);
        const Rat span = params.R + params.P;
        for (std::size_t s = 0; s < count; ++s) {
            std::vector<PayTable> tables;
            for (std::size_t a = 0; a < horizon; ++a) {
                std::vector<Rat> values;
                values.reserve(entries);
                for (std::size_t e = 0; e < entries; ++e) {
                    const long tick = static_cast<long>(stream.next_u64() % 17);
                    values.push_back(-params.P + span * ratio(tick, 16));
                }
                tables.emplace_back(horizon, messages, std::move(values));
            }
            sets.push_back(std::move(tables));
            labels.push_back("random:" + std::to_string(s));
        }
        return sets;
    }

    ojson doc;
    try {
        doc = ojson::parse(read_text_file(source));
    } catch (const std::exception& e) {
        throw ConfigError("oracle tables '" + source + "': " + e.what());
    }
    if (!doc.is_object() || !doc.contains("tables") || !doc["tables"].is_array())
        throw ConfigError("oracle tables '" + source + "': expected {\"tables\": [...]}");
    const ojson& arr = doc["tables"];
    for (std::size_t s = 0; s < arr.size(); ++s) {
        const ojson& set = arr[s];
        const std::string where = "tables[" + std::to_string(s) + "]";
        if (!set.is_array() || set.size() != horizon)
            throw ConfigError(source + ": " + where + ": expected one table per agent (" +
                              std::to_string(horizon) + ")");
        std::vector<PayTable> tables;
        for (std::size_t a = 0; a < horizon; ++a) {
            const ojson& flat = set[a];
            if (!flat.is_array() || flat.size() != entries)
                throw ConfigError(source + ": " + where + "[" + std::to_string(a) +
                                  "]: expected " + std::to_string(entries) + " values");
            std::vector<Rat> values;
            for (std::size_t e = 0; e < entries; ++e) {
                Rat v = table_rat(flat[e], source + ": " + where);
                if (v < -params.P || v > params.R)
                    throw ConfigError(source + ": " + where + ": value " + to_string(v) +
                                      " outside [-P, R]");
                values.push_back(std::move(v));
            }
            tables.emplace_back(horizon, messages, std::move(values));
        }
        sets.push_back(std::move(tables));
        labels.push_back("file:" + std::to_string(s));
    }
    if (sets.empty()) throw ConfigError(source + ": no tables");
    return sets;
}

ojson profile_json(const OracleProfile& profile) {
    const std::size_t M = profile.message_count();
    ojson agents = ojson::array();
    for (std::size_t a = 0; a < profile.horizon(); ++a) {
        std::size_t count = 1;
        for (std::size_t i = 0; i < a; ++i) count *= M;
        ojson rounds = ojson::array();
        for (std::size_t idx = 0; idx < count; ++idx) {
            std::vector<std::size_t> history(a);
            std::size_t rem = idx;
            for (std::size_t j = a; j-- > 0;) {
                history[j] = rem % M;
                rem /= M;
            }
            const RoundStrategy& rs = profile.at(a, history);
            ojson r;
            r["history"] = history;
            r["gamma"] = to_string(rs.gamma);
            ojson shirk = ojson::array(), found = ojson::array(), empty = ojson::array();
            for (std::size_t m = 0; m < M; ++m) {
                shirk.push_back(to_string(rs.shirk_report[m]));
                found.push_back(to_string(rs.found_report[m]));
                empty.push_back(to_string(rs.empty_report[m]));
            }
            r["shirk"] = shirk;
            r["found"] = found;
            r["empty"] = empty;
            rounds.push_back(r);
        }
        ojson agent;
        agent["agent"] = a;
        agent["rounds"] = rounds;
        agents.push_back(agent);
    }
    return agents;
}

ojson bounds_json(const BoundReport& report) {
    ojson j;
    j["all_hold"] = report.all_hold;
    ojson violations = ojson::array();
    for (const HistoryBounds& h : report.entries) {
        if (h.supermartingale_ok && h.empty_value_ok && h.discovery_ok) continue;
        ojson v;
        v["agent"] = h.agent;
        v["history"] = h.history;
        if (!h.supermartingale_ok) v["supermartingale_slack"] = rat_json(h.supermartingale_slack);
        if (!h.empty_value_ok && h.empty_value_slack)
            v["empty_value_slack"] = rat_json(*h.empty_value_slack);
        if (!h.discovery_ok && h.discovery_slack)
            v["discovery_slack"] = rat_json(*h.discovery_slack);
        violations.push_back(v);
    }
    j["violations"] = violations;
    return j;
}

StageResult stage_oracle(const ExperimentConfig& cfg, const RunOptions& opts, const fs::path& dir,
                         const std::string& prefix, std::vector<std::string>& artifacts) {
    if (!cfg.oracle) throw ConfigError("oracle: config needs an oracle section");
    const OracleSection& os = *cfg.oracle;
    const std::uint64_t seed = opts.seed.value_or(cfg.sim ? cfg.sim->seed : 1);

    std::vector<std::string> labels;
    std::vector<std::vector<PayTable>> sets =
        load_table_sets(opts.tables, os.horizon, os.messages, cfg.params, seed, labels);

    ojson j;
    j["schema"] = "attrition-lab/oracle/1";
    j["game"] = {{"horizon", os.horizon},
                 {"messages", os.messages},
                 {"lambda", rat_json(cfg.params.lambda)},
                 {"c", rat_json(cfg.params.c)},
                 {"reward_cap", rat_json(cfg.params.R)},
                 {"punish_cap", rat_json(cfg.params.P)},
                 {"supply", supply_json(cfg.supply)}};
    j["step"] = rat_json(os.step);
    j["tables_source"] = opts.tables;
    j["seed"] = seed;

    bool all_consistent = true;
    bool bounds_all_hold = true;
    ojson out_sets = ojson::array();
    for (std::size_t s = 0; s < sets.size(); ++s) {
        FiniteGame game(os.horizon, os.messages, cfg.supply, cfg.params.lambda, cfg.params.c,
                        cfg.params.R, cfg.params.P, sets[s]);
        const DominanceReport dom = dominance_scan(game);
        const EnumerationResult enumeration = enumerate_equilibria(game, os.step);

        ojson sj;
        sj["index"] = s;
        sj["source"] = labels[s];
        sj["dominance"] = {{"certified", dom.certified},
                           {"min_margin", rat_json(dom.min_margin)},
                           {"agent_margins", rats_json(dom.agent_margin, 0)}};
        ojson certs = ojson::array();
        for (const EquilibriumCertificate& cert : enumeration.certificates) {
            ojson cj;
            cj["gap"] = rat_json(cert.gap);
            cj["informative"] = cert.informative;
            cj["supporting"] =
                cert.supporting ? ojson(cert.supporting->describe()) : ojson(nullptr);
            const BoundReport bounds = bound_checks(game, cert.profile);
            if (!bounds.all_hold) bounds_all_hold = false;
            cj["bounds"] = bounds_json(bounds);
            cj["profile"] = profile_json(cert.profile);
            certs.push_back(cj);
        }
        sj["enumeration"] = {{"profiles_checked", enumeration.profiles_checked},
                             {"any_informative", enumeration.any_informative},
                             {"certificates", certs}};
        const bool consistent = !(dom.certified && enumeration.any_informative);
        if (!consistent) all_consistent = false;
        sj["consistent"] = consistent;
        out_sets.push_back(sj);
    }
    j["sets"] = out_sets;
    j["all_consistent"] = all_consistent;
    j["bounds_all_hold"] = bounds_all_hold;

    write_json_file(dir / "certificates.json", j);
    artifacts.push_back(prefix + "certificates.json");

    std::optional<std::string> failure;
    if (!all_consistent)
        failure = "dominance certified unraveling but enumeration found an informative profile";
    else if (!bounds_all_hold)
        failure = "a structural bound failed on a certified profile";
    return {j, failure};
}

// ------------------------------------------------------------------- witness

StageResult stage_witness(const ExperimentConfig& cfg, const fs::path& dir,
                          const std::string& prefix, std::vector<std::string>& artifacts) {
    if (!cfg.witness) throw ConfigError("witness: config needs a witness section");
    const WitnessSection& ws = *cfg.witness;
    const WitnessSpec spec(ws.densities, ws.informative_value, ws.baseline_value, cfg.params.R,
                           ws.phi);
    const std::size_t m = spec.message_count();
    const Rat fbar = spec.fbar();
    const Rat threshold = witness_threshold(m, fbar, cfg.params.R);
    const Rat contraction_at = contraction_coefficient(threshold, m, fbar, cfg.params.R);
    const Rat collision = order_stat_bound(ws.witnesses, fbar, ws.epsilon);
    const Rat info_bound = informative_event_bound(spec, ws.z);
    const IhrReport ihr = check_ihr(cfg.supply);
    const HatMonotonicityReport mono = ihr_monotonicity_check(cfg.supply, ws.probe);

    ojson j;
    j["schema"] = "attrition-lab/witness/1";
    j["messages"] = m;
    j["fbar"] = rat_json(fbar);
    j["threshold"] = rat_json(threshold);
    j["contraction_at_threshold"] = rat_json(contraction_at);
    j["order_stat"] = {{"draws", ws.witnesses},
                       {"epsilon", rat_json(ws.epsilon)},
                       {"bound", rat_json(collision)}};
    ojson zj = ojson::array();
    for (const Rat& z : ws.z) zj.push_back(rat_json(z));
    j["z"] = zj;
    j["informative_event_bound"] = rat_json(info_bound);
    j["ihr"] = {{"holds", ihr.holds},
                {"first_violation",
                 ihr.first_violation ? ojson(*ihr.first_violation) : ojson(nullptr)}};
    ojson mj;
    mj["monotone_in_discoveries"] = mono.monotone_in_discoveries;
    mj["mixture_bound_holds"] = mono.mixture_bound_holds;
    if (mono.first_violation)
        mj["first_violation"] = {{"consumed", mono.first_violation->first},
                                 {"k", mono.first_violation->second}};
    else
        mj["first_violation"] = nullptr;
    j["hat_monotonicity"] = mj;

    // Conditional-survival table: one block per confirmed-discovery count
    // with positive probability inside the probe window.
    std::vector<std::vector<std::string>> hat_rows;
    for (std::size_t consumed = 0; consumed <= ws.probe; ++consumed) {
        if (consumed > 0 && cfg.supply.bounded() && cfg.supply.survival(consumed) == 0) break;
        const HatSurvival table = hat_survival_table(cfg.supply, consumed, ws.probe);
        for (std::size_t k = 1; k <= table.values.size(); ++k)
            hat_rows.push_back({std::to_string(consumed), std::to_string(k),
                                to_string(table.values[k - 1]),
                                format_double(to_double(table.values[k - 1]))});
    }
    write_csv(dir / "hat_survival.csv", {"consumed", "k", "exact", "approx"}, hat_rows);
    artifacts.push_back(prefix + "hat_survival.csv");

    std::vector<std::vector<std::string>> bound_rows;
    auto add = [&bound_rows](const char* name, const Rat& v) {
        bound_rows.push_back({name, to_string(v), format_double(to_double(v))});
    };
    add("fbar", fbar);
    add("witness_threshold", threshold);
    add("contraction_at_threshold", contraction_at);
    add("order_stat_bound", collision);
    add("informative_event_bound", info_bound);
    write_csv(dir / "bounds.csv", {"name", "exact", "approx"}, bound_rows);
    artifacts.push_back(prefix + "bounds.csv");

    write_json_file(dir / "certificates.json", j);
    artifacts.push_back(prefix + "certificates.json");

    std::optional<std::string> failure;
    if (ihr.holds && (!mono.monotone_in_discoveries || !mono.mixture_bound_holds))
        failure = "conditional-survival monotonicity failed for an increasing-hazard supply";
    return {j, failure};
}

// ----------------------------------------------------------------------- all

StageResult stage_all(const ExperimentConfig& cfg, const RunOptions& opts, const fs::path& dir,
                      std::vector<std::string>& artifacts) {
    ojson j;
    j["schema"] = "attrition-lab/report/1";
    ojson stages;
    std::vector<std::string> failures;

    auto record = [&](const char* name, StageResult result) {
        ojson entry = std::move(result.report);
        if (result.failure) {
            failures.push_back(std::string(name) + ": " + *result.failure);
            entry["error"] = *result.failure;
        }
        stages[name] = std::move(entry);
    };

    record("thresholds", stage_thresholds(cfg, dir / "thresholds", "thresholds/", artifacts));
    record("grid",
           stage_grid(grid_args_from_config(cfg, "all"), dir / "grid", "grid/", artifacts));
    record("design", stage_design(cfg, dir / "design", "design/", artifacts));
    record("simulate", stage_simulate(cfg, opts, dir / "simulate", "simulate/", artifacts));
    if (cfg.oracle)
        record("oracle", stage_oracle(cfg, opts, dir / "oracle", "oracle/", artifacts));
    else
        stages["oracle"] = nullptr;
    if (cfg.witness)
        record("witness", stage_witness(cfg, dir / "witness", "witness/", artifacts));
    else
        stages["witness"] = nullptr;
    j["stages"] = stages;

    // The headline numbers side by side: the designed punishment scale next
    // to what the simulation realized under it.
    ojson links;
    const ojson& design = stages["design"];
    const ojson& sim = stages["simulate"];
    links["q_star"] = design["minimal"]["q_star"];
    links["chosen_q"] = design["chosen_q"];
    links["min_ic_margin"] = design.contains("min_margin") ? design["min_margin"] : ojson(nullptr);
    links["sim_exit_top_share"] =
        sim.contains("exit_top_share") ? sim["exit_top_share"] : ojson(nullptr);
    links["sim_mean_net"] = sim.contains("mean_net") ? sim["mean_net"] : ojson(nullptr);
    j["cross_links"] = links;

    write_json_file(dir / "report.json", j);
    artifacts.push_back("report.json");

    std::optional<std::string> failure;
    if (!failures.empty()) {
        std::string joined;
        for (std::size_t i = 0; i < failures.size(); ++i) {
            if (i) joined += "; ";
            joined += failures[i];
        }
        failure = joined;
    }
    return {j, failure};
}

std::string utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

int run_command(const std::string& subcommand, const RunOptions& opts) {
    const fs::path out = opts.out_dir;
    std::vector<std::string> artifacts;
    std::optional<std::string> config_hash;
    std::optional<std::uint64_t> effective_seed = opts.seed;

    int code = kExitOk;
    std::string fail_type, fail_message;
    try {
        StageResult result;
        if (subcommand == "grid" && opts.grid_args) {
            result = stage_grid(*opts.grid_args, out, "", artifacts);
        } else {
            if (opts.config_path.empty())
                throw ConfigError(subcommand + ": --config is required");
            std::string text;
            try {
                text = read_text_file(opts.config_path);
            } catch (const std::runtime_error& e) {
                throw ConfigError(e.what());
            }
            config_hash = hex64(fnv1a64(text));
            const ExperimentConfig cfg = parse_config(text, opts.config_path);
            if (!effective_seed && cfg.sim) effective_seed = cfg.sim->seed;

            if (subcommand == "thresholds")
                result = stage_thresholds(cfg, out, "", artifacts);
            else if (subcommand == "grid")
                result = stage_grid(grid_args_from_config(cfg, "grid"), out, "", artifacts);
            else if (subcommand == "design")
                result = stage_design(cfg, out, "", artifacts);
            else if (subcommand == "simulate")
                result = stage_simulate(cfg, opts, out, "", artifacts);
            else if (subcommand == "oracle")
                result = stage_oracle(cfg, opts, out, "", artifacts);
            else if (subcommand == "witness")
                result = stage_witness(cfg, out, "", artifacts);
            else if (subcommand == "all")
                result = stage_all(cfg, opts, out, artifacts);
            else
                throw ConfigError("unknown subcommand: " + subcommand);
        }
        if (result.failure) {
            code = kExitVerificationFailure;
            fail_type = "verification-failure";
            fail_message = *result.failure;
        }
    } catch (const ConfigError& e) {
        code = kExitInvalidConfig;
        fail_type = "invalid-config";
        fail_message = e.what();
    } catch (const std::invalid_argument& e) {
        code = kExitInvalidConfig;
        fail_type = "invalid-config";
        fail_message = e.what();
    } catch (const std::exception& e) {
        code = kExitInvalidConfig;
        fail_type = "error";
        fail_message = e.what();
    }

    try {
        if (code != kExitOk) {
            ojson err;
            err["command"] = subcommand;
            err["exit"] = code;
            err["type"] = fail_type;
            err["message"] = fail_message;
            write_json_file(out / "errors.json", err);
            artifacts.push_back("errors.json");
            std::cerr << kToolName << " " << subcommand << ": " << fail_type << ": "
                      << fail_message << "\n";
        }
        ojson manifest;
        manifest["tool"] = kToolName;
        manifest["version"] = kToolVersion;
        manifest["command"] = subcommand;
        manifest["config"] = opts.config_path.empty() ? ojson(nullptr) : ojson(opts.config_path);
        manifest["config_hash"] = config_hash ? ojson(*config_hash) : ojson(nullptr);
        manifest["seed"] = effective_seed ? ojson(*effective_seed) : ojson(nullptr);
        manifest["jobs"] = opts.jobs;
        manifest["out"] = out.string();
        manifest["artifacts"] = artifacts;
        manifest["wall_clock_utc"] = utc_now();
        write_json_file(out / "manifest.json", manifest);
    } catch (const std::exception& e) {
        std::cerr << kToolName << ": cannot write run records: " << e.what() << "\n";
        if (code == kExitOk) code = kExitInvalidConfig;
    }
    return code;
}

}  // namespace attrition
