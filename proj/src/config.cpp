#include "attrition/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "attrition/grid.hpp"

namespace attrition {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& origin, const std::string& what) {
    throw ConfigError(origin + ": " + what);
}

void check_keys(const json& obj, const std::string& origin, const std::string& where,
                const std::set<std::string>& allowed) {
    for (const auto& item : obj.items())
        if (!allowed.count(item.key()))
            fail(origin, where + ": unknown key '" + item.key() + "'");
}

const json& need(const json& obj, const std::string& origin, const std::string& where,
                 const char* key) {
    auto it = obj.find(key);
    if (it == obj.end()) fail(origin, where + ": missing key '" + std::string(key) + "'");
    return *it;
}

// Rationals travel as strings ("2/7", "0.125") or integer JSON numbers.
// Non-integer number literals are rejected: their binary rounding would
// silently change the value.
Rat get_rat(const json& v, const std::string& origin, const std::string& where) {
    try {
        if (v.is_string()) return parse_rational(v.get<std::string>());
        if (v.is_number_integer()) return Rat(static_cast<long>(v.get<std::int64_t>()));
    } catch (const std::invalid_argument& e) {
        fail(origin, where + ": " + e.what());
    }
    if (v.is_number())
        fail(origin, where + ": write non-integer numbers as strings (e.g. \"0.1\" or \"1/10\") so they stay exact");
    fail(origin, where + ": expected a rational literal");
}

Rat get_rat(const json& obj, const std::string& origin, const std::string& where,
            const char* key) {
    return get_rat(need(obj, origin, where, key), origin, where + "." + key);
}

std::size_t get_size(const json& obj, const std::string& origin, const std::string& where,
                     const char* key) {
    const json& v = need(obj, origin, where, key);
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
        fail(origin, where + "." + key + ": expected a nonnegative integer");
    return static_cast<std::size_t>(v.get<std::int64_t>());
}

GameParams parse_params(const json& j, const std::string& origin) {
    const json& p = need(j, origin, "config", "params");
    check_keys(p, origin, "params", {"R", "P", "c", "lambda"});
    try {
        return GameParams(get_rat(p, origin, "params", "R"), get_rat(p, origin, "params", "P"),
                          get_rat(p, origin, "params", "c"),
                          get_rat(p, origin, "params", "lambda"));
    } catch (const std::invalid_argument& e) {
        fail(origin, std::string("params: ") + e.what());
    }
}

SupplySpec parse_supply(const json& j, const std::string& origin) {
    const json& s = need(j, origin, "config", "supply");
    const json& kind_v = need(s, origin, "supply", "kind");
    if (!kind_v.is_string()) fail(origin, "supply.kind: expected a string");
    const std::string kind = kind_v.get<std::string>();
    try {
        if (kind == "unlimited") {
            check_keys(s, origin, "supply", {"kind"});
            return SupplySpec::unlimited();
        }
        if (kind == "geometric") {
            check_keys(s, origin, "supply", {"kind", "f1", "rho"});
            return SupplySpec::geometric(get_rat(s, origin, "supply", "f1"),
                                         get_rat(s, origin, "supply", "rho"));
        }
        if (kind == "pmf") {
            check_keys(s, origin, "supply", {"kind", "weights"});
            const json& w = need(s, origin, "supply", "weights");
            if (!w.is_array() || w.empty()) fail(origin, "supply.weights: expected a nonempty array");
            std::vector<Rat> weights;
            for (std::size_t i = 0; i < w.size(); ++i)
                weights.push_back(get_rat(w[i], origin, "supply.weights[" + std::to_string(i) + "]"));
            return SupplySpec::pmf(std::move(weights));
        }
    } catch (const std::invalid_argument& e) {
        fail(origin, std::string("supply: ") + e.what());
    }
    fail(origin, "supply.kind: expected one of \"pmf\", \"geometric\", \"unlimited\"");
}

SignalModel parse_model(const json& j, const std::string& origin) {
    const json& m = need(j, origin, "config", "model");
    check_keys(m, origin, "model", {"p0", "pi"});
    try {
        return SignalModel(get_rat(m, origin, "model", "p0"), get_rat(m, origin, "model", "pi"));
    } catch (const std::invalid_argument& e) {
        fail(origin, std::string("model: ") + e.what());
    }
}

GridSection parse_grid(const json& g, const std::string& origin) {
    check_keys(g, origin, "grid", {"p_lo", "p_hi"});
    return {get_rat(g, origin, "grid", "p_lo"), get_rat(g, origin, "grid", "p_hi")};
}

SchemeSection parse_scheme(const json& s, const std::string& origin) {
    check_keys(s, origin, "scheme", {"q", "rho"});
    SchemeSection out;
    const json& q = need(s, origin, "scheme", "q");
    if (q.is_string() && q.get<std::string>() == "auto") {
        out.q = std::nullopt;
    } else {
        out.q = get_rat(q, origin, "scheme.q");
        if (*out.q < 0) fail(origin, "scheme.q: punishment must be nonnegative");
    }
    if (s.contains("rho")) {
        out.rho = get_rat(s, origin, "scheme", "rho");
        if (*out.rho <= 0 || *out.rho > 1) fail(origin, "scheme.rho: must lie in (0,1]");
    }
    return out;
}

SimMessage parse_message(const json& v, const std::string& origin, const std::string& where) {
    if (v.is_string()) {
        const std::string m = v.get<std::string>();
        if (m == "high") return SimMessage::High;
        if (m == "low") return SimMessage::Low;
        if (m == "silent") return SimMessage::Silent;
    }
    fail(origin, where + ": expected \"high\", \"low\" or \"silent\"");
}

SimSection parse_sim(const json& s, const std::string& origin) {
    check_keys(s, origin, "sim",
               {"episodes", "seed", "horizon_cap", "profile", "shirk_message",
                "transcript_episodes"});
    SimSection out;
    if (s.contains("episodes")) out.episodes = get_size(s, origin, "sim", "episodes");
    if (s.contains("seed")) {
        const json& v = s["seed"];
        if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
            fail(origin, "sim.seed: expected a nonnegative integer");
        out.seed = static_cast<std::uint64_t>(v.get<std::int64_t>());
    }
    if (s.contains("horizon_cap")) {
        out.horizon_cap = get_size(s, origin, "sim", "horizon_cap");
        if (out.horizon_cap == 0) fail(origin, "sim.horizon_cap: must be positive");
    }
    SimMessage shirk = SimMessage::Silent;
    if (s.contains("shirk_message"))
        shirk = parse_message(s["shirk_message"], origin, "sim.shirk_message");
    if (s.contains("profile")) {
        const json& v = s["profile"];
        if (v.is_string() && v.get<std::string>() == "designed")
            out.profile = SimProfile::designed();
        else if (v.is_string() && v.get<std::string>() == "all-shirk")
            out.profile = SimProfile::all_shirk(shirk);
        else
            fail(origin, "sim.profile: expected \"designed\" or \"all-shirk\"");
    } else if (s.contains("shirk_message")) {
        fail(origin, "sim.shirk_message: only meaningful with profile \"all-shirk\"");
    }
    if (s.contains("transcript_episodes"))
        out.transcript_episodes = get_size(s, origin, "sim", "transcript_episodes");
    return out;
}

OracleSection parse_oracle(const json& o, const std::string& origin) {
    check_keys(o, origin, "oracle", {"horizon", "messages", "step"});
    OracleSection out;
    if (o.contains("horizon")) {
        out.horizon = get_size(o, origin, "oracle", "horizon");
        if (out.horizon == 0) fail(origin, "oracle.horizon: must be positive");
    }
    if (o.contains("messages")) {
        out.messages = get_size(o, origin, "oracle", "messages");
        if (out.messages < 2 || out.messages > 4)
            fail(origin, "oracle.messages: expected 2, 3 or 4");
    }
    if (o.contains("step")) {
        out.step = get_rat(o, origin, "oracle", "step");
        if (out.step <= 0 || out.step > 1) fail(origin, "oracle.step: must lie in (0,1]");
    }
    return out;
}

ShockDensity parse_density(const json& d, const std::string& origin, const std::string& where) {
    const json& kind_v = need(d, origin, where, "kind");
    if (!kind_v.is_string()) fail(origin, where + ".kind: expected a string");
    const std::string kind = kind_v.get<std::string>();
    try {
        if (kind == "uniform") {
            check_keys(d, origin, where, {"kind", "width"});
            return ShockDensity::uniform(get_rat(d, origin, where, "width"));
        }
        if (kind == "triangular") {
            check_keys(d, origin, where, {"kind", "width"});
            return ShockDensity::triangular(get_rat(d, origin, where, "width"));
        }
        if (kind == "piecewise") {
            check_keys(d, origin, where, {"kind", "knots", "values"});
            const json& k = need(d, origin, where, "knots");
            const json& v = need(d, origin, where, "values");
            if (!k.is_array() || !v.is_array())
                fail(origin, where + ": knots and values must be arrays");
            std::vector<Rat> knots, values;
            for (std::size_t i = 0; i < k.size(); ++i)
                knots.push_back(get_rat(k[i], origin, where + ".knots[" + std::to_string(i) + "]"));
            for (std::size_t i = 0; i < v.size(); ++i)
                values.push_back(get_rat(v[i], origin, where + ".values[" + std::to_string(i) + "]"));
            return ShockDensity::piecewise_linear(std::move(knots), std::move(values));
        }
    } catch (const std::invalid_argument& e) {
        fail(origin, where + ": " + e.what());
    }
    fail(origin, where + ".kind: expected one of \"uniform\", \"triangular\", \"piecewise\"");
}

WitnessSection parse_witness(const json& w, const std::string& origin, const GameParams& params) {
    check_keys(w, origin, "witness",
               {"densities", "informative_value", "baseline_value", "phi", "z", "epsilon",
                "witnesses", "probe"});
    WitnessSection out;
    const json& ds = need(w, origin, "witness", "densities");
    if (!ds.is_array() || ds.size() < 2)
        fail(origin, "witness.densities: expected an array of at least two densities");
    for (std::size_t i = 0; i < ds.size(); ++i)
        out.densities.push_back(
            parse_density(ds[i], origin, "witness.densities[" + std::to_string(i) + "]"));

    const std::size_t m = out.densities.size();
    const json& iv = need(w, origin, "witness", "informative_value");
    if (!iv.is_array() || iv.size() != m)
        fail(origin, "witness.informative_value: expected one [high, low] pair per message");
    for (std::size_t i = 0; i < m; ++i) {
        const std::string where = "witness.informative_value[" + std::to_string(i) + "]";
        if (!iv[i].is_array() || iv[i].size() != 2)
            fail(origin, where + ": expected a [high, low] pair");
        out.informative_value.push_back(
            {get_rat(iv[i][0], origin, where + "[0]"), get_rat(iv[i][1], origin, where + "[1]")});
    }
    const json& bv = need(w, origin, "witness", "baseline_value");
    if (!bv.is_array() || bv.size() != m)
        fail(origin, "witness.baseline_value: expected one value per message");
    for (std::size_t i = 0; i < m; ++i)
        out.baseline_value.push_back(
            get_rat(bv[i], origin, "witness.baseline_value[" + std::to_string(i) + "]"));

    out.phi = get_rat(w, origin, "witness", "phi");
    const json& z = need(w, origin, "witness", "z");
    if (!z.is_array() || z.size() != m) fail(origin, "witness.z: expected one value per message");
    for (std::size_t i = 0; i < m; ++i) {
        out.z.push_back(get_rat(z[i], origin, "witness.z[" + std::to_string(i) + "]"));
        if (!is_probability(out.z.back()))
            fail(origin, "witness.z[" + std::to_string(i) + "]: must lie in [0,1]");
    }
    out.epsilon = get_rat(w, origin, "witness", "epsilon");
    if (out.epsilon < 0) fail(origin, "witness.epsilon: must be nonnegative");
    if (w.contains("witnesses")) {
        out.witnesses = get_size(w, origin, "witness", "witnesses");
        if (out.witnesses < 2) fail(origin, "witness.witnesses: need at least two draws");
    }
    if (w.contains("probe")) {
        out.probe = get_size(w, origin, "witness", "probe");
        if (out.probe == 0) fail(origin, "witness.probe: must be positive");
    }
    // Constructing the spec runs the full cross-field validation.
    try {
        WitnessSpec(out.densities, out.informative_value, out.baseline_value, params.R, out.phi);
    } catch (const std::invalid_argument& e) {
        fail(origin, std::string("witness: ") + e.what());
    }
    return out;
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text, const std::string& origin) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        fail(origin, std::string("not valid JSON: ") + e.what());
    }
    if (!j.is_object()) fail(origin, "top level must be a JSON object");
    check_keys(j, origin, "config",
               {"params", "supply", "model", "grid", "scheme", "sim", "oracle", "witness"});

    GameParams params = parse_params(j, origin);
    SupplySpec supply = parse_supply(j, origin);
    SignalModel model = parse_model(j, origin);

    ExperimentConfig cfg{params, supply, model, std::nullopt, std::nullopt,
                         std::nullopt, std::nullopt, std::nullopt};

    if (j.contains("grid")) {
        cfg.grid = parse_grid(j["grid"], origin);
        // Building the ladder checks p_lo < p0 < p_hi and every grid invariant.
        try {
            build_grid(model.p0, cfg.grid->p_lo, cfg.grid->p_hi, model.pi);
        } catch (const std::invalid_argument& e) {
            fail(origin, std::string("grid: ") + e.what());
        }
    }
    if (j.contains("scheme")) {
        if (!cfg.grid) fail(origin, "scheme: requires a grid section");
        cfg.scheme = parse_scheme(j["scheme"], origin);
    }
    if (j.contains("sim")) {
        if (!cfg.grid) fail(origin, "sim: requires a grid section");
        cfg.sim = parse_sim(j["sim"], origin);
    }
    if (j.contains("oracle")) {
        cfg.oracle = parse_oracle(j["oracle"], origin);
        if (!supply.bounded())
            fail(origin, "oracle: requires an explicit pmf supply (bounded support)");
        if (supply.kmax() > 4) fail(origin, "oracle: supply support must not exceed 4 signals");
    }
    if (j.contains("witness")) cfg.witness = parse_witness(j["witness"], origin, params);
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(path + ": cannot open config file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path);
}

Rat effective_rho(const ExperimentConfig& cfg) {
    if (cfg.scheme && cfg.scheme->rho) return *cfg.scheme->rho;
    if (cfg.supply.kind() == SupplySpec::Kind::Geometric) return cfg.supply.rho();
    return Rat(1);
}

}  // namespace attrition
