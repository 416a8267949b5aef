#include "ammopt/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace ammopt {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
    throw ConfigError(path + ": " + msg);
}

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& path) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!allowed.count(it.key())) {
            fail(path + "." + it.key(), "unknown field");
        }
    }
}

void require_object(const json& j, const std::string& path) {
    if (!j.is_object()) fail(path, "expected a JSON object");
}

double get_number(const json& obj, const std::string& key, const std::string& path) {
    if (!obj.contains(key)) fail(path + "." + key, "missing required field");
    const json& v = obj.at(key);
    if (!v.is_number()) fail(path + "." + key, "expected a number");
    return v.get<double>();
}

std::string get_string(const json& obj, const std::string& key, const std::string& path) {
    if (!obj.contains(key)) fail(path + "." + key, "missing required field");
    const json& v = obj.at(key);
    if (!v.is_string()) fail(path + "." + key, "expected a string");
    return v.get<std::string>();
}

json optional_or_null(const std::optional<double>& v) {
    if (v) return *v;
    return nullptr;
}

} // namespace

PriceDistribution distribution_from_json(const json& j, const std::string& path) {
    require_object(j, path);
    const std::string kind = get_string(j, "kind", path);
    try {
        if (kind == "uniform") {
            reject_unknown_keys(j, {"kind", "lo", "hi"}, path);
            return PriceDistribution::uniform(get_number(j, "lo", path), get_number(j, "hi", path));
        }
        if (kind == "exponential") {
            reject_unknown_keys(j, {"kind", "rate", "truncation_quantile"}, path);
            const double rate = get_number(j, "rate", path);
            if (j.contains("truncation_quantile")) {
                return PriceDistribution::exponential(rate,
                                                      get_number(j, "truncation_quantile", path));
            }
            return PriceDistribution::exponential(rate);
        }
        if (kind == "truncated_normal") {
            reject_unknown_keys(j, {"kind", "mean", "stdev", "lo", "hi"}, path);
            return PriceDistribution::truncated_normal(
                get_number(j, "mean", path), get_number(j, "stdev", path),
                get_number(j, "lo", path), get_number(j, "hi", path));
        }
        if (kind == "piecewise_linear_pdf") {
            reject_unknown_keys(j, {"kind", "knots"}, path);
            if (!j.contains("knots") || !j.at("knots").is_array()) {
                fail(path + ".knots", "expected an array of [price, density] pairs");
            }
            std::vector<std::pair<double, double>> knots;
            for (const json& k : j.at("knots")) {
                if (!k.is_array() || k.size() != 2 || !k[0].is_number() || !k[1].is_number()) {
                    fail(path + ".knots", "each knot must be a [price, density] pair");
                }
                knots.emplace_back(k[0].get<double>(), k[1].get<double>());
            }
            return PriceDistribution::piecewise_linear_pdf(std::move(knots));
        }
    } catch (const std::invalid_argument& e) {
        fail(path, e.what());
    }
    fail(path + ".kind", "unknown distribution kind '" + kind + "'");
}

UpdateRule update_rule_from_json(const json& j, const std::string& path) {
    require_object(j, path);
    const std::string kind = get_string(j, "kind", path);
    try {
        if (kind == "noise") {
            reject_unknown_keys(j, {"kind"}, path);
            return UpdateRule::noise();
        }
        if (kind == "perfect_info") {
            reject_unknown_keys(j, {"kind"}, path);
            return UpdateRule::perfect_info();
        }
        if (kind == "linear") {
            reject_unknown_keys(j, {"kind", "lambda"}, path);
            return UpdateRule::linear(get_number(j, "lambda", path));
        }
    } catch (const std::invalid_argument& e) {
        fail(path, e.what());
    }
    fail(path + ".kind", "unknown update rule kind '" + kind + "'");
}

DemandCurve demand_curve_from_json(const json& j, const std::string& path) {
    require_object(j, path);
    const std::string kind = get_string(j, "kind", path);
    try {
        if (kind == "cpmm") {
            reject_unknown_keys(j, {"kind", "c", "lo", "hi"}, path);
            return DemandCurve::cpmm(get_number(j, "c", path), get_number(j, "lo", path),
                                     get_number(j, "hi", path));
        }
        if (kind == "steps") {
            reject_unknown_keys(j, {"kind", "breakpoints", "levels"}, path);
            auto numbers = [&](const char* key) {
                if (!j.contains(key) || !j.at(key).is_array()) {
                    fail(path + "." + key, "expected an array of numbers");
                }
                std::vector<double> out;
                for (const json& v : j.at(key)) {
                    if (!v.is_number()) fail(path + "." + key, "expected an array of numbers");
                    out.push_back(v.get<double>());
                }
                return out;
            };
            return DemandCurve::steps(numbers("breakpoints"), numbers("levels"));
        }
    } catch (const std::invalid_argument& e) {
        fail(path, e.what());
    }
    fail(path + ".kind", "unknown demand curve kind '" + kind + "'");
}

RunConfig parse_run_config(const json& j) {
    require_object(j, "$");
    reject_unknown_keys(
        j, {"distribution", "update_rule", "p0", "sweep", "sim", "oracle", "demand_curve"}, "$");
    if (!j.contains("distribution")) fail("$.distribution", "missing required field");
    if (!j.contains("update_rule")) fail("$.update_rule", "missing required field");

    RunConfig cfg{distribution_from_json(j.at("distribution"), "$.distribution"),
                  update_rule_from_json(j.at("update_rule"), "$.update_rule"),
                  get_number(j, "p0", "$"),
                  std::nullopt,
                  std::nullopt,
                  std::nullopt,
                  std::nullopt};

    const Support& sup = cfg.distribution.support();
    if (!sup.interior(cfg.p0)) {
        fail("$.p0", "p0 must lie strictly inside the distribution support");
    }

    if (j.contains("sweep")) {
        const json& s = j.at("sweep");
        require_object(s, "$.sweep");
        reject_unknown_keys(s, {"lambdas"}, "$.sweep");
        if (!s.contains("lambdas") || !s.at("lambdas").is_array() || s.at("lambdas").empty()) {
            fail("$.sweep.lambdas", "expected a non-empty array of weights");
        }
        RunConfig::Sweep sweep;
        for (const json& v : s.at("lambdas")) {
            if (!v.is_number()) fail("$.sweep.lambdas", "expected numbers");
            const double lambda = v.get<double>();
            if (!(lambda >= 0.0 && lambda <= 1.0)) {
                fail("$.sweep.lambdas", "weights must lie in [0,1]");
            }
            sweep.lambdas.push_back(lambda);
        }
        cfg.sweep = std::move(sweep);
    }

    if (j.contains("sim")) {
        const json& s = j.at("sim");
        require_object(s, "$.sim");
        reject_unknown_keys(s, {"rounds", "seed", "resolve_each_round"}, "$.sim");
        RunConfig::Sim sim;
        const double rounds = get_number(s, "rounds", "$.sim");
        if (!(rounds >= 1.0) || rounds != std::floor(rounds)) {
            fail("$.sim.rounds", "expected a positive integer");
        }
        sim.rounds = static_cast<long>(rounds);
        const double seed = get_number(s, "seed", "$.sim");
        if (seed < 0.0 || seed != std::floor(seed)) {
            fail("$.sim.seed", "expected a non-negative integer");
        }
        sim.seed = static_cast<std::uint64_t>(seed);
        if (s.contains("resolve_each_round")) {
            if (!s.at("resolve_each_round").is_boolean()) {
                fail("$.sim.resolve_each_round", "expected a boolean");
            }
            sim.resolve_each_round = s.at("resolve_each_round").get<bool>();
        }
        cfg.sim = sim;
    }

    if (j.contains("oracle")) {
        const json& s = j.at("oracle");
        require_object(s, "$.oracle");
        reject_unknown_keys(s, {"grid_n"}, "$.oracle");
        RunConfig::Oracle oracle;
        const double grid_n = get_number(s, "grid_n", "$.oracle");
        if (grid_n < 64.0 || grid_n != std::floor(grid_n)) {
            fail("$.oracle.grid_n", "expected an integer >= 64");
        }
        oracle.grid_n = static_cast<int>(grid_n);
        cfg.oracle = oracle;
    }

    if (j.contains("demand_curve")) {
        cfg.demand_curve = demand_curve_from_json(j.at("demand_curve"), "$.demand_curve");
    }
    return cfg;
}

RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::string text = buffer.str();

    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        // Translate the byte offset into line and column.
        std::size_t line = 1, col = 1;
        const std::size_t limit = std::min(text.size(), e.byte > 0 ? e.byte - 1 : 0);
        for (std::size_t i = 0; i < limit; ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ConfigError("config parse error at line " + std::to_string(line) + ", column " +
                          std::to_string(col) + ": " + e.what());
    }
    return parse_run_config(j);
}

json to_json(const DemandCurve& g) {
    const auto& segs = g.segments();
    if (segs.size() == 1 && segs.front().kind == DemandCurve::SegmentKind::kCpmm) {
        return json{{"kind", "cpmm"}, {"c", segs.front().param}, {"lo", g.lo()}, {"hi", g.hi()}};
    }
    json breakpoints = json::array();
    json levels = json::array();
    breakpoints.push_back(g.lo());
    for (const auto& seg : segs) {
        if (seg.kind != DemandCurve::SegmentKind::kConstant) {
            throw std::invalid_argument("to_json: mixed demand curves have no JSON form");
        }
        breakpoints.push_back(seg.hi);
        levels.push_back(seg.param);
    }
    return json{{"kind", "steps"}, {"breakpoints", breakpoints}, {"levels", levels}};
}

json to_json(const OptimalMechanism& mech) {
    json degenerate = json::array();
    if (!mech.p_l) degenerate.push_back("lower");
    if (!mech.p_h) degenerate.push_back("upper");
    return json{{"p_l", mech.effective_p_l},
                {"p_h", mech.effective_p_h},
                {"gap_length", mech.gap_length},
                {"expected_profit", mech.expected_profit},
                {"degenerate_sides", degenerate},
                {"roots",
                 {{"upper", mech.diagnostics.roots_upper}, {"lower", mech.diagnostics.roots_lower}}}};
}

json to_json(const ICReport& rep) {
    return json{{"worst_violation", rep.worst_violation},
                {"at_true_p", rep.at_true_p},
                {"at_reported_p", rep.at_reported_p},
                {"pass", rep.pass}};
}

json to_json(const Assumption1Report& rep) {
    return json{{"betweenness", rep.betweenness_ok},
                {"monotonicity", rep.monotonicity_ok},
                {"fixed_point", rep.fixed_point_ok},
                {"consistency", rep.consistency_ok},
                {"expected_update", rep.expected_update},
                {"consistency_gap", rep.consistency_gap},
                {"pass", rep.all_pass()}};
}

json to_json(const RegularityReport& rep) {
    json j{{"upper_monotone", rep.upper_monotone},
           {"lower_monotone", rep.lower_monotone},
           {"worst_violation", rep.worst_violation},
           {"regular", rep.regular()}};
    if (!rep.regular()) {
        j["violating_interval"] = json::array({rep.violating_lo, rep.violating_hi});
    }
    return j;
}

json to_json(const ProfitBreakdown& pb) {
    return json{{"direct", pb.direct},
                {"virtual_welfare", pb.virtual_welfare},
                {"abs_gap", pb.abs_gap},
                {"quadrature_error_estimate", pb.quadrature_error_estimate}};
}

json to_json(const OracleResult& res) {
    json j{{"best_pl", optional_or_null(res.best_pl)},
           {"best_ph", optional_or_null(res.best_ph)},
           {"best_profit", res.best_profit},
           {"grid_spacing", res.grid_spacing}};
    if (!res.levels.empty()) {
        j["levels"] = res.levels;
        j["cell_edges"] = res.cell_edges;
    }
    return j;
}

json to_json(const SummaryStats& stats) {
    json j{{"rounds", stats.rounds},
           {"trades", stats.trades},
           {"no_trade_fraction", stats.no_trade_fraction},
           {"mean_pnl", stats.mean_pnl},
           {"pnl_variance", stats.pnl_variance},
           {"final_inventory", stats.final_inventory},
           {"final_cash", stats.final_cash},
           {"halted", stats.halted}};
    if (stats.halted) j["halt_reason"] = stats.halt_reason;
    return j;
}

} // namespace ammopt
