#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ammopt/distribution.hpp"
#include "ammopt/mechanism.hpp"
#include "ammopt/profit.hpp"
#include "ammopt/simulator.hpp"
#include "ammopt/solver.hpp"
#include "ammopt/update_rule.hpp"

namespace ammopt {

/// Parsed run configuration. Parsing is strict: unknown keys are rejected
/// with the offending JSON path, and every field is type- and range-checked
/// before any computation starts.
struct RunConfig {
    PriceDistribution distribution;
    UpdateRule update_rule;
    double p0 = 0.0;

    struct Sweep {
        std::vector<double> lambdas;
    };
    struct Sim {
        long rounds = 0;
        std::uint64_t seed = 0;
        bool resolve_each_round = true;
    };
    struct Oracle {
        int grid_n = 512;
    };

    std::optional<Sweep> sweep;
    std::optional<Sim> sim;
    std::optional<Oracle> oracle;
    std::optional<DemandCurve> demand_curve;
};

PriceDistribution distribution_from_json(const nlohmann::json& j, const std::string& path);
UpdateRule update_rule_from_json(const nlohmann::json& j, const std::string& path);
DemandCurve demand_curve_from_json(const nlohmann::json& j, const std::string& path);

RunConfig parse_run_config(const nlohmann::json& j);

/// Reads and parses a config file. Malformed JSON reports line and column.
RunConfig load_config_file(const std::string& path);

nlohmann::json to_json(const DemandCurve& g);
nlohmann::json to_json(const OptimalMechanism& mech);
nlohmann::json to_json(const ICReport& rep);
nlohmann::json to_json(const Assumption1Report& rep);
nlohmann::json to_json(const RegularityReport& rep);
nlohmann::json to_json(const ProfitBreakdown& pb);
nlohmann::json to_json(const OracleResult& res);
nlohmann::json to_json(const SummaryStats& stats);

} // namespace ammopt
