#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "ammopt/distribution.hpp"
#include "ammopt/update_rule.hpp"

namespace ammopt {

/// Sequential-trading setup. The configured distribution acts as a shape:
/// each round it is translated so its anchor (mean for uniform and
/// truncated_normal, location offset for exponential, numeric mean for
/// piecewise densities) tracks the current price estimate.
struct MarketConfig {
    PriceDistribution shape;
    UpdateRule update;
    double initial_p0 = 0.0;
    long rounds = 0;
    std::uint64_t seed = 0;
    bool resolve_each_round = true;
};

struct TradeRecord {
    long round = 0;
    double p0_before = 0.0;
    double p_hat = 0.0;
    double x = 0.0;
    double y = 0.0;
    double p0_after = 0.0;
    double mark_to_model_pnl = 0.0; // y - pi(p0_before, p_hat) * x
};

struct SimulationState {
    double current_p0 = 0.0;
    double inventory = 0.0; // risky asset, signed; the maker delivers x per trade
    double cash = 0.0;      // numeraire received
    std::vector<TradeRecord> ledger;
    bool halted = false;
    std::string halt_reason;
};

/// Runs the configured number of rounds: re-center the distribution at the
/// current p0, solve (or re-anchor the round-1 mechanism), draw a report,
/// execute, update the estimate. Deterministic per seed. Halts with a partial
/// ledger if p0 ever escapes the re-centered support's interior.
SimulationState run(const MarketConfig& config);

struct SummaryStats {
    long rounds = 0;
    long trades = 0;
    double no_trade_fraction = 0.0;
    double mean_pnl = 0.0;
    double pnl_variance = 0.0; // unbiased sample variance
    double final_inventory = 0.0;
    double final_cash = 0.0;
    bool halted = false;
    std::string halt_reason;
};

SummaryStats summarize(const SimulationState& state);

/// CSV stream: round,p0_before,p_hat,x,y,p0_after,pnl with full 17-digit
/// round-trippable formatting.
void write_ledger_csv(const SimulationState& state, std::ostream& os);

} // namespace ammopt
