#include "ammopt/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "ammopt/solver.hpp"

namespace ammopt {

namespace {

double shape_anchor(const MarketConfig& cfg) {
    // For the exponential the preserved quantity is the offset between p0 and
    // the support start, so the anchor is the initial p0 itself.
    if (cfg.shape.kind() == PriceDistribution::Kind::kExponential) return cfg.initial_p0;
    return cfg.shape.anchor();
}

} // namespace

SimulationState run(const MarketConfig& cfg) {
    if (cfg.rounds < 1) throw std::invalid_argument("run: rounds must be >= 1");

    const double anchor0 = shape_anchor(cfg);
    SimulationState state;
    state.current_p0 = cfg.initial_p0;
    state.ledger.reserve(static_cast<std::size_t>(cfg.rounds));

    SampleStream stream(cfg.seed);

    std::optional<OptimalMechanism> base;

    for (long round = 1; round <= cfg.rounds; ++round) {
        const double p0 = state.current_p0;
        const double delta = p0 - anchor0;
        const PriceDistribution d = cfg.shape.shifted(delta);
        const Support& sup = d.support();

        if (!sup.interior(p0)) {
            state.halted = true;
            state.halt_reason = "p0 escaped the re-centered support interior";
            break;
        }

        std::optional<double> p_l;
        std::optional<double> p_h;
        if (cfg.resolve_each_round || !base) {
            OptimalMechanism mech = solve(d, cfg.update, p0);
            p_l = mech.p_l;
            p_h = mech.p_h;
            if (!base) base = std::move(mech);
        } else {
            // Re-anchor the round-1 thresholds: the shift family translates
            // the whole problem, so the solution translates with it. Clamp
            // away ulp-level disagreement with the re-centered support.
            const double shift = p0 - base->p0;
            if (base->p_l) p_l = std::clamp(*base->p_l + shift, sup.lo, p0);
            if (base->p_h) p_h = std::clamp(*base->p_h + shift, p0, sup.hi);
        }
        const AllocationRule rule = AllocationRule::bang_bang(p_l, p_h, sup.lo, sup.hi, p0);

        const double p_hat = d.sample(stream);
        const double x = rule.x(p_hat);
        const double y = rule.payment(p_hat);
        const double p0_after = cfg.update.apply(p0, p_hat);
        const double pnl = y - p0_after * x;

        TradeRecord rec;
        rec.round = round;
        rec.p0_before = p0;
        rec.p_hat = p_hat;
        rec.x = x;
        rec.y = y;
        rec.p0_after = p0_after;
        rec.mark_to_model_pnl = pnl;
        state.ledger.push_back(rec);

        state.inventory -= x;
        state.cash += y;
        state.current_p0 = p0_after;
    }
    return state;
}

SummaryStats summarize(const SimulationState& state) {
    if (state.ledger.empty()) {
        throw std::invalid_argument("summarize: empty ledger");
    }
    SummaryStats s;
    s.rounds = static_cast<long>(state.ledger.size());
    double sum = 0.0;
    for (const TradeRecord& r : state.ledger) {
        if (r.x != 0.0) ++s.trades;
        sum += r.mark_to_model_pnl;
    }
    s.mean_pnl = sum / static_cast<double>(s.rounds);
    double ss = 0.0;
    for (const TradeRecord& r : state.ledger) {
        const double dev = r.mark_to_model_pnl - s.mean_pnl;
        ss += dev * dev;
    }
    s.pnl_variance = s.rounds > 1 ? ss / static_cast<double>(s.rounds - 1) : 0.0;
    s.no_trade_fraction =
        static_cast<double>(s.rounds - s.trades) / static_cast<double>(s.rounds);
    s.final_inventory = state.inventory;
    s.final_cash = state.cash;
    s.halted = state.halted;
    s.halt_reason = state.halt_reason;
    return s;
}

void write_ledger_csv(const SimulationState& state, std::ostream& os) {
    os << "round,p0_before,p_hat,x,y,p0_after,pnl\n";
    char buf[256];
    for (const TradeRecord& r : state.ledger) {
        std::snprintf(buf, sizeof buf, "%ld,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.round,
                      r.p0_before, r.p_hat, r.x, r.y, r.p0_after, r.mark_to_model_pnl);
        os << buf;
    }
}

} // namespace ammopt
