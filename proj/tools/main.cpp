// ammopt — profit-maximizing liquidity provision: solver, verifier, oracles,
// lambda sweeps, table reproduction, and a sequential trading simulator.
//
// Commands emit machine-readable JSON or CSV only; figures are left to the
// caller's plotting pipeline. Exit codes: 0 success, 1 verification failure,
// 2 config error, 3 numerical failure.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "ammopt/config.hpp"
#include "ammopt/quadrature.hpp"
#include "ammopt/errors.hpp"
#include "ammopt/profit.hpp"
#include "ammopt/simulator.hpp"
#include "ammopt/solver.hpp"

namespace {

using ammopt::AllocationRule;
using ammopt::ConfigError;
using ammopt::RunConfig;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitVerifyFail = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct GlobalOpts {
    std::string config_path;
    int json_indent = 2;
    bool quiet = false;
};

void print_json(const json& j, const GlobalOpts& opts) {
    if (opts.json_indent > 0) {
        std::cout << j.dump(opts.json_indent) << "\n";
    } else {
        std::cout << j.dump() << "\n";
    }
}

/// Writes CSV content to path via a temp file + rename so readers never see a
/// partially written file.
void write_file_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot open output file: " + tmp);
        out << content;
        if (!out.good()) throw ConfigError("failed writing output file: " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        throw ConfigError("failed to move output into place: " + path);
    }
}

RunConfig load(const GlobalOpts& opts) {
    if (opts.config_path.empty()) throw ConfigError("--config PATH is required for this command");
    return ammopt::load_config_file(opts.config_path);
}

void warn_if_inconsistent(const RunConfig& cfg, const GlobalOpts& opts) {
    const ammopt::Assumption1Report rep =
        ammopt::validate_assumption1(cfg.update_rule, cfg.distribution, cfg.p0);
    if (!rep.all_pass() && !opts.quiet) {
        std::cerr << "warning: update rule fails validation at p0 (";
        if (!rep.betweenness_ok) std::cerr << " betweenness";
        if (!rep.monotonicity_ok) std::cerr << " monotonicity";
        if (!rep.fixed_point_ok) std::cerr << " fixed-point";
        if (!rep.consistency_ok) std::cerr << " consistency";
        std::cerr << " ); solving anyway\n";
    }
}

std::string format_csv_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

int cmd_solve(const GlobalOpts& opts, const std::string& emit_curve) {
    const RunConfig cfg = load(opts);
    warn_if_inconsistent(cfg, opts);
    const ammopt::OptimalMechanism mech = ammopt::solve(cfg.distribution, cfg.update_rule, cfg.p0);
    print_json(ammopt::to_json(mech), opts);

    if (!emit_curve.empty()) {
        const ammopt::Support& sup = cfg.distribution.support();
        std::ostringstream csv;
        csv << "p_hat,x_star,y\n";
        constexpr int kPoints = 1001;
        for (int i = 0; i < kPoints; ++i) {
            const double p = ammopt::grid_point(sup.lo, sup.hi, i, kPoints - 1);
            csv << format_csv_number(p) << "," << format_csv_number(mech.allocation.x(p)) << ","
                << format_csv_number(mech.allocation.payment(p)) << "\n";
        }
        write_file_atomic(emit_curve, csv.str());
    }
    return kExitOk;
}

int cmd_verify(const GlobalOpts& opts) {
    const RunConfig cfg = load(opts);
    json report;
    bool pass = true;

    const ammopt::Assumption1Report a1 =
        ammopt::validate_assumption1(cfg.update_rule, cfg.distribution, cfg.p0);
    report["assumption1"] = ammopt::to_json(a1);
    pass = pass && a1.all_pass();

    const ammopt::VirtualValues v(cfg.distribution, cfg.update_rule, cfg.p0);
    const ammopt::RegularityReport reg = ammopt::check_regularity(v);
    report["regularity"] = ammopt::to_json(reg);
    pass = pass && reg.regular();

    const ammopt::OptimalMechanism mech = ammopt::solve(cfg.distribution, cfg.update_rule, cfg.p0);
    report["mechanism"] = ammopt::to_json(mech);

    const ammopt::ICReport ic = ammopt::verify_ic(mech.allocation, 201);
    report["ic"] = ammopt::to_json(ic);
    pass = pass && ic.pass;

    const ammopt::ProfitBreakdown pb =
        ammopt::profit_breakdown(mech.allocation, cfg.distribution, cfg.update_rule);
    const double tol = std::max(1e-6, 1e-6 * std::abs(pb.direct));
    json th1 = ammopt::to_json(pb);
    th1["tolerance"] = tol;
    th1["pass"] = pb.abs_gap <= tol;
    report["theorem_equivalence"] = th1;
    pass = pass && pb.abs_gap <= tol;

    if (cfg.demand_curve) {
        json dc;
        const bool monotone = cfg.demand_curve->is_non_increasing();
        dc["non_increasing"] = monotone;
        if (monotone) {
            try {
                const AllocationRule rule = AllocationRule::from_demand(*cfg.demand_curve, cfg.p0);
                const ammopt::ICReport dc_ic = ammopt::verify_ic(rule, 201);
                dc["ic"] = ammopt::to_json(dc_ic);
                pass = pass && dc_ic.pass;
            } catch (const std::invalid_argument& e) {
                dc["error"] = e.what();
                pass = false;
            }
        } else {
            pass = false;
        }
        report["demand_curve"] = dc;
    }

    report["pass"] = pass;
    print_json(report, opts);
    return pass ? kExitOk : kExitVerifyFail;
}

int cmd_sweep(const GlobalOpts& opts) {
    const RunConfig cfg = load(opts);
    if (!cfg.sweep) throw ConfigError("$.sweep: section required for the sweep command");
    warn_if_inconsistent(cfg, opts);

    const std::vector<ammopt::SweepRow> rows =
        ammopt::sweep_lambda(cfg.distribution, cfg.p0, cfg.sweep->lambdas);

    std::cout << "lambda,p_l,p_h,gap,degenerate\n";
    bool all_regular = true;
    bool monotone = true;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const ammopt::SweepRow& r = rows[i];
        std::string degenerate;
        if (!r.p_l && !r.p_h) {
            degenerate = "both";
        } else if (!r.p_l) {
            degenerate = "lower";
        } else if (!r.p_h) {
            degenerate = "upper";
        }
        std::cout << format_csv_number(r.lambda) << "," << format_csv_number(r.effective_p_l) << ","
                  << format_csv_number(r.effective_p_h) << "," << format_csv_number(r.gap_length)
                  << "," << degenerate << "\n";
        if (!r.regular && !opts.quiet) {
            std::cerr << "warning: virtual values are non-monotone at lambda="
                      << format_csv_number(r.lambda) << "; multi-root fallback used\n";
        }
        all_regular = all_regular && r.regular;
        if (i > 0 && r.gap_length > rows[i - 1].gap_length + 1e-9) monotone = false;
    }
    if (all_regular && !monotone) {
        if (!opts.quiet) std::cerr << "error: gap is not non-increasing in lambda\n";
        return kExitVerifyFail;
    }
    return kExitOk;
}

int cmd_oracle(const GlobalOpts& opts, int grid_n_flag, const std::string& surface_csv) {
    const RunConfig cfg = load(opts);
    int grid_n = cfg.oracle ? cfg.oracle->grid_n : 512;
    if (grid_n_flag > 0) grid_n = grid_n_flag;

    const ammopt::OracleResult res = ammopt::oracle_threshold_search(
        cfg.distribution, cfg.update_rule, cfg.p0, grid_n, !surface_csv.empty());
    print_json(ammopt::to_json(res), opts);

    if (!surface_csv.empty()) {
        std::ostringstream csv;
        csv << "p_l,p_h,profit\n";
        for (const auto& row : res.surface) {
            csv << format_csv_number(row[0]) << "," << format_csv_number(row[1]) << ","
                << format_csv_number(row[2]) << "\n";
        }
        write_file_atomic(surface_csv, csv.str());
    }
    return kExitOk;
}

int cmd_simulate(const GlobalOpts& opts, const std::string& ledger_csv) {
    const RunConfig cfg = load(opts);
    if (!cfg.sim) throw ConfigError("$.sim: section required for the simulate command");
    warn_if_inconsistent(cfg, opts);

    ammopt::MarketConfig mc{cfg.distribution, cfg.update_rule, cfg.p0,
                            cfg.sim->rounds,  cfg.sim->seed,   cfg.sim->resolve_each_round};
    const ammopt::SimulationState state = ammopt::run(mc);

    if (!ledger_csv.empty()) {
        std::ostringstream csv;
        ammopt::write_ledger_csv(state, csv);
        write_file_atomic(ledger_csv, csv.str());
    }
    print_json(ammopt::to_json(ammopt::summarize(state)), opts);
    return kExitOk;
}

/// Lower thresholds for the exponential-report family under the static belief
/// rule, as a fixed CSV: rows p0 in {0.25,...,2}, columns rate in {0.5,1,2},
/// three decimals, ties to even. Output is byte-stable across runs.
int cmd_table() {
    static const double kP0s[] = {0.25, 0.5, 0.75, 1.0, 1.5, 2.0};
    static const double kRates[] = {0.5, 1.0, 2.0};

    std::cout << "p0,rate_0.5,rate_1,rate_2\n";
    char buf[64];
    for (double p0 : kP0s) {
        std::snprintf(buf, sizeof buf, "%g", p0);
        std::cout << buf;
        for (double rate : kRates) {
            const ammopt::OptimalMechanism mech =
                ammopt::solve(ammopt::PriceDistribution::exponential(rate),
                              ammopt::UpdateRule::noise(), p0);
            if (!mech.p_l) throw ammopt::NumericalError("table: lower threshold degenerated");
            const long long milli = static_cast<long long>(std::nearbyint(*mech.p_l * 1000.0));
            std::snprintf(buf, sizeof buf, ",%lld.%03lld", milli / 1000, milli % 1000);
            std::cout << buf;
        }
        std::cout << "\n";
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Optimal liquidity provision toolkit: incentive-compatible market-maker "
                 "mechanisms, no-trade gaps, and sequential trading simulation"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOpts opts;
    app.add_option("--config", opts.config_path, "JSON run configuration file");
    app.add_option("--json-indent", opts.json_indent, "JSON output indentation (0 = compact)");
    app.add_flag("--quiet", opts.quiet, "suppress warnings on stderr");

    auto* solve_cmd = app.add_subcommand("solve", "compute the optimal mechanism");
    std::string emit_curve;
    solve_cmd->add_option("--emit-curve", emit_curve,
                          "write a 1001-point allocation/payment CSV to this file");

    auto* verify_cmd =
        app.add_subcommand("verify", "run update-rule, regularity, IC and profit-equivalence checks");

    auto* sweep_cmd = app.add_subcommand("sweep", "thresholds and gap across linear-rule weights");

    auto* oracle_cmd = app.add_subcommand("oracle", "brute-force threshold search");
    int grid_n_flag = 0;
    std::string surface_csv;
    oracle_cmd->add_option("--grid-n", grid_n_flag, "grid resolution per side (>= 64)");
    oracle_cmd->add_option("--surface-csv", surface_csv, "write the (p_l, p_h, profit) surface");

    auto* simulate_cmd = app.add_subcommand("simulate", "sequential trading simulation");
    std::string ledger_csv;
    simulate_cmd->add_option("--ledger-csv", ledger_csv, "write the per-round trade ledger");

    auto* table_cmd =
        app.add_subcommand("table-fig2", "lower-threshold table for exponential beliefs");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (solve_cmd->parsed()) return cmd_solve(opts, emit_curve);
        if (verify_cmd->parsed()) return cmd_verify(opts);
        if (sweep_cmd->parsed()) return cmd_sweep(opts);
        if (oracle_cmd->parsed()) return cmd_oracle(opts, grid_n_flag, surface_csv);
        if (simulate_cmd->parsed()) return cmd_simulate(opts, ledger_csv);
        if (table_cmd->parsed()) return cmd_table();
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const ammopt::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    }
    return kExitOk;
}
