#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

using nlohmann::json;

namespace {

struct CmdResult {
    int exit_code = -1;
    std::string out;
};

CmdResult run_cli(const std::string& args) {
    const std::string cmd = std::string(AMMOPT_CLI_PATH) + " " + args + " 2>/dev/null";
    std::array<char, 4096> buf{};
    CmdResult res;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) {
        res.out.append(buf.data(), n);
    }
    const int status = pclose(pipe);
    res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return res;
}

std::string write_config(const std::string& name, const json& j) {
    const std::string path = "/tmp/ammopt_test_" + name + ".json";
    std::ofstream out(path);
    out << j.dump(2);
    return path;
}

json fig1a_config() {
    return json{{"distribution", {{"kind", "uniform"}, {"lo", 0.2}, {"hi", 2.0}}},
                {"update_rule", {{"kind", "noise"}}},
                {"p0", 1.1}};
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("solve prints the mechanism as JSON") {
    const std::string cfg = write_config("solve", fig1a_config());
    const CmdResult res = run_cli("--config " + cfg + " solve");
    REQUIRE(res.exit_code == 0);
    const json j = json::parse(res.out);
    CHECK(j.at("p_l").get<double>() == doctest::Approx(0.65).epsilon(1e-9));
    CHECK(j.at("p_h").get<double>() == doctest::Approx(1.55).epsilon(1e-9));
    CHECK(j.at("expected_profit").get<double>() == doctest::Approx(0.225).epsilon(1e-7));
}

TEST_CASE("solve with perfect information reports both degenerate sides") {
    json cfg_json = fig1a_config();
    cfg_json["update_rule"] = json{{"kind", "perfect_info"}};
    const std::string cfg = write_config("solve_pi", cfg_json);
    const CmdResult res = run_cli("--config " + cfg + " solve");
    REQUIRE(res.exit_code == 0);
    const json j = json::parse(res.out);
    CHECK(j.at("degenerate_sides").size() == 2);
    CHECK(j.at("expected_profit").get<double>() == 0.0);
}

TEST_CASE("malformed config exits 2 with a position") {
    const std::string path = "/tmp/ammopt_test_broken.json";
    {
        std::ofstream out(path);
        out << "{ not json";
    }
    const CmdResult res = run_cli("--config " + path + " solve");
    CHECK(res.exit_code == 2);
}

TEST_CASE("missing config path exits 2") {
    const CmdResult res = run_cli("solve");
    CHECK(res.exit_code == 2);
}

TEST_CASE("emit-curve writes the sampled rule") {
    const std::string cfg = write_config("curve", fig1a_config());
    const std::string out_csv = "/tmp/ammopt_test_curve.csv";
    std::remove(out_csv.c_str());
    const CmdResult res = run_cli("--config " + cfg + " solve --emit-curve " + out_csv);
    REQUIRE(res.exit_code == 0);
    const std::string text = read_file(out_csv);
    REQUIRE_FALSE(text.empty());
    std::istringstream lines(text);
    std::string line;
    std::getline(lines, line);
    CHECK(line == "p_hat,x_star,y");
    int rows = 0;
    while (std::getline(lines, line)) ++rows;
    CHECK(rows == 1001);
}

TEST_CASE("table command matches the frozen golden bytes") {
    const std::string expected =
        "p0,rate_0.5,rate_1,rate_2\n"
        "0.25,0.123,0.121,0.118\n"
        "0.5,0.242,0.235,0.221\n"
        "0.75,0.358,0.342,0.314\n"
        "1,0.470,0.443,0.396\n"
        "1.5,0.684,0.627,0.537\n"
        "2,0.886,0.792,0.653\n";
    const CmdResult a = run_cli("table-fig2");
    REQUIRE(a.exit_code == 0);
    CHECK(a.out == expected);
    const CmdResult b = run_cli("table-fig2");
    CHECK(a.out == b.out);
}

TEST_CASE("verify passes on a consistent configuration") {
    json cfg_json = fig1a_config();
    cfg_json["update_rule"] = json{{"kind", "linear"}, {"lambda", 0.5}};
    const std::string cfg = write_config("verify_ok", cfg_json);
    const CmdResult res = run_cli("--config " + cfg + " verify");
    CHECK(res.exit_code == 0);
    const json j = json::parse(res.out);
    CHECK(j.at("pass").get<bool>());
    CHECK(j.at("assumption1").at("consistency").get<bool>());
    CHECK(j.at("theorem_equivalence").at("pass").get<bool>());
}

TEST_CASE("verify flags an inconsistent prior and exits 1") {
    json cfg_json = fig1a_config();
    cfg_json["update_rule"] = json{{"kind", "linear"}, {"lambda", 0.5}};
    cfg_json["p0"] = 1.4;
    const std::string cfg = write_config("verify_off", cfg_json);
    const CmdResult res = run_cli("--config " + cfg + " verify");
    CHECK(res.exit_code == 1);
    const json j = json::parse(res.out);
    CHECK_FALSE(j.at("assumption1").at("consistency").get<bool>());
    CHECK(j.at("ic").at("pass").get<bool>());
    CHECK(j.at("regularity").at("regular").get<bool>());
}

TEST_CASE("verify rejects an increasing demand curve") {
    json cfg_json = fig1a_config();
    cfg_json["demand_curve"] = json{{"kind", "steps"},
                                    {"breakpoints", json::array({0.2, 1.0, 2.0})},
                                    {"levels", json::array({0.5, 1.0})}};
    const std::string cfg = write_config("verify_adversarial", cfg_json);
    const CmdResult res = run_cli("--config " + cfg + " verify");
    CHECK(res.exit_code == 1);
    const json j = json::parse(res.out);
    CHECK_FALSE(j.at("demand_curve").at("non_increasing").get<bool>());
}

TEST_CASE("sweep emits one monotone row per weight") {
    json cfg_json = fig1a_config();
    cfg_json["sweep"] =
        json{{"lambdas", json::array({0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0})}};
    const std::string cfg = write_config("sweep", cfg_json);
    const CmdResult res = run_cli("--config " + cfg + " sweep");
    REQUIRE(res.exit_code == 0);

    std::istringstream lines(res.out);
    std::string line;
    std::getline(lines, line);
    CHECK(line == "lambda,p_l,p_h,gap,degenerate");
    double prev_gap = 1e300;
    int rows = 0;
    std::string first_row, last_row;
    while (std::getline(lines, line)) {
        if (rows == 0) first_row = line;
        last_row = line;
        ++rows;
        std::istringstream fields(line);
        std::string lambda_s, pl_s, ph_s, gap_s;
        std::getline(fields, lambda_s, ',');
        std::getline(fields, pl_s, ',');
        std::getline(fields, ph_s, ',');
        std::getline(fields, gap_s, ',');
        const double gap = std::stod(gap_s);
        CHECK(gap <= prev_gap + 1e-9);
        prev_gap = gap;
    }
    CHECK(rows == 11);
    CHECK(first_row.find("both") != std::string::npos); // lambda=0: no liquidity at all
    CHECK(last_row.substr(0, 2) == "1,");
    CHECK(last_row.find("0.9") != std::string::npos);   // pure-noise gap
}

TEST_CASE("oracle agrees with solve through the CLI") {
    json cfg_json = fig1a_config();
    cfg_json["oracle"] = json{{"grid_n", 128}};
    const std::string cfg = write_config("oracle", cfg_json);
    const CmdResult res = run_cli("--config " + cfg + " oracle");
    REQUIRE(res.exit_code == 0);
    const json j = json::parse(res.out);
    const double spacing = j.at("grid_spacing").get<double>();
    CHECK(std::abs(j.at("best_pl").get<double>() - 0.65) <= spacing + 1e-12);
    CHECK(std::abs(j.at("best_ph").get<double>() - 1.55) <= spacing + 1e-12);
}

TEST_CASE("simulate is deterministic per seed and writes the ledger") {
    json cfg_json = fig1a_config();
    cfg_json["sim"] = json{{"rounds", 2000}, {"seed", 99}, {"resolve_each_round", false}};
    const std::string cfg = write_config("sim", cfg_json);
    const std::string csv1 = "/tmp/ammopt_test_ledger1.csv";
    const std::string csv2 = "/tmp/ammopt_test_ledger2.csv";
    const CmdResult r1 = run_cli("--config " + cfg + " simulate --ledger-csv " + csv1);
    const CmdResult r2 = run_cli("--config " + cfg + " simulate --ledger-csv " + csv2);
    REQUIRE(r1.exit_code == 0);
    REQUIRE(r2.exit_code == 0);
    CHECK(read_file(csv1) == read_file(csv2));
    CHECK(r1.out == r2.out);
    const json j = json::parse(r1.out);
    CHECK(j.at("rounds").get<long>() == 2000);
    CHECK(j.at("no_trade_fraction").get<double>() > 0.4);
    CHECK(j.at("no_trade_fraction").get<double>() < 0.6);
}
