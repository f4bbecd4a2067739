#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

#include "rhb/market_data.hpp"
#include "rhb/static_arbitrage.hpp"

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out, err;
};

fs::path scratch() {
    static const fs::path dir = [] {
        auto d = fs::temp_directory_path() / ("rhb_cli_test_" + std::to_string(::getpid()));
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path write(const std::string& name, const std::string& text) {
    const auto p = scratch() / name;
    std::ofstream(p) << text;
    return p;
}

Run cli(const std::string& args) {
    const auto out = scratch() / "stdout", err = scratch() / "stderr";
    const std::string cmd = std::string(RHB_CLI) + " " + args + " >" + out.string() + " 2>" + err.string();
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

std::vector<std::string> lines(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    for (std::string l; std::getline(in, l);)
        if (!l.empty()) out.push_back(l);
    return out;
}

std::string bs_csv(double sigma, const std::vector<double>& maturities, const std::vector<double>& strikes) {
    std::ostringstream os;
    os.precision(17);
    os << "maturity,moneyness,price\n";
    for (double t : maturities)
        for (double K : strikes) os << t << "," << K << "," << rhb::bs_call_price(std::log(K), sigma * std::sqrt(t)) << "\n";
    return os.str();
}

std::vector<double> default_strikes() {
    std::vector<double> k;
    for (int i = 3; i <= 20; ++i) k.push_back(i / 10.0);
    return k;
}

}  // namespace

TEST_CASE("validate exit codes", "[cli]") {
    const auto good = write("good.csv", bs_csv(0.2, {1.0, 1.5}, {0.8, 0.9, 1.0, 1.1, 1.2}));
    const auto r = cli("--quotes " + good.string() + " validate");
    REQUIRE(r.code == 0);
    REQUIRE(json::parse(r.out)["passed"] == true);

    const auto bad = write("bad.csv", "maturity,moneyness,price\n1,0.9,1.0\n1,1.1,0.05\n");
    const auto b = cli("--quotes " + bad.string() + " validate");
    REQUIRE(b.code == 1);
    const auto rep = json::parse(b.out);
    REQUIRE(rep["passed"] == false);
    bool listed = false;
    for (const auto& v : rep["violations"]) listed = listed || v["condition"] == "price-bound";
    REQUIRE(listed);

    const auto missing = cli("--quotes " + (scratch() / "nope.csv").string() + " validate");
    REQUIRE(missing.code == 2);
    REQUIRE_FALSE(missing.err.empty());
    REQUIRE(cli("--quotes " + write("garbled.csv", "maturity,moneyness,price\n1,x,0.1\n").string() + " validate").code == 2);
}

TEST_CASE("usage and config errors exit 2", "[cli]") {
    REQUIRE(cli("").code == 2);
    REQUIRE(cli("frobnicate").code == 2);
    REQUIRE(cli("--help").code == 0);
    REQUIRE(cli("reproduce 9").code == 2);
    REQUIRE(cli("--config " + write("unknown.json", R"({"colour": 1})").string() + " reproduce 3").code == 2);
    REQUIRE(cli("--config " + write("broken.json", "{").string() + " reproduce 3").code == 2);
    REQUIRE(cli("--format xml reproduce 3").code == 2);
}

TEST_CASE("figure-region output", "[cli]") {
    const auto two = write("two.csv", "maturity,moneyness,price\n1,0.9,0.15\n1,1.1,0.05\n");
    const auto r = cli("--quotes " + two.string() + " figure-region");
    REQUIRE(r.code == 0);
    const auto rows = lines(r.out);
    REQUIRE(rows.front() == "pair,kind,x0,y0,x1,y1");
    int segments = 0, points = 0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].find("_segment") != std::string::npos) ++segments;
        if (rows[i].find(",square,") != std::string::npos || rows[i].find(",circle,") != std::string::npos) ++points;
    }
    REQUIRE(segments == 2);
    REQUIRE(points == 2);
    REQUIRE(rows.size() == 5);

    // many quotes: one envelope piece per adjacent pair
    const auto many = write("many.csv", bs_csv(0.25, {0.5}, {0.8, 0.85, 0.9, 0.95, 1.0, 1.05, 1.1}));
    const auto m = cli("--quotes " + many.string() + " figure-region");
    REQUIRE(m.code == 0);
    REQUIRE(lines(m.out).size() == 1 + 6 * 4);

    REQUIRE(cli("--quotes " + write("empty.csv", "").string() + " figure-region").code == 2);
    REQUIRE(cli("--quotes " + write("header.csv", "maturity,moneyness,price\n").string() + " figure-region").code == 2);

    const auto demo = cli("figure-region");
    REQUIRE(demo.code == 0);
    REQUIRE(demo.err.find("synthetic") != std::string::npos);
}

TEST_CASE("reproduce 3 is machine readable and deterministic", "[cli]") {
    const auto a = cli("--format json reproduce 3");
    REQUIRE(a.code == 0);
    const auto j = json::parse(a.out);
    REQUIRE(j["rows"].size() >= 2);
    REQUIRE(j["rows"][0].contains("p_reference"));
    REQUIRE(j["rows"][0].contains("p_deviation"));
    REQUIRE(j["metadata"]["config_overrides"].empty());
    REQUIRE(cli("--format json reproduce 3").out == a.out);

    const auto cfg = write("override.json", R"({"heston": {"kappa": 1.0, "theta": 0.07, "xi": 0.4, "v0": 0.07, "rho": -0.5}})");
    const auto o = cli("--config " + cfg.string() + " --format json reproduce 3");
    REQUIRE(o.code == 0);
    REQUIRE(json::parse(o.out)["metadata"]["config_overrides"]["heston"]["rho"] == -0.5);

    const auto csv = cli("--format csv reproduce 3");
    REQUIRE(csv.code == 0);
    REQUIRE(lines(csv.out).size() >= 3);
}

TEST_CASE("bound on a coarse grid", "[cli]") {
    const auto quotes = write("bs.csv", bs_csv(0.2, {1.0, 1.5}, default_strikes()));
    const auto measure = scratch() / "measure.csv";
    const auto r = cli("--quotes " + quotes.string() + " bound --grid-points 50 --side super --measure-out " +
                       measure.string());
    REQUIRE(r.code == 0);
    const auto j = json::parse(r.out);
    REQUIRE(j["option_weights"].size() == 36);
    REQUIRE(j["strategy_coeffs"].size() == 6);
    REQUIRE(j["gap"].get<double>() <= 1e-8);
    REQUIRE(j["slack_min"].get<double>() >= -1e-8);
    const double bound = j["bound"].get<double>();
    double recomputed = j["lambda"].get<double>();
    std::vector<double> prices;
    for (double t : {1.0, 1.5})
        for (double K : default_strikes()) prices.push_back(rhb::bs_call_price(std::log(K), 0.2 * std::sqrt(t)));
    for (std::size_t i = 0; i < prices.size(); ++i) recomputed += j["option_weights"][i].get<double>() * prices[i];
    REQUIRE(std::abs(bound - recomputed) <= 1e-10);

    const auto rows = lines(slurp(measure));
    REQUIRE(rows.front() == "s1,s2,weight");
    double mass = 0.0;
    for (std::size_t i = 1; i < rows.size(); ++i) mass += std::stod(rows[i].substr(rows[i].rfind(',') + 1));
    REQUIRE(std::abs(mass - 1.0) <= 1e-9);

    const auto sub = cli("--quotes " + quotes.string() + " bound --grid-points 50 --side sub");
    REQUIRE(sub.code == 0);
    REQUIRE(json::parse(sub.out)["bound"].get<double>() < bound);
    REQUIRE(cli("--quotes " + quotes.string() + " bound --grid-points 50").out == r.out);

    const auto arb = write("arb.csv", "maturity,moneyness,price\n1,0.9,0.05\n1,1.1,0.15\n1.5,0.9,0.16\n1.5,1.1,0.06\n");
    REQUIRE(cli("--quotes " + arb.string() + " bound --grid-points 50").code == 1);
}

TEST_CASE("sensitivity writes the table layout", "[cli]") {
    const auto ps = write("ps.json", R"([{"label": "base", "params": [0, 0]}, {"label": "tiny", "params": [1e-4, 1e-4]}])");
    const auto r = cli("--format csv sensitivity --grid-points 50 --perturbations " + ps.string());
    REQUIRE(r.code == 0);
    const auto rows = lines(r.out);
    REQUIRE(rows.size() == 3);
    REQUIRE(rows[0] == "perturbation,derivative,optimal_value,estimated_value,abs_diff");
    REQUIRE(rows[1].rfind("base,0,", 0) == 0);
    REQUIRE(rows[2].rfind("tiny,", 0) == 0);
    REQUIRE(cli("--format csv sensitivity --grid-points 50 --perturbations " + ps.string()).out == r.out);
}

TEST_CASE("gen-heston and extrapolate produce valid quotes", "[cli]") {
    const auto g = cli("gen-heston");
    REQUIRE(g.code == 0);
    const auto quotes = write("heston.csv", g.out);
    std::ifstream in(quotes);
    const auto q = rhb::load_quotes(in);
    REQUIRE(q.num_maturities() == 2);
    REQUIRE(rhb::validate_quotes(q).passed);

    const auto cfg = write("hx.json", R"({"model": "heston", "traded_strikes": [0.8, 0.9, 1.0, 1.1, 1.2],
                                          "moment_orders": [5.058, 24.21, 6.83, 30.714]})");
    const auto traded = cli("--config " + cfg.string() + " gen-heston");
    REQUIRE(traded.code == 0);
    const auto tq = write("traded.csv", traded.out);
    const auto e = cli("--config " + cfg.string() + " --quotes " + tq.string() + " extrapolate");
    REQUIRE(e.code == 0);
    const auto rows = lines(e.out);
    REQUIRE(rows.front() == "maturity,moneyness,price,total_variance");
    REQUIRE(rows.size() == 1 + 36);

    const auto bad = write("steep.json", R"({"model": "bs", "slopes": [0.9, 0.9]})");
    const auto s = cli("--config " + bad.string() + " extrapolate");
    REQUIRE(s.code == 1);
    REQUIRE(s.err.find("inadmissible extrapolation") != std::string::npos);
}
