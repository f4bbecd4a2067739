// Command-line front end: quote validation, wing extrapolation, Heston quote
// generation, hedging bounds, sensitivity studies and table reproduction.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "rhb/errors.hpp"
#include "rhb/experiments.hpp"
#include "rhb/heston_pricer.hpp"
#include "rhb/hedging_lp.hpp"
#include "rhb/market_data.hpp"
#include "rhb/sensitivity.hpp"
#include "rhb/static_arbitrage.hpp"
#include "rhb/wing_extrapolation.hpp"

#ifndef RHB_DATA_DIR
#define RHB_DATA_DIR "data"
#endif

using json = nlohmann::json;

namespace {

// Configuration problems (bad JSON, unknown keys, bad flags) exit with 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

int exit_code(rhb::ErrorKind k) {
    switch (k) {
        case rhb::ErrorKind::Domain:
        case rhb::ErrorKind::Validation:
        case rhb::ErrorKind::Arbitrage:
        case rhb::ErrorKind::Unbounded: return 1;
        case rhb::ErrorKind::Parse:
        case rhb::ErrorKind::Io: return 2;
        case rhb::ErrorKind::Numerical: return 3;
    }
    return 3;
}

struct Globals {
    std::string quotes;
    std::string config;
    std::string out;
    std::string format = "md";
};

class Output {
public:
    explicit Output(const std::string& path) {
        if (!path.empty()) {
            file_.open(path);
            if (!file_) throw rhb::IoError("cannot open output file '" + path + "'");
        }
    }
    std::ostream& os() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

private:
    std::ofstream file_;
};

rhb::CallQuoteSet read_quotes(const std::string& path) {
    if (path.empty()) throw ConfigError("--quotes is required");
    std::ifstream in(path);
    if (!in) throw rhb::IoError("cannot open quotes file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    std::string text = buf.str();
    std::size_t lines = 0;
    for (std::string line; std::getline(buf, line);)
        if (line.find_first_not_of(" \t\r") != std::string::npos) ++lines;
    if (lines <= 1) throw rhb::IoError("no quotes: '" + path + "' is empty");
    std::istringstream is(text);
    return rhb::load_quotes(is);
}

json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw rhb::IoError("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

std::string fmt(double v, int prec = 6) {
    std::ostringstream os;
    os << std::setprecision(prec) << v;
    return os.str();
}

std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

// ---------------------------------------------------------------------------
// Experiment configuration
// ---------------------------------------------------------------------------

struct ExperimentConfig {
    std::string model = "bs";
    double sigma = 0.2;
    std::vector<double> maturities{1.0, 1.5};
    std::vector<double> strikes = rhb::default_strikes();
    std::vector<double> slopes;  // bs base slopes, default 0
    rhb::HestonParams heston{1.0, 0.07, 0.4, 0.07, -0.8};
    std::vector<double> traded_strikes = rhb::heston_traded_strikes();
    std::vector<double> moment_orders{5.058, 24.21, 6.83, 30.714};
    rhb::GridSpec grid;
    std::vector<rhb::Perturbation> perturbations;
    std::vector<double> target_strikes;
    json overrides = json::object();  // every key the user supplied, echoed in outputs

    static ExperimentConfig from_json(const json& j) {
        static const std::set<std::string> known{"model",         "sigma",          "maturities", "strikes",
                                                 "slopes",        "heston",         "traded_strikes",
                                                 "moment_orders", "grid",           "perturbations",
                                                 "target_strikes"};
        if (!j.is_object()) throw ConfigError("config must be a JSON object");
        ExperimentConfig c;
        try {
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!known.count(it.key())) throw ConfigError("unknown config key '" + it.key() + "'");
                c.overrides[it.key()] = it.value();
            }
            if (j.contains("model")) c.model = j["model"].get<std::string>();
            if (c.model != "bs" && c.model != "heston") throw ConfigError("model must be 'bs' or 'heston'");
            if (j.contains("sigma")) c.sigma = j["sigma"].get<double>();
            if (j.contains("maturities")) c.maturities = j["maturities"].get<std::vector<double>>();
            if (j.contains("strikes")) c.strikes = j["strikes"].get<std::vector<double>>();
            if (j.contains("slopes")) c.slopes = j["slopes"].get<std::vector<double>>();
            if (j.contains("heston")) {
                const auto& h = j["heston"];
                c.heston = {h.at("kappa").get<double>(), h.at("theta").get<double>(), h.at("xi").get<double>(),
                            h.at("v0").get<double>(), h.at("rho").get<double>()};
            }
            if (j.contains("traded_strikes")) c.traded_strikes = j["traded_strikes"].get<std::vector<double>>();
            if (j.contains("moment_orders")) c.moment_orders = j["moment_orders"].get<std::vector<double>>();
            if (j.contains("grid")) {
                const auto& g = j["grid"];
                for (auto it = g.begin(); it != g.end(); ++it)
                    if (it.key() != "points" && it.key() != "s_max" && it.key() != "degree" && it.key() != "fs_strike")
                        throw ConfigError("unknown grid key '" + it.key() + "'");
                if (g.contains("points")) c.grid.points = g["points"].get<std::size_t>();
                if (g.contains("s_max")) c.grid.s_max = g["s_max"].get<double>();
                if (g.contains("degree")) c.grid.degree = g["degree"].get<unsigned>();
                if (g.contains("fs_strike")) c.grid.fs_strike = g["fs_strike"].get<double>();
            }
            if (j.contains("perturbations")) c.perturbations = parse_perturbations(j["perturbations"]);
            if (j.contains("target_strikes")) c.target_strikes = j["target_strikes"].get<std::vector<double>>();
        } catch (const json::exception& e) {
            throw ConfigError(std::string("config: ") + e.what());
        }
        if (c.slopes.empty()) c.slopes.assign(c.maturities.size(), 0.0);
        return c;
    }

    static std::vector<rhb::Perturbation> parse_perturbations(const json& j) {
        std::vector<rhb::Perturbation> out;
        if (!j.is_array()) throw ConfigError("perturbations must be a list");
        for (const auto& e : j) {
            if (e.is_object()) {
                out.push_back({e.at("label").get<std::string>(), e.at("params").get<std::vector<double>>()});
            } else if (e.is_array()) {
                out.push_back({fmt(e.at(0).get<double>()), e.get<std::vector<double>>()});
            } else {
                throw ConfigError("perturbation entries must be objects {label, params} or arrays");
            }
        }
        return out;
    }

    [[nodiscard]] rhb::BsExperiment bs() const {
        rhb::BsExperiment e;
        e.sigma = sigma;
        e.maturities = maturities;
        e.strikes = strikes;
        e.grid = grid;
        return e;
    }

    [[nodiscard]] rhb::HestonExperiment heston_experiment() const {
        rhb::HestonExperiment e;
        e.params = heston;
        e.maturities = maturities;
        e.traded = traded_strikes;
        e.strikes = strikes;
        e.moment_orders = moment_orders;
        e.grid = grid;
        return e;
    }
};

ExperimentConfig load_config(const std::string& path) {
    if (path.empty()) return ExperimentConfig::from_json(json::object());
    return ExperimentConfig::from_json(read_json(path));
}

json report_json(const rhb::ValidationReport& rep) {
    json v = json::array();
    for (const auto& x : rep.violations)
        v.push_back({{"condition", x.condition}, {"maturity", x.maturity}, {"strikes", x.strikes},
                     {"magnitude", x.magnitude}});
    return {{"passed", rep.passed}, {"violations", v}};
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

int cmd_validate(const Globals& g) {
    const auto q = read_quotes(g.quotes);
    const auto rep = rhb::validate_quotes(q);
    Output out(g.out);
    out.os() << report_json(rep).dump(2) << "\n";
    return rep.passed ? 0 : 1;
}

int cmd_extrapolate(const Globals& g) {
    const auto cfg = load_config(g.config);
    if (g.config.empty()) throw ConfigError("--config is required");
    const std::vector<double> targets = cfg.target_strikes.empty() ? cfg.strikes : cfg.target_strikes;
    rhb::TotalVarianceSurface surface;
    if (cfg.model == "bs") {
        surface = rhb::bs_flat_wing_surface(cfg.sigma, cfg.maturities, cfg.slopes);
    } else {
        const auto q = read_quotes(g.quotes);
        const auto nodes = rhb::quoted_variance(q);
        std::vector<double> p, qq;
        if (cfg.overrides.contains("moment_orders")) {
            if (cfg.moment_orders.size() != 2 * nodes.size())
                throw ConfigError("moment_orders needs (q, p) per maturity");
            for (std::size_t i = 0; i < nodes.size(); ++i) {
                qq.push_back(cfg.moment_orders[2 * i]);
                p.push_back(cfg.moment_orders[2 * i + 1]);
            }
        } else {
            for (const auto& n : nodes) {
                const auto cm = rhb::heston_critical_moments(cfg.heston, n.maturity);
                p.push_back(cm.p_star);
                qq.push_back(cm.q_star);
            }
        }
        surface = rhb::heston_wing_surface(nodes, p, qq);
    }
    std::vector<std::vector<double>> strikes(surface.num_maturities(), targets);
    const auto prices = rhb::extrapolated_call_prices(surface, strikes);
    Output out(g.out);
    out.os() << "maturity,moneyness,price,total_variance\n" << std::setprecision(12);
    std::size_t idx = 0;
    for (std::size_t s = 0; s < surface.num_maturities(); ++s)
        for (double K : targets)
            out.os() << surface.slice(s).maturity() << "," << K << "," << prices[idx++] << ","
                     << surface.w(std::log(K), s) << "\n";
    return 0;
}

int cmd_gen_heston(const Globals& g) {
    const auto cfg = load_config(g.config);
    const auto q = rhb::heston_quotes(cfg.heston, cfg.maturities, cfg.overrides.contains("traded_strikes")
                                                                      ? cfg.traded_strikes
                                                                      : cfg.strikes);
    Output out(g.out);
    out.os() << "maturity,moneyness,price\n" << std::setprecision(15);
    for (const auto& c : q.quotes()) out.os() << c.maturity << "," << c.moneyness << "," << c.price << "\n";
    return 0;
}

struct BoundFlags {
    std::string payoff = "forward-start-straddle";
    double fs_strike = 1.0;
    std::string side = "super";
    std::size_t grid_points = 500;
    double grid_max = 5.0;
    unsigned degree = 4;
    std::string measure_out;
};

rhb::HedgeSide parse_side(const std::string& s) {
    if (s == "super") return rhb::HedgeSide::Super;
    if (s == "sub") return rhb::HedgeSide::Sub;
    throw ConfigError("--side must be super or sub");
}

int cmd_bound(const Globals& g, const BoundFlags& f) {
    const auto q = read_quotes(g.quotes);
    const auto rep = rhb::validate_quotes(q);
    if (!rep.passed) {
        std::cerr << report_json(rep).dump(2) << "\n";
        throw rhb::ValidationError("quotes fail the static-arbitrage checks");
    }
    if (f.payoff != "forward-start-straddle") throw ConfigError("unsupported payoff '" + f.payoff + "'");
    const auto grid = rhb::build_grid(f.grid_points, f.grid_max, q.maturities());
    const auto inst = rhb::InstrumentSet::from_quotes(q, grid);
    const auto basis = rhb::StrategyBasis::uniform_degree(grid.num_maturities(), f.degree);
    const auto payoff = rhb::forward_start_straddle(f.fs_strike);
    auto [h, m] = rhb::hedge(parse_side(f.side), payoff, inst, basis, grid);
    const auto dr = rhb::duality_report(h, m);
    json j{{"side", f.side},
           {"bound", h.bound},
           {"lambda", h.lambda},
           {"option_weights", h.w},
           {"strategy_coeffs", h.a},
           {"gap", dr.relative_gap},
           {"slack_min", h.slack_min},
           {"certificates",
            {{"primal", h.certificates.primal},
             {"dual", h.certificates.dual},
             {"complementarity", h.certificates.complementarity},
             {"gap", h.certificates.gap}}},
           {"grid", {{"points", f.grid_points}, {"s_max", f.grid_max}, {"convention", "s_i = i*s_max/n, i=1..n (zero excluded)"}}},
           {"basis_degree", f.degree}};
    Output out(g.out);
    out.os() << j.dump(2) << "\n";
    if (!f.measure_out.empty()) {
        std::ofstream mo(f.measure_out);
        if (!mo) throw rhb::IoError("cannot open '" + f.measure_out + "'");
        mo << "s1,s2,weight\n" << std::setprecision(12);
        for (std::size_t j2 = 0; j2 < m.weights.size(); ++j2) {
            if (m.weights[j2] <= 0.0) continue;
            const auto s = grid.state(j2);
            for (std::size_t t = 0; t < s.size(); ++t) mo << s[t] << ",";
            mo << m.weights[j2] << "\n";
        }
    }
    return 0;
}

template <class Setup>
rhb::SensitivityReport run_study(const Setup& setup, rhb::HedgeSide side, const std::vector<rhb::Perturbation>& ps) {
    return rhb::perturbation_study(setup, side, ps);
}

void write_sensitivity_csv(std::ostream& os, const rhb::SensitivityReport& rep) {
    os << "perturbation,derivative,optimal_value,estimated_value,abs_diff\n" << std::setprecision(10);
    for (const auto& r : rep.rows) {
        if (!r.valid) {
            os << r.label << ",,,,\n";
            continue;
        }
        os << r.label << "," << r.derivative << "," << r.optimal_value << "," << r.estimated_value << "," << r.abs_diff
           << "\n";
    }
}

int cmd_sensitivity(const Globals& g, const BoundFlags& f, const std::string& perturbations_path,
                    const std::vector<std::string>& explicit_flags) {
    auto cfg = load_config(g.config);
    for (const auto& name : explicit_flags) {
        if (name == "grid-points") cfg.grid.points = f.grid_points;
        if (name == "grid-max") cfg.grid.s_max = f.grid_max;
        if (name == "basis-degree") cfg.grid.degree = f.degree;
        if (name == "fs-strike") cfg.grid.fs_strike = f.fs_strike;
    }
    std::vector<rhb::Perturbation> ps = cfg.perturbations;
    if (!perturbations_path.empty()) ps = ExperimentConfig::parse_perturbations(read_json(perturbations_path));
    const auto side = parse_side(f.side);
    rhb::SensitivityReport rep;
    if (cfg.model == "bs") {
        if (ps.empty()) ps = rhb::bs_slope_perturbations(rhb::table1_slopes(), cfg.maturities.size());
        auto setup = cfg.bs().setup();
        setup.base_params = cfg.slopes;
        rep = run_study(setup, side, ps);
    } else {
        if (ps.empty()) ps = rhb::heston_moment_sets();
        rep = run_study(cfg.heston_experiment().setup(), side, ps);
    }
    Output out(g.out);
    write_sensitivity_csv(out.os(), rep);
    for (const auto& r : rep.rows)
        if (!r.valid) std::cerr << "row " << r.label << " not solved: " << r.note << "\n";
    return 0;
}

// --- reproduce -----------------------------------------------------------

json load_reference() {
    return read_json(std::string(RHB_DATA_DIR) + "/reference_tables.json");
}

struct Cell {
    std::string name;
    double value;
    std::optional<double> reference;
};

struct Table {
    std::string title;
    std::vector<std::string> row_labels;
    std::vector<std::vector<Cell>> rows;
    json metadata;
};

void render(const Table& t, const std::string& format, std::ostream& os) {
    if (format == "json") {
        json rows = json::array();
        for (std::size_t i = 0; i < t.rows.size(); ++i) {
            json r{{"label", t.row_labels[i]}};
            for (const auto& c : t.rows[i]) {
                r[c.name] = c.value;
                if (c.reference) {
                    r[c.name + "_reference"] = *c.reference;
                    r[c.name + "_deviation"] = c.value - *c.reference;
                }
            }
            rows.push_back(r);
        }
        os << json{{"title", t.title}, {"metadata", t.metadata}, {"rows", rows}}.dump(2) << "\n";
        return;
    }
    if (format == "csv") {
        os << "label";
        if (!t.rows.empty())
            for (const auto& c : t.rows[0]) os << "," << c.name << "," << c.name << "_reference," << c.name << "_deviation";
        os << "\n" << std::setprecision(10);
        for (std::size_t i = 0; i < t.rows.size(); ++i) {
            os << t.row_labels[i];
            for (const auto& c : t.rows[i]) {
                os << "," << c.value << ",";
                if (c.reference) os << *c.reference << "," << (c.value - *c.reference);
                else os << ",";
            }
            os << "\n";
        }
        return;
    }
    os << "## " << t.title << "\n\n";
    os << "metadata: " << t.metadata.dump() << "\n\n";
    if (t.rows.empty()) return;
    os << "| row |";
    for (const auto& c : t.rows[0]) os << " " << c.name << " | ref | dev |";
    os << "\n|---|";
    for (std::size_t i = 0; i < t.rows[0].size(); ++i) os << "---|---|---|";
    os << "\n";
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        os << "| " << t.row_labels[i] << " |";
        for (const auto& c : t.rows[i]) {
            os << " " << sci(c.value) << " |";
            if (c.reference) os << " " << sci(*c.reference) << " | " << sci(c.value - *c.reference) << " |";
            else os << " - | - |";
        }
        os << "\n";
    }
}

Table sensitivity_table(int id, const ExperimentConfig& cfg, const json& ref) {
    const std::string key = "table" + std::to_string(id);
    const json& rt = ref.at(key);
    const auto side = rt.at("side").get<std::string>() == "super" ? rhb::HedgeSide::Super : rhb::HedgeSide::Sub;
    const auto t0 = std::chrono::steady_clock::now();
    rhb::SensitivityReport rep;
    if (id <= 2) {
        auto ps = cfg.perturbations.empty() ? rhb::bs_slope_perturbations(rhb::table1_slopes(), cfg.maturities.size())
                                            : cfg.perturbations;
        rep = run_study(cfg.bs().setup(), side, ps);
    } else {
        auto ps = cfg.perturbations.empty() ? rhb::heston_moment_sets() : cfg.perturbations;
        rep = run_study(cfg.heston_experiment().setup(), side, ps);
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    Table t;
    t.title = rt.at("title").get<std::string>();
    t.metadata = {{"config_overrides", cfg.overrides},
                  {"grid", {{"points", cfg.grid.points}, {"s_max", cfg.grid.s_max}, {"convention", "s_i = i*s_max/n, i=1..n"}}},
                  {"basis_degree", cfg.grid.degree},
                  {"alternative_optima_possible", rep.alternative_optima},
                  {"seconds", secs},
                  {"reference_provenance", ref.at("provenance")}};
    const bool compare = cfg.perturbations.empty();
    for (std::size_t i = 0; i < rep.rows.size(); ++i) {
        const auto& r = rep.rows[i];
        t.row_labels.push_back(r.label + (r.valid ? "" : " (invalid: " + r.note + ")"));
        auto refv = [&](const char* col) -> std::optional<double> {
            if (!compare || i >= rt.at("rows").size()) return std::nullopt;
            return rt.at("rows")[i].at(col).get<double>();
        };
        t.rows.push_back({{"derivative", r.derivative, refv("derivative")},
                          {"optimal_value", r.optimal_value, refv("optimal_value")},
                          {"estimated_value", r.estimated_value, refv("estimated_value")},
                          {"abs_diff", r.abs_diff, refv("abs_diff")}});
    }
    return t;
}

Table moments_table(const ExperimentConfig& cfg, const json& ref) {
    const json& rt = ref.at("table3");
    Table t;
    t.title = rt.at("title").get<std::string>();
    t.metadata = {{"config_overrides", cfg.overrides},
                  {"equation", "(kappa - rho xi p) + gamma cot(gamma t/2) = 0, first cot branch"},
                  {"reference_provenance", ref.at("provenance")}};
    const json& set1 = rt.at("rows")[0];
    const char* suffix[] = {"t1", "t2"};
    for (std::size_t i = 0; i < cfg.maturities.size() && i < 2; ++i) {
        const auto cm = rhb::heston_critical_moments(cfg.heston, cfg.maturities[i]);
        const std::string s = suffix[i];
        t.row_labels.push_back("t=" + fmt(cfg.maturities[i]) + " computed");
        t.rows.push_back({{"q", cm.q_star, set1.at("q_" + s).get<double>()},
                          {"p", cm.p_star, set1.at("p_" + s).get<double>()},
                          {"psi_q", rhb::lee_psi(cm.q_star), set1.at("psi_q_" + s).get<double>()},
                          {"psi_p", rhb::lee_psi(cm.p_star), set1.at("psi_p_" + s).get<double>()}});
    }
    // psi of every listed set, evaluated at the listed orders.
    for (const auto& row : rt.at("rows")) {
        for (std::size_t i = 0; i < 2; ++i) {
            const std::string s = suffix[i];
            const double q = row.at("q_" + s).get<double>();
            const double p = row.at("p_" + s).get<double>();
            t.row_labels.push_back(row.at("set").get<std::string>() + " " + s + " psi at listed orders");
            t.rows.push_back({{"q", q, q},
                              {"p", p, p},
                              {"psi_q", rhb::lee_psi(q), row.at("psi_q_" + s).get<double>()},
                              {"psi_p", rhb::lee_psi(p), row.at("psi_p_" + s).get<double>()}});
        }
    }
    return t;
}

int cmd_reproduce(const Globals& g, int id) {
    if (id < 1 || id > 5) throw ConfigError("table id must be 1..5");
    const auto cfg = load_config(g.config);
    const auto ref = load_reference();
    const Table t = id == 3 ? moments_table(cfg, ref) : sensitivity_table(id, cfg, ref);
    Output out(g.out);
    render(t, g.format, out.os());
    return 0;
}

// --- figure-region ------------------------------------------------------

int cmd_figure_region(const Globals& g) {
    const std::string path = g.quotes.empty() ? std::string(RHB_DATA_DIR) + "/synthetic_region_demo.csv" : g.quotes;
    const rhb::CallQuoteSet q = read_quotes(path);
    if (q.num_maturities() != 1) throw rhb::DomainError("figure-region expects quotes for exactly one maturity");
    const auto& s = q.slice(0);
    Output out(g.out);
    auto& os = out.os();
    os << "pair,kind,x0,y0,x1,y1\n" << std::setprecision(12);
    if (g.quotes.empty()) std::cerr << "using synthetic demonstration quotes: " << path << "\n";
    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
        rhb::MaturitySlice pair{s.maturity, {s.strikes[i], s.strikes[i + 1]}, {s.prices[i], s.prices[i + 1]}};
        const auto r = rhb::feasible_extrapolation_region(pair);
        const double ysq = r.left_line(r.K_square);
        os << i << ",left_segment," << r.K_square << "," << ysq << "," << pair.strikes[0] << "," << pair.prices[0] << "\n";
        os << i << ",right_segment," << pair.strikes[1] << "," << pair.prices[1] << "," << r.K_circle << ",0\n";
        os << i << ",square," << r.K_square << "," << ysq << "," << r.K_square << "," << ysq << "\n";
        os << i << ",circle," << r.K_circle << ",0," << r.K_circle << ",0\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Model-independent hedging bounds from call quotes"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--quotes", g.quotes, "quote CSV (maturity,moneyness,price)");
    app.add_option("--config", g.config, "experiment config JSON");
    app.add_option("--out", g.out, "output file (default stdout)");
    app.add_option("--format", g.format, "csv|json|md")->check(CLI::IsMember({"csv", "json", "md"}));

    auto* validate = app.add_subcommand("validate", "static-arbitrage checks on a quote CSV");
    auto* extrapolate = app.add_subcommand("extrapolate", "extrapolate total implied variance and reprice");
    auto* gen = app.add_subcommand("gen-heston", "Heston call quotes as CSV");

    BoundFlags bf;
    auto add_bound_flags = [&bf](CLI::App* c) {
        c->add_option("--payoff", bf.payoff, "payoff kind")->check(CLI::IsMember({"forward-start-straddle"}));
        c->add_option("--fs-strike", bf.fs_strike, "forward-start strike");
        c->add_option("--side", bf.side, "super|sub")->check(CLI::IsMember({"super", "sub"}));
        c->add_option("--grid-points", bf.grid_points, "nodes per maturity");
        c->add_option("--grid-max", bf.grid_max, "largest grid node");
        c->add_option("--basis-degree", bf.degree, "strategy monomial degree cap");
    };
    auto* bound = app.add_subcommand("bound", "super/sub-hedging bound");
    add_bound_flags(bound);
    bound->add_option("--measure-out", bf.measure_out, "CSV of the optimal measure s1,s2,weight");
    auto* sens = app.add_subcommand("sensitivity", "first-order perturbation study");
    add_bound_flags(sens);
    std::string perturbations;
    sens->add_option("--perturbations", perturbations, "JSON list of {label, params}");
    auto* repro = app.add_subcommand("reproduce", "reproduce a results table (1-5)");
    int table_id = 0;
    repro->add_option("table", table_id, "table id")->required();
    auto* region = app.add_subcommand("figure-region", "feasible extrapolation regions as CSV");

    // Global flags are accepted after the subcommand as well.
    for (auto* c : {validate, extrapolate, gen, bound, sens, repro, region}) c->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*validate) return cmd_validate(g);
        if (*extrapolate) return cmd_extrapolate(g);
        if (*gen) return cmd_gen_heston(g);
        if (*bound) return cmd_bound(g, bf);
        if (*sens) {
            std::vector<std::string> explicit_flags;
            for (const char* n : {"grid-points", "grid-max", "basis-degree", "fs-strike"})
                if (sens->count(std::string("--") + n) > 0) explicit_flags.emplace_back(n);
            return cmd_sensitivity(g, bf, perturbations, explicit_flags);
        }
        if (*repro) return cmd_reproduce(g, table_id);
        if (*region) return cmd_figure_region(g);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const rhb::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code(e.kind());
    } catch (const json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
