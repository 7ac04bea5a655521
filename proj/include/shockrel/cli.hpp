#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "shockrel/catastrophic.hpp"
#include "shockrel/cumulative.hpp"
#include "shockrel/grid.hpp"
#include "shockrel/model_file.hpp"
#include "shockrel/montecarlo.hpp"

// Command-line front end. Exit codes: 0 success, 1 usage or validation failure,
// 2 numerical failure (non-convergence, ill-conditioning, simulation diagnostics).

namespace shockrel::cli {

/// %.17g: enough digits to round-trip any double.
inline std::string format_real(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct Options {
    std::string model_path;
    std::string grid;
    std::string points;
    std::optional<double> x;
    std::string out_path;
    std::string format = "csv";
    std::uint64_t reps = 100'000;
    std::optional<std::uint64_t> seed;
    unsigned workers = std::max(1u, std::thread::hardware_concurrency());
    std::optional<double> tail_epsilon;
    std::optional<double> rel_tol;
    std::string quantity;
};

namespace detail {

struct Context {
    ModelFile file;
    TruncationPolicy truncation;
    QuadraturePolicy quadrature;
    std::string command;
};

// Names the quantity being computed in numerical-failure messages.
class QuantityError : public NumericalError {
  public:
    QuantityError(const std::string& quantity, const std::string& what)
        : NumericalError(quantity + ": " + what) {}
};

inline std::vector<double> grid_from(const Options& o) {
    if (!o.grid.empty() && !o.points.empty()) throw InvalidParameter("use either --grid or --points, not both");
    if (!o.grid.empty()) return parse_grid(o.grid);
    if (!o.points.empty()) return parse_points(o.points);
    throw InvalidParameter("this command needs --grid MIN:MAX:STEPS or --points LIST");
}

inline json policies_json(const Context& c) {
    return {{"tail_epsilon", c.truncation.tail_epsilon}, {"rel_tol", c.quadrature.rel_tol}};
}

inline const CatastrophicModel& need_catastrophic(const Context& c) {
    if (const auto* m = std::get_if<CatastrophicModel>(&c.file.model)) return *m;
    throw InvalidParameter(c.command + " applies to catastrophic models only");
}

inline void need_cumulative_kind(const Context& c) {
    if (std::holds_alternative<CatastrophicModel>(c.file.model)) {
        throw InvalidParameter(c.command + " applies to cumulative and general_cumulative models only");
    }
}

inline double need_x(const Options& o) {
    if (!o.x) throw InvalidParameter("damage-cdf needs --x VALUE");
    if (!(*o.x >= 0.0 && std::isfinite(*o.x))) throw InvalidParameter("--x must be nonnegative");
    return *o.x;
}

// Analytic value of a curve quantity at time t.
inline std::function<double(double)> analytic_curve(const std::string& quantity, const Context& c, const Options& o) {
    const auto& tr = c.truncation;
    if (quantity == "survival") {
        const auto m = need_catastrophic(c);
        return [m](double t) { return survival_probability(m, t); };
    }
    if (quantity == "fptf-cdf") {
        const auto m = need_catastrophic(c);
        return [m](double t) { return fptf_cdf(m, t); };
    }
    need_cumulative_kind(c);
    if (quantity == "damage-cdf") {
        const double x = need_x(o);
        if (const auto* m = std::get_if<CumulativeModel>(&c.file.model)) {
            return [m = *m, x, tr](double t) { return damage_cdf(m, t, x, tr); };
        }
        const auto g = std::get<GeneralCumulativeModel>(c.file.model);
        return [g, x, tr](double t) { return general_damage_cdf(g, t, x, tr); };
    }
    if (quantity == "damage-mean") {
        if (const auto* m = std::get_if<CumulativeModel>(&c.file.model)) {
            return [m = *m](double t) { return damage_mean(m, t); };
        }
        const auto g = std::get<GeneralCumulativeModel>(c.file.model);
        return [g, tr](double t) { return general_damage_mean(g, t, tr); };
    }
    if (quantity == "fptf-model2") {
        if (const auto* m = std::get_if<CumulativeModel>(&c.file.model)) {
            return [m = *m, tr](double t) { return model2_fptf_cdf(m, t, tr); };
        }
        const auto g = std::get<GeneralCumulativeModel>(c.file.model);
        return [g, tr](double t) { return general_fptf_cdf(g, t, tr); };
    }
    throw InvalidParameter("unknown quantity \"" + quantity + "\"");
}

inline bool is_probability(const std::string& quantity) { return quantity != "damage-mean"; }

inline std::string default_quantity(const Context& c) {
    return std::holds_alternative<CatastrophicModel>(c.file.model) ? "survival" : "fptf-model2";
}

// Simulated estimate of a curve quantity on the whole grid.
inline std::vector<SimulationEstimate> simulate_curve(const std::string& quantity, const Context& c, const Options& o,
                                                      const std::vector<double>& grid, const SimulationConfig& cfg) {
    std::vector<SimulationEstimate> out;
    if (quantity == "survival" || quantity == "fptf-cdf") {
        const auto sample = simulate_catastrophic(need_catastrophic(c), cfg);
        for (double t : grid) out.push_back(quantity == "survival" ? sample.survival(t) : sample.ecdf(t));
        return out;
    }
    need_cumulative_kind(c);
    if (quantity == "fptf-model2") {
        if (const auto* m = std::get_if<CumulativeModel>(&c.file.model)) {
            const auto sample = simulate_fptf_cumulative(*m, cfg);
            for (double t : grid) out.push_back(sample.ecdf(t));
            return out;
        }
    }
    if (quantity != "damage-cdf" && quantity != "damage-mean" && quantity != "fptf-model2") {
        throw InvalidParameter("unknown quantity \"" + quantity + "\"");
    }
    const GeneralCumulativeModel g = std::holds_alternative<CumulativeModel>(c.file.model)
                                         ? as_renewal_model(std::get<CumulativeModel>(c.file.model))
                                         : std::get<GeneralCumulativeModel>(c.file.model);
    const double x = quantity == "damage-cdf" ? need_x(o) : g.threshold;
    const auto sample = simulate_general_cumulative(g, grid, cfg);
    for (std::size_t j = 0; j < grid.size(); ++j) {
        if (quantity == "damage-mean") {
            out.push_back(sample.mean(j));
        } else if (quantity == "damage-cdf") {
            out.push_back(sample.ecdf(j, x));
        } else {
            auto e = sample.ecdf(j, x);  // U(t) > K  <=>  failed by t
            e.mean = 1.0 - e.mean;
            out.push_back(e);
        }
    }
    return out;
}

inline std::string emit_curve(const Context& c, const Options& o, const std::vector<double>& grid,
                              const std::function<double(double)>& f) {
    std::vector<double> values;
    values.reserve(grid.size());
    for (double t : grid) values.push_back(f(t));
    std::ostringstream s;
    if (o.format == "json") {
        json pts = json::array();
        for (std::size_t i = 0; i < grid.size(); ++i) pts.push_back({{"t", grid[i]}, {"value", values[i]}});
        s << json{{"points", pts}, {"model", to_json(c.file.model)}, {"policies", policies_json(c)}}.dump() << '\n';
    } else {
        s << "t,value\n";
        for (std::size_t i = 0; i < grid.size(); ++i) s << format_real(grid[i]) << ',' << format_real(values[i]) << '\n';
    }
    return s.str();
}

inline std::string emit_value(const Context& c, const Options& o, double v) {
    std::ostringstream s;
    if (o.format == "json") {
        s << json{{"value", v}, {"model", to_json(c.file.model)}, {"policies", policies_json(c)}}.dump() << '\n';
    } else {
        s << format_real(v) << '\n';
    }
    return s.str();
}

inline SimulationConfig simulation_config(const Options& o) {
    if (!o.seed) throw InvalidParameter("simulate and compare require --seed");
    SimulationConfig cfg{o.reps, *o.seed, o.workers};
    validate(cfg);
    return cfg;
}

inline std::string run_simulate(const Context& c, const Options& o) {
    const auto grid = grid_from(o);
    const auto cfg = simulation_config(o);
    const auto quantity = o.quantity.empty() ? default_quantity(c) : o.quantity;
    const auto est = simulate_curve(quantity, c, o, grid, cfg);
    std::ostringstream s;
    if (o.format == "json") {
        json pts = json::array();
        for (std::size_t i = 0; i < grid.size(); ++i) {
            pts.push_back({{"t", grid[i]}, {"estimate", est[i].mean}, {"std_error", est[i].std_error}});
        }
        s << json{{"points", pts},
                  {"quantity", quantity},
                  {"simulation", {{"replications", cfg.replications}, {"seed", cfg.master_seed}}},
                  {"model", to_json(c.file.model)},
                  {"policies", policies_json(c)}}
                 .dump()
          << '\n';
    } else {
        s << "t,estimate,std_error\n";
        for (std::size_t i = 0; i < grid.size(); ++i) {
            s << format_real(grid[i]) << ',' << format_real(est[i].mean) << ',' << format_real(est[i].std_error)
              << '\n';
        }
    }
    return s.str();
}

/**
 * For probabilities the reported standard error is the binomial one under the analytic
 * value, sqrt(p (1 - p) / n), which stays meaningful when the empirical frequency is 0 or
 * 1. For damage-mean it is the sample standard error of the estimate.
 */
inline std::string run_compare(const Context& c, const Options& o) {
    const auto grid = grid_from(o);
    const auto cfg = simulation_config(o);
    const auto quantity = o.quantity.empty() ? default_quantity(c) : o.quantity;
    const auto analytic = analytic_curve(quantity, c, o);
    const auto est = simulate_curve(quantity, c, o, grid, cfg);
    struct Row {
        double t, analytic, estimate, se, z;
    };
    std::vector<Row> rows;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double a = analytic(grid[i]);
        const double se = is_probability(quantity)
                              ? std::sqrt(std::clamp(a, 0.0, 1.0) * (1.0 - std::clamp(a, 0.0, 1.0)) /
                                          static_cast<double>(cfg.replications))
                              : est[i].std_error;
        const double diff = est[i].mean - a;
        double z = 0.0;
        if (se > 0.0) z = diff / se;
        else if (diff != 0.0) z = std::copysign(std::numeric_limits<double>::infinity(), diff);
        rows.push_back({grid[i], a, est[i].mean, se, z});
    }
    std::ostringstream s;
    if (o.format == "json") {
        json pts = json::array();
        for (const auto& r : rows) {
            pts.push_back({{"t", r.t}, {"analytic", r.analytic}, {"estimate", r.estimate}, {"std_error", r.se}, {"z", r.z}});
        }
        s << json{{"points", pts},
                  {"quantity", quantity},
                  {"simulation", {{"replications", cfg.replications}, {"seed", cfg.master_seed}}},
                  {"model", to_json(c.file.model)},
                  {"policies", policies_json(c)}}
                 .dump()
          << '\n';
    } else {
        s << "t,analytic,estimate,std_error,z\n";
        for (const auto& r : rows) {
            s << format_real(r.t) << ',' << format_real(r.analytic) << ',' << format_real(r.estimate) << ','
              << format_real(r.se) << ',' << format_real(r.z) << '\n';
        }
    }
    return s.str();
}

inline std::string dispatch(const std::string& command, const Context& c, const Options& o) {
    if (command == "survival" || command == "fptf-cdf" || command == "damage-cdf" || command == "damage-mean" ||
        command == "fptf-model2") {
        const auto grid = grid_from(o);
        auto f = analytic_curve(command, c, o);
        try {
            return emit_curve(c, o, grid, f);
        } catch (const NumericalError& e) {
            throw QuantityError(command, e.what());
        }
    }
    if (command == "mean-fptf") {
        try {
            if (const auto* m = std::get_if<CatastrophicModel>(&c.file.model)) {
                return emit_value(c, o, mean_fptf(*m, c.quadrature));
            }
            if (const auto* m = std::get_if<CumulativeModel>(&c.file.model)) {
                return emit_value(c, o, model2_fptf_mean(*m, c.truncation, c.quadrature));
            }
        } catch (const NumericalError& e) {
            throw QuantityError("mean-fptf", e.what());
        }
        throw Unsupported("mean-fptf is not available for general_cumulative models");
    }
    try {
        if (command == "simulate") return run_simulate(c, o);
        if (command == "compare") return run_compare(c, o);
    } catch (const NumericalError& e) {
        throw QuantityError(command, e.what());
    } catch (const SimulationDiagnostic& e) {
        throw QuantityError(command, e.what());
    }
    throw InvalidParameter("unknown command " + command);
}

}  // namespace detail

/// Parses args (without the program name), runs one subcommand and returns the exit code.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Two-process shock model reliability toolkit", "shockrel"};
    app.require_subcommand(1);
    Options o;

    const std::vector<std::pair<std::string, std::string>> commands = {
        {"survival", "P(no failure by t) for a catastrophic model"},
        {"fptf-cdf", "first-passage-time-to-failure CDF for a catastrophic model"},
        {"mean-fptf", "mean first passage time to failure"},
        {"damage-cdf", "P(U(t) <= x) for a cumulative model"},
        {"damage-mean", "E[U(t)] for a cumulative model"},
        {"fptf-model2", "P(U(t) > K) for a cumulative model"},
        {"simulate", "Monte Carlo estimates on a grid"},
        {"compare", "analytic values against Monte Carlo estimates"},
    };
    std::vector<CLI::App*> subs;
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--model", o.model_path, "model JSON file")->required();
        sub->add_option("--grid", o.grid, "MIN:MAX:STEPS, inclusive");
        sub->add_option("--points", o.points, "comma-separated time points");
        sub->add_option("--x", o.x, "damage level for damage-cdf");
        sub->add_option("--out", o.out_path, "write the report here instead of standard output");
        sub->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
        sub->add_option("--tail-epsilon", o.tail_epsilon, "series truncation mass");
        sub->add_option("--rel-tol", o.rel_tol, "quadrature relative tolerance");
        if (name == "simulate" || name == "compare") {
            sub->add_option("--reps", o.reps, "replications");
            sub->add_option("--seed", o.seed, "master seed")->required();
            sub->add_option("--workers", o.workers, "worker threads");
            sub->add_option("--quantity", o.quantity,
                            "survival | fptf-cdf | damage-cdf | damage-mean | fptf-model2");
        }
        subs.push_back(sub);
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }

    std::string command;
    for (auto* sub : subs) {
        if (sub->parsed()) command = sub->get_name();
    }

    std::string report;
    try {
        detail::Context c{load_model(o.model_path), {}, {}, command};
        c.truncation.tail_epsilon = o.tail_epsilon.value_or(c.file.policies.tail_epsilon);
        c.quadrature.rel_tol = o.rel_tol.value_or(c.file.policies.rel_tol);
        validate(c.truncation);
        validate(c.quadrature);
        report = detail::dispatch(command, c, o);
    } catch (const NumericalError& e) {
        err << "numerical failure in " << e.what() << '\n';
        return 2;
    } catch (const SimulationDiagnostic& e) {
        err << "numerical failure in " << command << ": " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }

    if (o.out_path.empty()) {
        out << report;
        return 0;
    }
    std::ofstream file(o.out_path, std::ios::binary | std::ios::trunc);
    if (!file || !(file << report) || !file.flush()) {
        err << "error: cannot write " << o.out_path << '\n';
        return 1;
    }
    return 0;
}

}  // namespace shockrel::cli
